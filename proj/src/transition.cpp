#include "mtinar/transition.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "mtinar/errors.hpp"

namespace mtinar {

namespace {

constexpr int kLogFactorialTableSize = 1 << 14;

// lgamma(k+1) for integer k; cached because the convolution sums hit the
// same small arguments constantly. Direct factorials would overflow well
// before count 200, hence everything stays in log space.
double log_factorial(int k) {
    static const std::vector<double> table = [] {
        std::vector<double> t(kLogFactorialTableSize);
        for (int i = 0; i < kLogFactorialTableSize; ++i)
            t[i] = std::lgamma(static_cast<double>(i) + 1.0);
        return t;
    }();
    if (k < kLogFactorialTableSize) return table[k];
    return std::lgamma(static_cast<double>(k) + 1.0);
}

inline double log_binomial_coeff(int n, int k) {
    return log_factorial(n) - log_factorial(k) - log_factorial(n - k);
}

double log_sum_exp(const std::vector<double>& terms) {
    double max_term = -std::numeric_limits<double>::infinity();
    for (double t : terms) max_term = std::max(max_term, t);
    if (!std::isfinite(max_term)) return max_term;
    double acc = 0.0;
    for (double t : terms) acc += std::exp(t - max_term);
    return max_term + std::log(acc);
}

// Binomial thinning convolved with a Poisson innovation.
double log_p1(int i, int j, double phi, double lambda) {
    const double log_phi = std::log(phi);
    const double log_1mphi = std::log1p(-phi);
    const double log_lambda = std::log(lambda);
    std::vector<double> terms;
    terms.reserve(static_cast<std::size_t>(std::min(i, j)) + 1);
    for (int m = 0; m <= std::min(i, j); ++m) {
        terms.push_back(log_binomial_coeff(i, m) + m * log_phi + (i - m) * log_1mphi -
                        lambda + (j - m) * log_lambda - log_factorial(j - m));
    }
    return log_sum_exp(terms);
}

// Negative-binomial thinning convolved with a geometric innovation. The
// thinning of zero is exactly zero, so row i = 0 reduces to the geometric
// innovation law alone.
double log_p2(int i, int j, double phi, double lambda) {
    const double log_lambda = std::log(lambda);
    const double log_1plambda = std::log1p(lambda);
    if (i == 0) return j * log_lambda - (j + 1) * log_1plambda;
    const double log_phi = std::log(phi);
    const double log_1pphi = std::log1p(phi);
    std::vector<double> terms;
    terms.reserve(static_cast<std::size_t>(j) + 1);
    for (int m = 0; m <= j; ++m) {
        terms.push_back(log_factorial(i + m - 1) - log_factorial(i - 1) - log_factorial(m) +
                        m * log_phi - (i + m) * log_1pphi +
                        (j - m) * log_lambda - (j - m + 1) * log_1plambda);
    }
    return log_sum_exp(terms);
}

struct RawRows {
    DenseMatrix probs;
    std::vector<double> deficit;
};

void fill_raw_row(const ModelSpec& spec, DenseMatrix& probs, std::vector<double>& deficit,
                  int i) {
    const int max_state = static_cast<int>(probs.cols()) - 1;
    double sum = 0.0;
    for (int j = 0; j <= max_state; ++j) {
        const double p = transition_probability(spec, i, j);
        probs(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = p;
        sum += p;
    }
    deficit[static_cast<std::size_t>(i)] = 1.0 - sum;
}

RawRows build_raw_rows(const ModelSpec& spec, int max_state) {
    spec.validate();
    if (max_state < 0) throw InputError("max_state must be nonnegative");
    const std::size_t n = static_cast<std::size_t>(max_state) + 1;
    RawRows raw{DenseMatrix(n, n), std::vector<double>(n, 0.0)};
#pragma omp parallel for schedule(dynamic, 8)
    for (std::int64_t i = 0; i <= max_state; ++i)
        fill_raw_row(spec, raw.probs, raw.deficit, static_cast<int>(i));
    return raw;
}

RawRows build_raw_rows_serial(const ModelSpec& spec, int max_state) {
    spec.validate();
    if (max_state < 0) throw InputError("max_state must be nonnegative");
    const std::size_t n = static_cast<std::size_t>(max_state) + 1;
    RawRows raw{DenseMatrix(n, n), std::vector<double>(n, 0.0)};
    for (int i = 0; i <= max_state; ++i) fill_raw_row(spec, raw.probs, raw.deficit, i);
    return raw;
}

void renormalize_rows(DenseMatrix& m, const std::vector<double>& deficit) {
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const double scale = 1.0 / (1.0 - deficit[i]);
        for (double& p : m.row(i)) p *= scale;
    }
}

TransitionMatrixResult finish_matrix(RawRows raw, double max_deficit, const char* caller) {
    for (std::size_t i = 0; i < raw.deficit.size(); ++i) {
        if (raw.deficit[i] > max_deficit) {
            throw TruncationError(std::string(caller) + ": row " + std::to_string(i) +
                                  " keeps only " + std::to_string(1.0 - raw.deficit[i]) +
                                  " of its mass; increase max_state");
        }
    }
    renormalize_rows(raw.probs, raw.deficit);
    return {std::move(raw.probs), std::move(raw.deficit)};
}

std::vector<double> power_iterate(const DenseMatrix& p, double tol) {
    const std::size_t n = p.rows();
    std::vector<double> pi(n, 1.0 / static_cast<double>(n));
    constexpr int kMaxIterations = 1000000;
    for (int iter = 0; iter < kMaxIterations; ++iter) {
        std::vector<double> next = vec_mat(pi, p);
        double sum = 0.0;
        for (double v : next) sum += v;
        for (double& v : next) v /= sum;
        double change = 0.0;
        for (std::size_t i = 0; i < n; ++i) change += std::abs(next[i] - pi[i]);
        pi = std::move(next);
        if (change < tol) return pi;
    }
    throw NumericError("stationary power iteration did not converge");
}

}  // namespace

double transition_log_probability(const ModelSpec& spec, int i, int j) {
    if (i < 0 || j < 0) throw InputError("transition states must be nonnegative");
    return regime_of(spec, i) == RegimeKind::BinomialPoisson
               ? log_p1(i, j, spec.phi1, spec.lambda)
               : log_p2(i, j, spec.phi2, spec.lambda);
}

double transition_probability(const ModelSpec& spec, int i, int j) {
    return std::clamp(std::exp(transition_log_probability(spec, i, j)), 0.0, 1.0);
}

int row_truncation_point(const ModelSpec& spec, int i, double mass_tol) {
    constexpr int kCap = 1 << 20;
    double cumulative = 0.0;
    for (int j = 0; j < kCap; ++j) {
        cumulative += transition_probability(spec, i, j);
        if (1.0 - cumulative <= mass_tol) return j;
    }
    throw TruncationError("row mass does not reach the requested tolerance");
}

int default_max_state(const ModelSpec& spec, int observed_max, double mass_tol) {
    spec.validate();
    if (observed_max < 0) throw InputError("observed maximum must be nonnegative");
    int m = observed_max;
    for (int i = 0; i <= observed_max; ++i)
        m = std::max(m, row_truncation_point(spec, i, mass_tol));
    return m;
}

int simulation_max_state(const ModelSpec& spec) {
    const double phi_max = std::max(spec.phi1, spec.phi2);
    return static_cast<int>(std::ceil(8.0 * std::max(spec.lambda, 1.0) / (1.0 - phi_max)));
}

int stationary_max_state(const ModelSpec& spec, double tol) {
    constexpr int kCap = 8192;
    int m = std::max(simulation_max_state(spec), spec.r + 1);
    while (m <= kCap) {
        // The top row has the widest support: check it first to fail fast,
        // then verify the rest in parallel.
        if (row_truncation_point(spec, m, tol) > m) {
            m = m * 3 / 2 + 8;
            continue;
        }
        bool ok = true;
#pragma omp parallel for schedule(dynamic, 16) reduction(&& : ok)
        for (int i = 0; i < m; ++i)
            ok = ok && row_truncation_point(spec, i, tol) <= m;
        if (ok) return m;
        m = m * 3 / 2 + 8;
    }
    throw TruncationError("no state bound below 8192 retains the requested row mass");
}

TransitionMatrixResult transition_matrix(const ModelSpec& spec, int max_state) {
    return finish_matrix(build_raw_rows(spec, max_state), 1e-6, "transition_matrix");
}

namespace serial {
TransitionMatrixResult transition_matrix(const ModelSpec& spec, int max_state) {
    return finish_matrix(build_raw_rows_serial(spec, max_state), 1e-6, "transition_matrix");
}
}  // namespace serial

std::vector<double> stationary_distribution(const ModelSpec& spec, int max_state, double tol) {
    TransitionMatrixResult result =
        finish_matrix(build_raw_rows(spec, max_state), tol, "stationary_distribution");
    return power_iterate(result.matrix, tol);
}

TheoreticalMoments theoretical_moments(const ModelSpec& spec, int max_state, int max_lag) {
    if (max_lag < 1) throw InputError("max_lag must be >= 1");
    constexpr double kTol = 1e-12;
    TransitionMatrixResult result =
        finish_matrix(build_raw_rows(spec, max_state), kTol, "theoretical_moments");
    const DenseMatrix& p = result.matrix;
    const std::vector<double> pi = power_iterate(p, kTol);
    const std::size_t n = pi.size();

    TheoreticalMoments out;
    double q = 0.0, m1 = 0.0, m2 = 0.0, s1 = 0.0, s2 = 0.0;
    for (std::size_t x = 0; x < n; ++x) {
        const double xv = static_cast<double>(x);
        if (indicator_one(spec, static_cast<int>(x))) {
            q += pi[x];
            m1 += pi[x] * xv;
            s1 += pi[x] * xv * xv;
        } else {
            m2 += pi[x] * xv;
            s2 += pi[x] * xv * xv;
        }
    }
    out.q = q;
    out.mu1 = q > 0.0 ? m1 / q : 0.0;
    out.mu2 = q < 1.0 ? m2 / (1.0 - q) : 0.0;
    out.sigma1_sq = q > 0.0 ? s1 / q - out.mu1 * out.mu1 : 0.0;
    out.sigma2_sq = q < 1.0 ? s2 / (1.0 - q) - out.mu2 * out.mu2 : 0.0;

    const double phi1 = spec.phi1, phi2 = spec.phi2, lambda = spec.lambda;
    out.mean = q * phi1 * out.mu1 + (1.0 - q) * phi2 * out.mu2 + lambda;
    const double regime_gap = phi1 * out.mu1 - phi2 * out.mu2;
    out.variance = q * (phi1 * phi1 * out.sigma1_sq + phi1 * (1.0 - phi1) * out.mu1) +
                   q * lambda +
                   (1.0 - q) * (phi2 * phi2 * out.sigma2_sq + phi2 * (1.0 + phi2) * out.mu2) +
                   (1.0 - q) * lambda * (1.0 + lambda) +
                   q * (1.0 - q) * regime_gap * regime_gap;

    // Autocovariance at lag h from the regime-split cross moments of
    // (X_0, X_{h-1}); w carries pi_j * j pushed h-1 steps forward.
    out.acf.resize(static_cast<std::size_t>(max_lag));
    std::vector<double> w(n);
    for (std::size_t j = 0; j < n; ++j) w[j] = pi[j] * static_cast<double>(j);
    for (int h = 1; h <= max_lag; ++h) {
        double num1 = 0.0, num2 = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double contrib = w[j] * static_cast<double>(j);
            if (indicator_one(spec, static_cast<int>(j)))
                num1 += contrib;
            else
                num2 += contrib;
        }
        const double cov = phi1 * (num1 - q * out.mu1 * out.mean) +
                           phi2 * (num2 - (1.0 - q) * out.mu2 * out.mean);
        out.acf[static_cast<std::size_t>(h - 1)] = cov / out.variance;
        if (h < max_lag) w = vec_mat(w, p);
    }
    return out;
}

}  // namespace mtinar
