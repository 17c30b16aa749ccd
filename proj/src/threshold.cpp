#include "mtinar/threshold.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "mtinar/optimize.hpp"

namespace mtinar {

namespace {

struct CandidateOutcome {
    bool skipped = true;
    double score = 0.0;
};

bool enough_per_regime(std::span<const Transition> transitions, int r, int regime_order) {
    ModelSpec probe;
    probe.r = r;
    probe.regime_order = regime_order;
    long n1 = 0, n2 = 0;
    for (const Transition& tr : transitions)
        (indicator_one(probe, tr.prev) ? n1 : n2) += 1;
    return n1 >= 2 && n2 >= 2;
}

double conditional_variance_at(int x_prev, int r, int regime_order, double phi1, double phi2,
                               double lambda) {
    ModelSpec probe;
    probe.r = r;
    probe.regime_order = regime_order;
    const double x = x_prev;
    return indicator_one(probe, x_prev)
               ? phi1 * (1.0 - phi1) * x + lambda
               : phi2 * (1.0 + phi2) * x + lambda * (1.0 + lambda);
}

// Squared-residual regression score: deviations of the squared mean
// residuals from the regime conditional-variance law.
double variance_score(std::span<const Transition> transitions, int r, int regime_order,
                      double phi1, double phi2, double lambda) {
    double total = 0.0;
    for (const Transition& tr : transitions) {
        const double u = mean_residual(tr, r, regime_order, phi1, phi2, lambda);
        const double v = u * u;
        const double d = v - conditional_variance_at(tr.prev, r, regime_order, phi1, phi2, lambda);
        total += d * d;
    }
    return total;
}

template <typename Evaluate>
std::vector<CandidateOutcome> evaluate_candidates(std::span<const Transition> transitions,
                                                  int regime_order, std::pair<int, int> range,
                                                  Evaluate evaluate) {
    const int lo = range.first, hi = range.second;
    if (lo > hi) throw InputError("empty candidate range");
    std::vector<CandidateOutcome> outcomes(static_cast<std::size_t>(hi - lo + 1));
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t k = 0; k < static_cast<std::int64_t>(outcomes.size()); ++k) {
        const int r = lo + static_cast<int>(k);
        if (!enough_per_regime(transitions, r, regime_order)) continue;
        try {
            outcomes[static_cast<std::size_t>(k)] = {false, evaluate(r)};
        } catch (const ConvergenceError& e) {
            outcomes[static_cast<std::size_t>(k)] = {false, e.best_fit.loglik};
        } catch (const NumericError&) {
            // leave skipped
        }
    }
    return outcomes;
}

ThresholdSearchResult assemble(const std::vector<CandidateOutcome>& outcomes, int lo,
                               bool maximize, ThresholdMethod method) {
    ThresholdSearchResult result;
    result.method = method;
    bool found = false;
    double best_score = 0.0;
    for (std::size_t k = 0; k < outcomes.size(); ++k) {
        const int r = lo + static_cast<int>(k);
        if (outcomes[k].skipped) {
            result.skipped.push_back(r);
            continue;
        }
        result.per_candidate[r] = outcomes[k].score;
        const bool better = maximize ? outcomes[k].score > best_score
                                     : outcomes[k].score < best_score;
        if (!found || better) {
            result.r_hat = r;
            best_score = outcomes[k].score;
            found = true;
        }
    }
    if (!found) throw NumericError("every threshold candidate was skipped");
    return result;
}

}  // namespace

std::pair<int, int> candidate_range(const CountSeries& series, double lo_q, double hi_q) {
    series.validate();
    if (series.size() < 10) throw InputError("need at least 10 observations for quantiles");
    if (!(lo_q >= 0.0 && lo_q < hi_q && hi_q <= 1.0))
        throw InputError("quantile levels must satisfy 0 <= lo < hi <= 1");

    std::vector<int> sorted = series.values;
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    auto type1 = [&](double q) {
        const auto rank = static_cast<std::size_t>(std::max(1.0, std::ceil(n * q)));
        return sorted[std::min(rank, sorted.size()) - 1];
    };
    return {type1(lo_q), type1(hi_q)};
}

ThresholdSearchResult search_r_cml(const CountSeries& series, int regime_order,
                                   std::pair<int, int> range, const CmlOptions& options) {
    const std::vector<Transition> transitions = transitions_of(series);
    CmlOptions grid_options = options;
    grid_options.with_covariance = false;  // only the maximized log-likelihood matters here

    auto outcomes = evaluate_candidates(
        transitions, regime_order, range,
        [&](int r) { return cml_fit(transitions, r, regime_order, {}, grid_options).loglik; });
    ThresholdSearchResult result =
        assemble(outcomes, range.first, /*maximize=*/true, ThresholdMethod::CMLGrid);

    try {
        result.fit_at_r_hat = cml_fit(transitions, result.r_hat, regime_order, {}, options);
    } catch (const ConvergenceError& e) {
        result.fit_at_r_hat = e.best_fit;
    }
    return result;
}

ThresholdSearchResult search_r_cls_var(const CountSeries& series, int regime_order,
                                       std::pair<int, int> range) {
    const std::vector<Transition> transitions = transitions_of(series);

    auto outcomes = evaluate_candidates(transitions, regime_order, range, [&](int r) {
        const MeanFit init = cls_fit(transitions, r, regime_order);
        const std::array<double, 3> z0 = {logit(std::clamp(init.phi1_hat, 1e-4, 1.0 - 1e-4)),
                                          logit(std::clamp(init.phi2_hat, 1e-4, 1.0 - 1e-4)),
                                          std::log(std::max(init.lambda_hat, 1e-4))};
        const ObjectiveFn objective = [&](std::span<const double> z) {
            return variance_score(transitions, r, regime_order, inv_logit(z[0]),
                                  inv_logit(z[1]), std::exp(z[2]));
        };
        return nelder_mead(objective, z0).value;
    });
    ThresholdSearchResult result =
        assemble(outcomes, range.first, /*maximize=*/false, ThresholdMethod::VarianceCLS);
    result.fit_at_r_hat = cls_fit(transitions, result.r_hat, regime_order);
    return result;
}

ThresholdSearchResult dness_search(const CountSeries& series, int regime_order, double lambda_lo,
                                   double lambda_hi, int grid_points, std::pair<int, int> range) {
    if (!(lambda_lo < lambda_hi)) throw InputError("lambda grid bounds must satisfy lo < hi");
    if (grid_points < 1) throw InputError("lambda grid needs at least one interval");
    const std::vector<Transition> transitions = transitions_of(series);
    const int lo = range.first, hi = range.second;
    if (lo > hi) throw InputError("empty candidate range");

    // The regime split here is a plain mean split on the lagged value; the
    // regime-order flag only matters for the final least-squares fit.
    //
    // The one-regime baseline is fit with a free intercept, so the gain is
    // measured against a fixed yardstick and the grid comparison across
    // innovation means reduces to the best-fitting split. Profiling the
    // baseline on each grid value instead lets badly misfit grid points
    // dominate the comparison and the search degenerates.
    const double n = static_cast<double>(transitions.size());
    double pooled_xx = 0.0, pooled_xy = 0.0, pooled_x = 0.0, pooled_y = 0.0;
    for (const Transition& tr : transitions) {
        const double x = tr.prev, y = tr.next;
        pooled_xx += x * x;
        pooled_xy += x * y;
        pooled_x += x;
        pooled_y += y;
    }
    const double pooled_det = n * pooled_xx - pooled_x * pooled_x;
    if (!(pooled_det > 0.0)) throw NumericError("degenerate series: constant lagged values");
    const double base_slope = (n * pooled_xy - pooled_x * pooled_y) / pooled_det;
    const double base_intercept = (pooled_xx * pooled_y - pooled_x * pooled_xy) / pooled_det;
    double baseline_sse = 0.0;
    for (const Transition& tr : transitions) {
        const double res = tr.next - base_slope * tr.prev - base_intercept;
        baseline_sse += res * res;
    }

    struct SplitSums {
        double xx1 = 0.0, xy1 = 0.0, x1 = 0.0;
        double xx2 = 0.0, xy2 = 0.0, x2 = 0.0;
    };
    std::vector<SplitSums> split(static_cast<std::size_t>(hi - lo + 1));
    for (std::size_t k = 0; k < split.size(); ++k) {
        const int r = lo + static_cast<int>(k);
        for (const Transition& tr : transitions) {
            const double x = tr.prev, y = tr.next;
            if (tr.prev <= r) {
                split[k].xx1 += x * x;
                split[k].xy1 += x * y;
                split[k].x1 += x;
            } else {
                split[k].xx2 += x * x;
                split[k].xy2 += x * y;
                split[k].x2 += x;
            }
        }
    }

    auto split_sse = [&](std::size_t k, int r, double lambda) {
        const SplitSums& s = split[k];
        const double slope1 = (s.xy1 - lambda * s.x1) / s.xx1;
        const double slope2 = (s.xy2 - lambda * s.x2) / s.xx2;
        double sse = 0.0;
        for (const Transition& tr : transitions) {
            const double res =
                tr.next - (tr.prev <= r ? slope1 : slope2) * tr.prev - lambda;
            sse += res * res;
        }
        return sse;
    };

    int best_r = 0;
    double best_sse = 0.0, best_lambda = 0.0;
    bool found = false;
    for (int j = 0; j <= grid_points; ++j) {
        const double lambda =
            lambda_lo + static_cast<double>(j) * (lambda_hi - lambda_lo) / grid_points;
        int r_j = 0;
        double sse_j = 0.0;
        bool found_j = false;
        for (std::size_t k = 0; k < split.size(); ++k) {
            const int r = lo + static_cast<int>(k);
            if (split[k].xx1 <= 0.0 || split[k].xx2 <= 0.0) continue;  // empty regime
            const double sse = split_sse(k, r, lambda);
            if (!found_j || sse < sse_j) {
                r_j = r;
                sse_j = sse;
                found_j = true;
            }
        }
        if (!found_j) continue;
        if (!found || sse_j < best_sse) {
            best_r = r_j;
            best_sse = sse_j;
            best_lambda = lambda;
            found = true;
        }
    }
    if (!found) throw NumericError("every threshold candidate was skipped");

    ThresholdSearchResult result;
    result.method = ThresholdMethod::DNess;
    result.r_hat = best_r;
    result.dness_lambda = best_lambda;
    for (std::size_t k = 0; k < split.size(); ++k) {
        const int r = lo + static_cast<int>(k);
        if (split[k].xx1 <= 0.0 || split[k].xx2 <= 0.0) {
            result.skipped.push_back(r);
            continue;
        }
        result.per_candidate[r] = baseline_sse - split_sse(k, r, best_lambda);
    }
    result.fit_at_r_hat = cls_fit(transitions, result.r_hat, regime_order);
    return result;
}

}  // namespace mtinar
