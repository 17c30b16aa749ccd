#include "mtinar/cml.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "mtinar/optimize.hpp"
#include "mtinar/transition.hpp"

namespace mtinar {

namespace {

constexpr double kZeroProbabilityPenalty = -1e10;

// Distinct (prev, next) pairs with multiplicities. Observed series repeat
// the same small counts constantly, so evaluating per distinct pair cuts
// likelihood cost by an order of magnitude.
struct PairTable {
    std::vector<Transition> pairs;
    std::vector<double> counts;
    std::vector<std::size_t> observation_pair;  // transition index -> pair index

    explicit PairTable(std::span<const Transition> transitions) {
        std::map<std::pair<int, int>, std::size_t> index;
        observation_pair.reserve(transitions.size());
        for (const Transition& tr : transitions) {
            auto [it, inserted] = index.try_emplace({tr.prev, tr.next}, pairs.size());
            if (inserted) {
                pairs.push_back(tr);
                counts.push_back(0.0);
            }
            counts[it->second] += 1.0;
            observation_pair.push_back(it->second);
        }
    }
};

void require_interior(double phi1, double phi2, double lambda) {
    if (!(phi1 > 0.0 && phi1 < 1.0 && phi2 > 0.0 && phi2 < 1.0 && lambda > 0.0))
        throw InputError("parameters must lie strictly inside (0,1)^2 x (0,inf)");
}

double floored_log_probability(const ModelSpec& spec, const Transition& tr, bool& flagged) {
    const double lp = transition_log_probability(spec, tr.prev, tr.next);
    if (std::isfinite(lp)) return lp;
    flagged = true;
    return kZeroProbabilityPenalty;
}

ModelSpec spec_of(double phi1, double phi2, double lambda, int r, int regime_order) {
    ModelSpec spec;
    spec.phi1 = phi1;
    spec.phi2 = phi2;
    spec.lambda = lambda;
    spec.r = r;
    spec.regime_order = regime_order;
    return spec;
}

// Total log-likelihood over distinct pairs; fast path for the optimizer.
double pair_loglik(const PairTable& table, const ModelSpec& spec) {
    bool flagged = false;
    double total = 0.0;
    for (std::size_t k = 0; k < table.pairs.size(); ++k)
        total += table.counts[k] * floored_log_probability(spec, table.pairs[k], flagged);
    return total;
}

struct Transformed {
    std::array<double, 3> z;
};

Transformed to_unconstrained(double phi1, double phi2, double lambda) {
    return {{logit(phi1), logit(phi2), std::log(lambda)}};
}

std::array<double, 3> to_natural(std::span<const double> z) {
    return {inv_logit(z[0]), inv_logit(z[1]), std::exp(z[2])};
}

double clamp_open_unit(double p) { return std::clamp(p, 1e-4, 1.0 - 1e-4); }

Eigen::Matrix3d pseudo_inverse(const Eigen::Matrix3d& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(m);
    const Eigen::Vector3d values = solver.eigenvalues();
    const double cutoff = 1e-12 * values.cwiseAbs().maxCoeff();
    Eigen::Vector3d inverted = Eigen::Vector3d::Zero();
    for (int i = 0; i < 3; ++i)
        if (std::abs(values(i)) > cutoff) inverted(i) = 1.0 / values(i);
    return solver.eigenvectors() * inverted.asDiagonal() * solver.eigenvectors().transpose();
}

}  // namespace

LikelihoodEval conditional_log_likelihood(std::span<const Transition> transitions, double phi1,
                                          double phi2, double lambda, int r, int regime_order,
                                          bool with_gradient) {
    require_interior(phi1, phi2, lambda);
    const ModelSpec spec = spec_of(phi1, phi2, lambda, r, regime_order);
    spec.validate();

    const PairTable table(transitions);
    std::vector<double> per_pair(table.pairs.size());
    LikelihoodEval eval;
    for (std::size_t k = 0; k < table.pairs.size(); ++k)
        per_pair[k] = floored_log_probability(spec, table.pairs[k], eval.has_zero_probability);

    eval.per_observation.reserve(transitions.size());
    for (std::size_t t = 0; t < transitions.size(); ++t) {
        const double lp = per_pair[table.observation_pair[t]];
        eval.per_observation.push_back(lp);
        eval.loglik += lp;
    }

    if (with_gradient) {
        const std::array<double, 3> at = {phi1, phi2, lambda};
        std::vector<double> steps = derivative_steps(at, 1e-6);
        steps[0] = std::min({steps[0], 0.5 * phi1, 0.5 * (1.0 - phi1)});
        steps[1] = std::min({steps[1], 0.5 * phi2, 0.5 * (1.0 - phi2)});
        steps[2] = std::min(steps[2], 0.5 * lambda);
        std::array<double, 3> grad{};
        for (int d = 0; d < 3; ++d) {
            const auto di = static_cast<std::size_t>(d);
            std::array<double, 3> up = at, down = at;
            up[di] += steps[di];
            down[di] -= steps[di];
            const ModelSpec spec_up = spec_of(up[0], up[1], up[2], r, regime_order);
            const ModelSpec spec_down = spec_of(down[0], down[1], down[2], r, regime_order);
            grad[di] =
                (pair_loglik(table, spec_up) - pair_loglik(table, spec_down)) / (2.0 * steps[di]);
        }
        eval.gradient = grad;
    }
    return eval;
}

LikelihoodEval conditional_log_likelihood(const CountSeries& series, double phi1, double phi2,
                                          double lambda, int r, int regime_order,
                                          bool with_gradient) {
    const std::vector<Transition> transitions = transitions_of(series);
    return conditional_log_likelihood(transitions, phi1, phi2, lambda, r, regime_order,
                                      with_gradient);
}

MeanFit cml_fit(std::span<const Transition> transitions, int r, int regime_order,
                const std::optional<MeanFit>& init, const CmlOptions& options) {
    const PairTable table(transitions);

    double init_phi1, init_phi2, init_lambda;
    long n_lower = 0, n_upper = 0;
    if (init) {
        init_phi1 = init->phi1_hat;
        init_phi2 = init->phi2_hat;
        init_lambda = init->lambda_hat;
    } else {
        const MeanFit cls = cls_fit(transitions, r, regime_order);
        init_phi1 = cls.phi1_hat;
        init_phi2 = cls.phi2_hat;
        init_lambda = cls.lambda_hat;
    }
    {
        ModelSpec probe;
        probe.r = r;
        probe.regime_order = regime_order;
        for (const Transition& tr : transitions)
            (indicator_one(probe, tr.prev) ? n_lower : n_upper) += 1;
    }

    const Transformed z0 = to_unconstrained(clamp_open_unit(init_phi1),
                                            clamp_open_unit(init_phi2),
                                            std::max(init_lambda, 1e-4));

    const ObjectiveFn objective = [&](std::span<const double> z) {
        const auto [phi1, phi2, lambda] = to_natural(z);
        return -pair_loglik(table, spec_of(phi1, phi2, lambda, r, regime_order));
    };

    NelderMeadOptions nm;
    nm.max_evaluations = options.max_evaluations;
    nm.param_tol = options.param_tol;
    nm.value_tol = options.value_tol;

    NelderMeadResult best = nelder_mead(objective, z0.z, nm);

    // Restart from jittered initials when the run parked near the box edge;
    // boundary optima of misspecified candidates are a known failure mode.
    const auto [p1, p2, lm] = to_natural(best.x);
    const double edge = std::min({p1, 1.0 - p1, p2, 1.0 - p2, lm});
    if (edge < options.boundary_guard) {
        constexpr double kJitters[4][3] = {{0.5, -0.5, 0.5},
                                           {-0.5, 0.5, -0.5},
                                           {1.0, 1.0, -1.0},
                                           {-1.0, -1.0, 1.0}};
        for (const auto& jitter : kJitters) {
            std::array<double, 3> start = z0.z;
            for (int i = 0; i < 3; ++i) start[static_cast<std::size_t>(i)] += jitter[i];
            NelderMeadResult candidate = nelder_mead(objective, start, nm);
            if (candidate.value < best.value) best = std::move(candidate);
        }
    }

    const auto [phi1, phi2, lambda] = to_natural(best.x);
    MeanFit fit;
    fit.method = FitMethod::CML;
    fit.phi1_hat = phi1;
    fit.phi2_hat = phi2;
    fit.lambda_hat = lambda;
    fit.loglik = -best.value;
    fit.n_lower = n_lower;
    fit.n_upper = n_upper;
    fit.n_transitions = static_cast<long>(transitions.size());
    fit.valid_parameters = true;  // the transform keeps iterates interior

    if (!best.converged)
        throw ConvergenceError("likelihood ascent hit the evaluation cap", fit);

    if (options.with_covariance) {
        const CmlCovariance cov = cml_covariance(transitions, r, regime_order, fit);
        fit.covariance = cov.sandwich;
        const double n = static_cast<double>(transitions.size());
        for (int i = 0; i < 3; ++i)
            fit.std_errors[static_cast<std::size_t>(i)] = std::sqrt(fit.covariance(i, i) / n);
    }
    return fit;
}

MeanFit cml_fit(const CountSeries& series, int r, int regime_order,
                const std::optional<MeanFit>& init, const CmlOptions& options) {
    const std::vector<Transition> transitions = transitions_of(series);
    return cml_fit(transitions, r, regime_order, init, options);
}

CmlCovariance cml_covariance(std::span<const Transition> transitions, int r, int regime_order,
                             const MeanFit& fit) {
    const PairTable table(transitions);
    const double n = static_cast<double>(transitions.size());
    if (n < 1.0) throw InputError("no transitions");

    const Transformed z = to_unconstrained(fit.phi1_hat, fit.phi2_hat, fit.lambda_hat);
    const std::vector<double> steps = derivative_steps(z.z, 1e-5);

    // Score outer products, pair by pair.
    Eigen::Matrix3d info = Eigen::Matrix3d::Zero();
    for (std::size_t k = 0; k < table.pairs.size(); ++k) {
        const Transition& pair = table.pairs[k];
        Eigen::Vector3d score;
        for (int d = 0; d < 3; ++d) {
            std::array<double, 3> zp = z.z, zm = z.z;
            zp[static_cast<std::size_t>(d)] += steps[static_cast<std::size_t>(d)];
            zm[static_cast<std::size_t>(d)] -= steps[static_cast<std::size_t>(d)];
            bool flagged = false;
            const auto [p1p, p2p, lmp] = to_natural(zp);
            const auto [p1m, p2m, lmm] = to_natural(zm);
            const double up = floored_log_probability(
                spec_of(p1p, p2p, lmp, r, regime_order), pair, flagged);
            const double down = floored_log_probability(
                spec_of(p1m, p2m, lmm, r, regime_order), pair, flagged);
            score(d) = (up - down) / (2.0 * steps[static_cast<std::size_t>(d)]);
        }
        info += table.counts[k] * score * score.transpose();
    }
    info /= n;

    const ObjectiveFn mean_loglik = [&](std::span<const double> zz) {
        const auto [phi1, phi2, lambda] = to_natural(zz);
        return pair_loglik(table, spec_of(phi1, phi2, lambda, r, regime_order)) / n;
    };
    const std::vector<double> hess_flat = central_hessian(mean_loglik, z.z, steps);
    Eigen::Matrix3d hess;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            hess(i, j) = hess_flat[static_cast<std::size_t>(i) * 3 + static_cast<std::size_t>(j)];
    hess = 0.5 * (hess + hess.transpose()).eval();

    CmlCovariance out;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(hess);
    out.hessian_negative_definite = (solver.eigenvalues().array() < 0.0).all();
    const Eigen::Matrix3d hess_inv =
        out.hessian_negative_definite ? Eigen::Matrix3d(hess.inverse()) : pseudo_inverse(hess);

    // Delta method back to the natural scale; at an interior optimum the
    // transformed-scale Hessian maps through the Jacobian alone.
    Eigen::Vector3d jac(fit.phi1_hat * (1.0 - fit.phi1_hat),
                        fit.phi2_hat * (1.0 - fit.phi2_hat), fit.lambda_hat);
    const Eigen::Matrix3d d = jac.asDiagonal();

    Eigen::Matrix3d sandwich_z = hess_inv * info * hess_inv;
    Eigen::Matrix3d sandwich = d * sandwich_z * d;
    out.sandwich = 0.5 * (sandwich + sandwich.transpose()).eval();

    Eigen::Matrix3d observed_z =
        out.hessian_negative_definite ? Eigen::Matrix3d((-hess).inverse())
                                      : pseudo_inverse(-hess);
    Eigen::Matrix3d observed = d * observed_z * d;
    out.observed_information = 0.5 * (observed + observed.transpose()).eval();
    return out;
}

CmlCovariance cml_covariance(const CountSeries& series, int r, int regime_order,
                             const MeanFit& fit) {
    const std::vector<Transition> transitions = transitions_of(series);
    return cml_covariance(transitions, r, regime_order, fit);
}

}  // namespace mtinar
