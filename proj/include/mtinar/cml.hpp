#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>

#include "mtinar/cls.hpp"
#include "mtinar/errors.hpp"
#include "mtinar/model.hpp"

namespace mtinar {

struct LikelihoodEval {
    double loglik = 0.0;
    std::vector<double> per_observation;  // log transition probability per pair, in order
    std::optional<std::array<double, 3>> gradient;  // numerical, w.r.t. (phi1, phi2, lambda)
    bool has_zero_probability = false;    // some term hit the -1e10 floor
};

/// Conditional log-likelihood of the observed transitions at the given
/// parameters. Parameters must lie strictly inside (0,1)^2 x (0,inf).
/// A transition whose probability underflows to zero contributes a -1e10
/// penalty instead of -inf and flags the evaluation. Pass with_gradient to
/// also fill a central-difference score vector.
LikelihoodEval conditional_log_likelihood(const CountSeries& series, double phi1, double phi2,
                                          double lambda, int r, int regime_order,
                                          bool with_gradient = false);
LikelihoodEval conditional_log_likelihood(std::span<const Transition> transitions, double phi1,
                                          double phi2, double lambda, int r, int regime_order,
                                          bool with_gradient = false);

struct CmlOptions {
    int max_evaluations = 10000;
    double param_tol = 1e-8;      // on the transformed (logit/log) scale
    double value_tol = 1e-10;     // on the log-likelihood
    double boundary_guard = 1e-3; // restart when the optimum lands this close to the box edge
    bool with_covariance = true;
};

/// Thrown when the likelihood ascent hits the evaluation cap; carries the
/// best iterate found so far.
class ConvergenceError : public NumericError {
public:
    ConvergenceError(const std::string& message, MeanFit best)
        : NumericError(message), best_fit(std::move(best)) {}
    MeanFit best_fit;
};

/// Conditional maximum likelihood at a known threshold. Optimizes on the
/// unconstrained (logit phi1, logit phi2, log lambda) scale, initialized
/// from the least-squares fit unless an explicit init is supplied, with
/// jittered restarts when a run ends near the box boundary.
MeanFit cml_fit(const CountSeries& series, int r, int regime_order,
                const std::optional<MeanFit>& init = {}, const CmlOptions& options = {});
MeanFit cml_fit(std::span<const Transition> transitions, int r, int regime_order,
                const std::optional<MeanFit>& init = {}, const CmlOptions& options = {});

struct CmlCovariance {
    Eigen::Matrix3d sandwich = Eigen::Matrix3d::Zero();              // J^-1 I J^-1
    Eigen::Matrix3d observed_information = Eigen::Matrix3d::Zero();  // (-J)^-1
    bool hessian_negative_definite = true;
};

/// Numerical sandwich and observed-information covariances (sqrt(n)-scaled;
/// divide by the transition count for squared standard errors). Scores and
/// the Hessian are central differences on the transformed scale, mapped
/// back through the Jacobian of the transform.
CmlCovariance cml_covariance(std::span<const Transition> transitions, int r, int regime_order,
                             const MeanFit& fit);
CmlCovariance cml_covariance(const CountSeries& series, int r, int regime_order,
                             const MeanFit& fit);

}  // namespace mtinar
