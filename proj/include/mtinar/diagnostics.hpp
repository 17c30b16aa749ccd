#pragma once

#include <span>
#include <vector>

#include "mtinar/cls.hpp"

namespace mtinar {

/// Residual and goodness-of-fit summary for a fitted model. The residual
/// part and the score part are filled by separate calls; full_diagnostics
/// combines them.
struct DiagnosticsReport {
    std::vector<double> pearson_residuals;
    double residual_mean = std::numeric_limits<double>::quiet_NaN();
    double residual_variance = std::numeric_limits<double>::quiet_NaN();
    double rms = std::numeric_limits<double>::quiet_NaN();
    double aic = std::numeric_limits<double>::quiet_NaN();
    double bic = std::numeric_limits<double>::quiet_NaN();
    double loglik = std::numeric_limits<double>::quiet_NaN();
};

/// Standardized residuals (x_t - mean_t) / sqrt(var_t) at the fitted
/// parameters, with their sample mean and variance. One residual per
/// transition. The fit must be inside the parameter space.
DiagnosticsReport pearson_residuals(const CountSeries& series, const MeanFit& fit, int r,
                                    int regime_order);
DiagnosticsReport pearson_residuals(std::span<const Transition> transitions, const MeanFit& fit,
                                    int r, int regime_order);

/// Root-mean-square prediction error plus likelihood-based information
/// criteria (3 parameters; sample size = number of transitions).
DiagnosticsReport fit_scores(const CountSeries& series, const MeanFit& fit, int r,
                             int regime_order);
DiagnosticsReport fit_scores(std::span<const Transition> transitions, const MeanFit& fit, int r,
                             int regime_order);

DiagnosticsReport full_diagnostics(const CountSeries& series, const MeanFit& fit, int r,
                                   int regime_order);

}  // namespace mtinar
