#include "mtinar/diagnostics.hpp"

#include <cmath>

#include "mtinar/cml.hpp"
#include "mtinar/errors.hpp"

namespace mtinar {

namespace {

void require_interior_fit(const MeanFit& fit) {
    if (!(fit.phi1_hat > 0.0 && fit.phi1_hat < 1.0 && fit.phi2_hat > 0.0 &&
          fit.phi2_hat < 1.0 && fit.lambda_hat > 0.0))
        throw InputError("fitted parameters lie outside the parameter space");
}

ModelSpec fitted_spec(const MeanFit& fit, int r, int regime_order) {
    ModelSpec spec;
    spec.phi1 = fit.phi1_hat;
    spec.phi2 = fit.phi2_hat;
    spec.lambda = fit.lambda_hat;
    spec.r = r;
    spec.regime_order = regime_order;
    return spec;
}

}  // namespace

DiagnosticsReport pearson_residuals(std::span<const Transition> transitions, const MeanFit& fit,
                                    int r, int regime_order) {
    require_interior_fit(fit);
    const ModelSpec spec = fitted_spec(fit, r, regime_order);

    DiagnosticsReport report;
    report.pearson_residuals.reserve(transitions.size());
    double sum = 0.0;
    for (const Transition& tr : transitions) {
        const ConditionalMoments cm = conditional_moments(spec, tr.prev);
        if (!(cm.variance > 0.0))
            throw NumericError("nonpositive fitted conditional variance");
        const double res = (tr.next - cm.mean) / std::sqrt(cm.variance);
        report.pearson_residuals.push_back(res);
        sum += res;
    }
    const double n = static_cast<double>(transitions.size());
    if (n < 2.0) throw InputError("need at least two residuals");
    report.residual_mean = sum / n;
    double ss = 0.0;
    for (double res : report.pearson_residuals) {
        const double d = res - report.residual_mean;
        ss += d * d;
    }
    report.residual_variance = ss / (n - 1.0);
    return report;
}

DiagnosticsReport pearson_residuals(const CountSeries& series, const MeanFit& fit, int r,
                                    int regime_order) {
    const std::vector<Transition> transitions = transitions_of(series);
    return pearson_residuals(std::span<const Transition>(transitions), fit, r, regime_order);
}

DiagnosticsReport fit_scores(std::span<const Transition> transitions, const MeanFit& fit, int r,
                             int regime_order) {
    require_interior_fit(fit);
    DiagnosticsReport report;

    double sse = 0.0;
    for (const Transition& tr : transitions) {
        const double u = mean_residual(tr, r, regime_order, fit.phi1_hat, fit.phi2_hat,
                                       fit.lambda_hat);
        sse += u * u;
    }
    const double m = static_cast<double>(transitions.size());
    if (m < 1.0) throw InputError("no transitions");
    report.rms = std::sqrt(sse / m);

    report.loglik = conditional_log_likelihood(transitions, fit.phi1_hat, fit.phi2_hat,
                                               fit.lambda_hat, r, regime_order)
                        .loglik;
    constexpr double k = 3.0;  // mean-regression parameters
    report.aic = -2.0 * report.loglik + 2.0 * k;
    report.bic = -2.0 * report.loglik + k * std::log(m);
    return report;
}

DiagnosticsReport fit_scores(const CountSeries& series, const MeanFit& fit, int r,
                             int regime_order) {
    const std::vector<Transition> transitions = transitions_of(series);
    return fit_scores(std::span<const Transition>(transitions), fit, r, regime_order);
}

DiagnosticsReport full_diagnostics(const CountSeries& series, const MeanFit& fit, int r,
                                   int regime_order) {
    const std::vector<Transition> transitions = transitions_of(series);
    DiagnosticsReport report =
        pearson_residuals(std::span<const Transition>(transitions), fit, r, regime_order);
    const DiagnosticsReport scores =
        fit_scores(std::span<const Transition>(transitions), fit, r, regime_order);
    report.rms = scores.rms;
    report.aic = scores.aic;
    report.bic = scores.bic;
    report.loglik = scores.loglik;
    return report;
}

}  // namespace mtinar
