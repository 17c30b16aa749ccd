#include "mtinar/forecast.hpp"

#include <algorithm>
#include <cmath>

#include "mtinar/errors.hpp"

namespace mtinar {

ForecastPMF h_step_distribution(const ModelSpec& spec, int x_now, int h, int max_state) {
    if (h < 1) throw InputError("forecast horizon must be >= 1");
    if (x_now < 0 || x_now > max_state)
        throw InputError("forecast origin must lie within [0, max_state]");

    const TransitionMatrixResult one_step = transition_matrix(spec, max_state);
    const DenseMatrix power = mat_power(one_step.matrix, static_cast<unsigned>(h));

    ForecastPMF pmf;
    pmf.horizon = h;
    pmf.origin = x_now;
    const auto row = power.row(static_cast<std::size_t>(x_now));
    pmf.probabilities.assign(row.begin(), row.end());

    double sum = 0.0;
    for (double p : pmf.probabilities) sum += p;
    for (double& p : pmf.probabilities) p /= sum;

    double max_deficit = 0.0;
    for (double d : one_step.row_deficit) max_deficit = std::max(max_deficit, d);
    // Escape probability over h steps, union-bounded by the per-row deficit.
    pmf.truncation_mass = 1.0 - std::pow(1.0 - max_deficit, h);
    pmf.truncation_warning = pmf.truncation_mass >= 1e-8;
    return pmf;
}

PointForecasts point_forecasts(const ForecastPMF& pmf) {
    if (pmf.probabilities.empty()) throw InputError("empty forecast distribution");
    PointForecasts out;
    double best = -1.0;
    double cdf = 0.0;
    bool median_found = false;
    for (std::size_t j = 0; j < pmf.probabilities.size(); ++j) {
        const double p = pmf.probabilities[j];
        out.mean += p * static_cast<double>(j);
        if (p > best) {
            best = p;
            out.mode = static_cast<int>(j);
        }
        cdf += p;
        if (!median_found && cdf >= 0.5) {
            out.median = static_cast<int>(j);
            median_found = true;
        }
    }
    return out;
}

ForecastErrorMetrics forecast_error_metrics(const CountSeries& actuals,
                                            std::span<const double> forecasts) {
    actuals.validate();
    if (actuals.size() != forecasts.size())
        throw InputError("forecasts and actuals must have equal length");
    if (actuals.size() < 1) throw InputError("need at least one forecast/actual pair");

    ForecastErrorMetrics out;
    for (std::size_t t = 0; t < forecasts.size(); ++t) {
        const double err = forecasts[t] - static_cast<double>(actuals.values[t]);
        out.bias += err;
        out.made += std::abs(err);
    }
    const double n = static_cast<double>(forecasts.size());
    out.bias /= n;
    out.made /= n;
    return out;
}

}  // namespace mtinar
