#pragma once

#include <vector>

#include "mtinar/transition.hpp"

namespace mtinar {

/// Truncated conditional law of X_{t+h} given X_t = origin, on support
/// {0..max_state}. Probabilities are renormalized; truncation_mass is an
/// upper bound on the mass lost to truncation over the h steps.
struct ForecastPMF {
    int horizon = 0;
    int origin = 0;
    std::vector<double> probabilities;
    double truncation_mass = 0.0;
    bool truncation_warning = false;  // set when truncation_mass >= 1e-8
};

/// Row `x_now` of the h-th matrix power (repeated squaring).
ForecastPMF h_step_distribution(const ModelSpec& spec, int x_now, int h, int max_state);

struct PointForecasts {
    double mean = 0.0;
    int mode = 0;    // smallest maximizer on ties
    int median = 0;  // smallest state whose CDF reaches 1/2
};

PointForecasts point_forecasts(const ForecastPMF& pmf);

struct ForecastErrorMetrics {
    double bias = 0.0;  // mean(forecast - actual)
    double made = 0.0;  // mean absolute deviation
};

ForecastErrorMetrics forecast_error_metrics(const CountSeries& actuals,
                                            std::span<const double> forecasts);

}  // namespace mtinar
