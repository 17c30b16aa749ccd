#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mtinar/cml.hpp"
#include "mtinar/diagnostics.hpp"
#include "mtinar/errors.hpp"
#include "mtinar/forecast.hpp"
#include "oracles.hpp"

using namespace mtinar;

namespace {
const ModelSpec kA1{0.4, 0.2, 3.0, 4, 0};
}

TEST_CASE("one-step forecast reproduces the transition row exactly") {
    const int m = stationary_max_state(kA1, 1e-12);
    const TransitionMatrixResult tm = transition_matrix(kA1, m);
    const ForecastPMF pmf = h_step_distribution(kA1, 6, 1, m);
    for (std::size_t j = 0; j < pmf.probabilities.size(); ++j)
        CHECK(pmf.probabilities[j] == doctest::Approx(tm.matrix(6, j)).epsilon(1e-14));
    CHECK_FALSE(pmf.truncation_warning);
}

TEST_CASE("one-step forecast mean equals the conditional mean") {
    const int m = stationary_max_state(kA1, 1e-12);
    for (int x : {0, 2, 4, 5, 9, 15}) {
        const ForecastPMF pmf = h_step_distribution(kA1, x, 1, m);
        const PointForecasts points = point_forecasts(pmf);
        CHECK(std::abs(points.mean - conditional_moments(kA1, x).mean) < 1e-8);
    }
}

TEST_CASE("long-horizon forecasts converge to the stationary law") {
    const int m = stationary_max_state(kA1, 1e-12);
    const std::vector<double> pi = stationary_distribution(kA1, m, 1e-12);
    const ForecastPMF pmf = h_step_distribution(kA1, 3, 200, m);
    double l1 = 0.0;
    for (std::size_t j = 0; j < pi.size(); ++j) l1 += std::abs(pmf.probabilities[j] - pi[j]);
    CHECK(l1 < 1e-6);
}

TEST_CASE("matrix powers stay row-stochastic out to horizon 1000") {
    const int m = stationary_max_state(kA1, 1e-12);
    const TransitionMatrixResult tm = transition_matrix(kA1, m);
    const DenseMatrix p1000 = mat_power(tm.matrix, 1000);
    for (std::size_t i = 0; i < p1000.rows(); ++i) {
        double sum = 0.0;
        for (double v : p1000.row(i)) sum += v;
        CHECK(std::abs(sum - 1.0) < 1e-10);
    }
}

TEST_CASE("point forecasts: degenerate and uniform cases") {
    ForecastPMF point_mass;
    point_mass.probabilities.assign(10, 0.0);
    point_mass.probabilities[7] = 1.0;
    const PointForecasts a = point_forecasts(point_mass);
    CHECK(a.mean == doctest::Approx(7.0));
    CHECK(a.mode == 7);
    CHECK(a.median == 7);

    ForecastPMF uniform;
    uniform.probabilities.assign(4, 0.25);
    const PointForecasts b = point_forecasts(uniform);
    CHECK(b.mean == doctest::Approx(1.5));
    CHECK(b.mode == 0);    // smallest maximizer on ties
    CHECK(b.median == 1);  // smallest state with CDF >= 1/2
}

TEST_CASE("forecast machinery surfaces truncation problems") {
    CHECK_THROWS_AS(h_step_distribution(kA1, 3, 5, 6), TruncationError);
    CHECK_THROWS_AS(h_step_distribution(kA1, 90, 5, 40), InputError);
    CHECK_THROWS_AS(h_step_distribution(kA1, 3, 0, 40), InputError);
    CHECK_THROWS_AS(point_forecasts(ForecastPMF{}), InputError);
}

TEST_CASE("well-specified residuals have mean zero and unit variance") {
    RngStream rng(61);
    const CountSeries series = simulate(kA1, 2000, 4, 500, rng);
    MeanFit truth;
    truth.phi1_hat = kA1.phi1;
    truth.phi2_hat = kA1.phi2;
    truth.lambda_hat = kA1.lambda;
    const DiagnosticsReport report = pearson_residuals(series, truth, kA1.r, kA1.regime_order);
    CHECK(report.pearson_residuals.size() == series.size() - 1);
    CHECK(report.residual_mean > -0.05);
    CHECK(report.residual_mean < 0.05);
    CHECK(report.residual_variance > 0.9);
    CHECK(report.residual_variance < 1.1);
}

TEST_CASE("residuals reject out-of-space parameter values") {
    CountSeries series{{1, 2, 3, 2, 1, 2}};
    MeanFit bad;
    bad.phi1_hat = -0.2;
    bad.phi2_hat = 0.5;
    bad.lambda_hat = 1.0;
    CHECK_THROWS_AS(pearson_residuals(series, bad, 2, 0), InputError);
}

TEST_CASE("fit scores: definitional identities") {
    RngStream rng(62);
    const CountSeries series = simulate(kA1, 144, 4, 500, rng);
    const MeanFit fit = cml_fit(series, kA1.r, kA1.regime_order);
    const DiagnosticsReport report = fit_scores(series, fit, kA1.r, kA1.regime_order);

    const double m = static_cast<double>(series.size() - 1);
    CHECK(report.aic - report.bic == doctest::Approx(2.0 * 3 - 3.0 * std::log(m)).epsilon(1e-12));
    CHECK(report.aic == doctest::Approx(-2.0 * report.loglik + 6.0).epsilon(1e-12));

    // Direct recomputation of the root mean square.
    const auto transitions = transitions_of(series);
    double sse = 0.0;
    for (const Transition& tr : transitions) {
        const double u = mean_residual(tr, kA1.r, kA1.regime_order, fit.phi1_hat, fit.phi2_hat,
                                       fit.lambda_hat);
        sse += u * u;
    }
    CHECK(std::abs(report.rms - std::sqrt(sse / m)) < 1e-12);

    // Information criteria strictly increase when the likelihood drops.
    const double worse = report.loglik - 5.0;
    CHECK(-2.0 * worse + 6.0 > report.aic);
}

TEST_CASE("forecast error metrics") {
    CountSeries actuals{{3, 5, 7}};
    const std::vector<double> perfect = {3.0, 5.0, 7.0};
    const ForecastErrorMetrics zero = forecast_error_metrics(actuals, perfect);
    CHECK(zero.bias == 0.0);
    CHECK(zero.made == 0.0);

    CountSeries one{{3}};
    const std::vector<double> forecast = {5.0};
    const ForecastErrorMetrics pair = forecast_error_metrics(one, forecast);
    CHECK(pair.bias == doctest::Approx(2.0));
    CHECK(pair.made == doctest::Approx(2.0));

    const std::vector<double> wrong_len = {1.0, 2.0};
    CHECK_THROWS_AS(forecast_error_metrics(one, wrong_len), InputError);
}

TEST_CASE("full diagnostics composes both parts") {
    RngStream rng(63);
    const CountSeries series = simulate(kA1, 300, 4, 500, rng);
    const MeanFit fit = cml_fit(series, kA1.r, kA1.regime_order);
    const DiagnosticsReport report = full_diagnostics(series, fit, kA1.r, kA1.regime_order);
    CHECK(report.pearson_residuals.size() == 299);
    CHECK(std::isfinite(report.rms));
    CHECK(std::isfinite(report.aic));
    CHECK(std::isfinite(report.loglik));
}
