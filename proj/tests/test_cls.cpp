#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "mtinar/cls.hpp"
#include "mtinar/errors.hpp"
#include "mtinar/optimize.hpp"
#include "oracles.hpp"

using namespace mtinar;

namespace {

const ModelSpec kA1{0.4, 0.2, 3.0, 4, 0};

double q_score(std::span<const Transition> transitions, int r, int regime_order, double phi1,
               double phi2, double lambda) {
    double total = 0.0;
    for (const Transition& tr : transitions) {
        const double u = mean_residual(tr, r, regime_order, phi1, phi2, lambda);
        total += u * u;
    }
    return total;
}

// Independent route to the least-squares optimum: direct numerical
// minimization of the squared-deviation score, no closed forms involved.
std::array<double, 3> minimize_q_directly(std::span<const Transition> transitions, int r,
                                          int regime_order) {
    const ObjectiveFn objective = [&](std::span<const double> x) {
        return q_score(transitions, r, regime_order, x[0], x[1], x[2]);
    };
    NelderMeadOptions options;
    options.param_tol = 1e-11;
    options.value_tol = 1e-13;
    options.max_evaluations = 50000;
    NelderMeadResult best{{}, std::numeric_limits<double>::infinity(), 0, false};
    for (const std::array<double, 3> start :
         {std::array<double, 3>{0.3, 0.3, 2.0}, std::array<double, 3>{0.6, 0.1, 4.0}}) {
        NelderMeadResult run = nelder_mead(objective, start, options);
        if (run.value < best.value) best = std::move(run);
    }
    return {best.x[0], best.x[1], best.x[2]};
}

}  // namespace

TEST_CASE("closed form agrees with direct numerical minimization") {
    for (std::uint64_t seed : {11u, 12u, 13u}) {
        RngStream rng(seed);
        const CountSeries series = simulate(kA1, 200, 4, 500, rng);
        const auto transitions = transitions_of(series);
        const MeanFit fit = cls_fit(transitions, kA1.r, kA1.regime_order);
        const auto direct = minimize_q_directly(transitions, kA1.r, kA1.regime_order);
        CHECK(std::abs(fit.phi1_hat - direct[0]) < 1e-6);
        CHECK(std::abs(fit.phi2_hat - direct[1]) < 1e-6);
        CHECK(std::abs(fit.lambda_hat - direct[2]) < 1e-6);
    }
}

TEST_CASE("first-order conditions vanish at the estimate") {
    RngStream rng(21);
    const CountSeries series = simulate(kA1, 800, 4, 500, rng);
    const auto transitions = transitions_of(series);
    const MeanFit fit = cls_fit(transitions, kA1.r, kA1.regime_order);

    ModelSpec probe;
    probe.r = kA1.r;
    double g1 = 0.0, g2 = 0.0, g3 = 0.0;
    for (const Transition& tr : transitions) {
        const double u =
            mean_residual(tr, kA1.r, kA1.regime_order, fit.phi1_hat, fit.phi2_hat, fit.lambda_hat);
        if (indicator_one(probe, tr.prev))
            g1 += u * tr.prev;
        else
            g2 += u * tr.prev;
        g3 += u;
    }
    const double n = static_cast<double>(transitions.size());
    CHECK(std::abs(g1) < 1e-8 * n);
    CHECK(std::abs(g2) < 1e-8 * n);
    CHECK(std::abs(g3) < 1e-8 * n);
}

TEST_CASE("one-regime series cannot be fit") {
    CountSeries constant;
    constant.values.assign(50, 3);  // never exceeds the threshold
    CHECK_THROWS_AS(cls_fit(constant, 4, 0), NumericError);
}

TEST_CASE("fit depends only on the regime-wise transition multiset") {
    RngStream rng(22);
    const CountSeries series = simulate(kA1, 300, 4, 500, rng);
    auto transitions = transitions_of(series);
    const MeanFit before = cls_fit(transitions, kA1.r, kA1.regime_order);
    std::shuffle(transitions.begin(), transitions.end(), std::mt19937(7));
    const MeanFit after = cls_fit(transitions, kA1.r, kA1.regime_order);
    CHECK(before.phi1_hat == after.phi1_hat);
    CHECK(before.phi2_hat == after.phi2_hat);
    CHECK(before.lambda_hat == after.lambda_hat);
}

TEST_CASE("information matrix carries the exact structural zeros and ones") {
    RngStream rng(23);
    const CountSeries series = simulate(kA1, 400, 4, 500, rng);
    const auto transitions = transitions_of(series);
    const MeanFit fit = cls_fit(transitions, kA1.r, kA1.regime_order);
    const ClsInformation info =
        cls_information(transitions, kA1.r, kA1.regime_order, fit);
    CHECK(info.v(2, 2) == 1.0);      // unit gradient of the intercept
    CHECK(info.v(0, 1) == 0.0);      // regimes never overlap
    CHECK(info.v(1, 0) == 0.0);
    CHECK(info.w(0, 1) == 0.0);
}

TEST_CASE("fit bookkeeping and covariance shape") {
    RngStream rng(24);
    const CountSeries series = simulate(kA1, 500, 4, 500, rng);
    const MeanFit fit = cls_fit(series, kA1.r, kA1.regime_order);
    CHECK(fit.n_lower + fit.n_upper == fit.n_transitions);
    CHECK(fit.n_transitions == 499);
    for (int i = 0; i < 3; ++i) {
        CHECK(fit.covariance(i, i) >= 0.0);
        CHECK(fit.std_errors[static_cast<std::size_t>(i)] ==
              doctest::Approx(std::sqrt(fit.covariance(i, i) / 499.0)));
        for (int j = 0; j < 3; ++j) CHECK(fit.covariance(i, j) == fit.covariance(j, i));
    }
    CHECK(fit.valid_parameters);
}

TEST_CASE("out-of-range estimates are reported raw with the validity flag down") {
    // Regime two pairs high lagged values with zero outcomes, forcing a
    // negative slope estimate.
    std::vector<Transition> transitions = {{0, 5}, {1, 4}, {2, 6}, {3, 5},
                                           {10, 0}, {12, 0}, {14, 0}, {16, 0}};
    const MeanFit fit = cls_fit(transitions, 4, 0);
    CHECK(fit.phi2_hat < 0.0);
    CHECK_FALSE(fit.valid_parameters);
}

TEST_CASE("reported standard errors calibrate against the sampling spread") {
    const int reps = 2000;
    const int n = 2000;
    std::vector<double> phi1(reps), se(reps);
#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k < reps; ++k) {
        RngStream rng(derive_seed(909, 0, 0, static_cast<std::uint64_t>(k)));
        const CountSeries series = simulate(kA1, n, 4, 500, rng);
        const MeanFit fit = cls_fit(series, kA1.r, kA1.regime_order);
        phi1[static_cast<std::size_t>(k)] = fit.phi1_hat;
        se[static_cast<std::size_t>(k)] = fit.std_errors[0];
    }
    const auto moments = oracle::sample_moments(std::span<const double>(phi1));
    const double sampling_sd = std::sqrt(moments.variance);
    std::nth_element(se.begin(), se.begin() + reps / 2, se.end());
    const double median_se = se[static_cast<std::size_t>(reps / 2)];
    CHECK(std::abs(median_se - sampling_sd) / sampling_sd < 0.15);
}

TEST_CASE("absolute error medians shrink with the sample size") {
    const std::vector<ModelSpec> models = {
        {0.4, 0.2, 3.0, 4, 0}, {0.4, 0.4, 3.0, 4, 0}, {0.3, 0.6, 5.0, 7, 0},
        {0.6, 0.6, 5.0, 12, 0}, {0.4, 0.2, 3.0, 4, 1}, {0.4, 0.4, 3.0, 4, 1},
        {0.3, 0.6, 5.0, 7, 1}, {0.6, 0.6, 5.0, 12, 1}};
    const int reps = 200;
    for (std::size_t mi = 0; mi < models.size(); ++mi) {
        const ModelSpec& spec = models[mi];
        double previous = std::numeric_limits<double>::infinity();
        for (int n : {200, 500, 800}) {
            std::vector<double> err(reps);
#pragma omp parallel for schedule(dynamic)
            for (int k = 0; k < reps; ++k) {
                RngStream rng(derive_seed(5150, mi, static_cast<std::uint64_t>(n),
                                          static_cast<std::uint64_t>(k)));
                const CountSeries series =
                    simulate(spec, n, default_initial_state(spec), 500, rng);
                double value = std::numeric_limits<double>::quiet_NaN();
                try {
                    value = std::abs(cls_fit(series, spec.r, spec.regime_order).phi1_hat -
                                     spec.phi1);
                } catch (const NumericError&) {
                }
                err[static_cast<std::size_t>(k)] = value;
            }
            err.erase(std::remove_if(err.begin(), err.end(),
                                     [](double v) { return std::isnan(v); }),
                      err.end());
            REQUIRE(err.size() > 150);
            std::nth_element(err.begin(), err.begin() + err.size() / 2, err.end());
            const double median = err[err.size() / 2];
            CHECK(median <= previous);
            previous = median;
        }
    }
}
