#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <omp.h>

#include <algorithm>
#include <cmath>

#include "mtinar/cml.hpp"
#include "mtinar/optimize.hpp"
#include "mtinar/transition.hpp"
#include "oracles.hpp"

using namespace mtinar;

namespace {

const ModelSpec kA1{0.4, 0.2, 3.0, 4, 0};

// Direct (non-log) recomputation of the likelihood from the convolution
// sums, independent of the log-gamma path.
double direct_loglik(std::span<const Transition> transitions, const ModelSpec& spec) {
    double total = 0.0;
    for (const Transition& tr : transitions) {
        double p = 0.0;
        if (regime_of(spec, tr.prev) == RegimeKind::BinomialPoisson) {
            for (int m = 0; m <= std::min(tr.prev, tr.next); ++m)
                p += oracle::binomial_pmf(tr.prev, spec.phi1, m) *
                     oracle::poisson_pmf(spec.lambda, tr.next - m);
        } else if (tr.prev == 0) {
            p = oracle::geometric_pmf(spec.lambda, tr.next);
        } else {
            for (int m = 0; m <= tr.next; ++m)
                p += oracle::neg_binomial_pmf(tr.prev, 1.0 / (1.0 + spec.phi2), m) *
                     oracle::geometric_pmf(spec.lambda, tr.next - m);
        }
        total += std::log(p);
    }
    return total;
}

}  // namespace

TEST_CASE("a single zero-to-zero step in the geometric regime") {
    CountSeries series{{0, 0}};
    // Regime-order 1 with threshold 0 puts state 0 in the geometric branch.
    const LikelihoodEval eval = conditional_log_likelihood(series, 0.5, 0.5, 3.0, 0, 1);
    CHECK(eval.per_observation.size() == 1);
    CHECK(eval.loglik == doctest::Approx(-std::log(4.0)).epsilon(1e-10));
    CHECK(eval.loglik == doctest::Approx(-1.3862944).epsilon(1e-6));
}

TEST_CASE("per-observation terms exponentiate to transition probabilities") {
    RngStream rng(31);
    const CountSeries series = simulate(kA1, 120, 4, 500, rng);
    const auto transitions = transitions_of(series);
    const LikelihoodEval eval =
        conditional_log_likelihood(series, 0.35, 0.25, 2.7, kA1.r, kA1.regime_order);
    ModelSpec at{0.35, 0.25, 2.7, kA1.r, kA1.regime_order};
    REQUIRE(eval.per_observation.size() == transitions.size());
    for (std::size_t t = 0; t < transitions.size(); ++t) {
        const double p = transition_probability(at, transitions[t].prev, transitions[t].next);
        CHECK(std::abs(std::exp(eval.per_observation[t]) - p) < 1e-12);
    }
}

TEST_CASE("log-space evaluation matches direct arithmetic") {
    RngStream rng(32);
    const CountSeries series = simulate(kA1, 100, 4, 500, rng);
    const auto transitions = transitions_of(series);
    ModelSpec at{0.4, 0.2, 3.0, kA1.r, kA1.regime_order};
    const LikelihoodEval eval =
        conditional_log_likelihood(series, at.phi1, at.phi2, at.lambda, at.r, at.regime_order);
    CHECK(eval.loglik == doctest::Approx(direct_loglik(transitions, at)).epsilon(1e-9));
}

TEST_CASE("domain violations are rejected") {
    CountSeries series{{1, 2, 3, 4, 5, 6}};
    CHECK_THROWS_AS(conditional_log_likelihood(series, 0.0, 0.5, 1.0, 2, 0), InputError);
    CHECK_THROWS_AS(conditional_log_likelihood(series, 0.5, 1.0, 1.0, 2, 0), InputError);
    CHECK_THROWS_AS(conditional_log_likelihood(series, 0.5, 0.5, -1.0, 2, 0), InputError);
}

TEST_CASE("likelihood ascent dominates its initializer and random probes") {
    RngStream rng(33);
    const CountSeries series = simulate(kA1, 150, 4, 500, rng);
    const auto transitions = transitions_of(series);

    const MeanFit cls = cls_fit(transitions, kA1.r, kA1.regime_order);
    const MeanFit cml = cml_fit(transitions, kA1.r, kA1.regime_order);

    const double cls_loglik =
        conditional_log_likelihood(transitions, std::clamp(cls.phi1_hat, 1e-4, 1.0 - 1e-4),
                                   std::clamp(cls.phi2_hat, 1e-4, 1.0 - 1e-4),
                                   std::max(cls.lambda_hat, 1e-4), kA1.r, kA1.regime_order)
            .loglik;
    CHECK(cml.loglik >= cls_loglik - 1e-9);

    RngStream probe(34);
    for (int k = 0; k < 1000; ++k) {
        const double phi1 = 0.01 + 0.98 * probe.next_uniform();
        const double phi2 = 0.01 + 0.98 * probe.next_uniform();
        const double lambda = 0.05 + 8.0 * probe.next_uniform();
        const double value =
            conditional_log_likelihood(transitions, phi1, phi2, lambda, kA1.r,
                                       kA1.regime_order)
                .loglik;
        CHECK(cml.loglik >= value - 1e-9);
    }
}

TEST_CASE("numerical gradient vanishes at the reported optimum") {
    RngStream rng(35);
    const CountSeries series = simulate(kA1, 200, 4, 500, rng);
    const auto transitions = transitions_of(series);
    const MeanFit fit = cml_fit(transitions, kA1.r, kA1.regime_order);

    const ObjectiveFn objective = [&](std::span<const double> z) {
        return conditional_log_likelihood(transitions, inv_logit(z[0]), inv_logit(z[1]),
                                          std::exp(z[2]), kA1.r, kA1.regime_order)
            .loglik;
    };
    const std::array<double, 3> z = {logit(fit.phi1_hat), logit(fit.phi2_hat),
                                     std::log(fit.lambda_hat)};
    const auto steps = derivative_steps(z, 1e-5);
    const auto grad = central_gradient(objective, z, steps);
    const double norm =
        std::sqrt(grad[0] * grad[0] + grad[1] * grad[1] + grad[2] * grad[2]);
    CHECK(norm < 1e-5 * std::max(1.0, std::abs(fit.loglik)));
    CHECK(norm < 1e-2);  // absolute sanity on the total-likelihood scale
}

TEST_CASE("optional score vector matches an independent finite difference") {
    RngStream rng(38);
    const CountSeries series = simulate(kA1, 100, 4, 500, rng);
    const LikelihoodEval eval =
        conditional_log_likelihood(series, 0.35, 0.25, 2.5, kA1.r, kA1.regime_order, true);
    REQUIRE(eval.gradient.has_value());

    const double h = 1e-6;
    auto at = [&](double phi1, double phi2, double lambda) {
        return conditional_log_likelihood(series, phi1, phi2, lambda, kA1.r,
                                          kA1.regime_order)
            .loglik;
    };
    const double g1 = (at(0.35 + h, 0.25, 2.5) - at(0.35 - h, 0.25, 2.5)) / (2 * h);
    const double g3 =
        (at(0.35, 0.25, 2.5 * (1 + 1e-6)) - at(0.35, 0.25, 2.5 * (1 - 1e-6))) / (2 * 2.5e-6);
    CHECK((*eval.gradient)[0] == doctest::Approx(g1).epsilon(1e-4));
    CHECK((*eval.gradient)[2] == doctest::Approx(g3).epsilon(1e-4));

    // At the likelihood optimum the score is near zero.
    const auto transitions = transitions_of(series);
    const MeanFit fit = cml_fit(transitions, kA1.r, kA1.regime_order);
    const LikelihoodEval at_opt =
        conditional_log_likelihood(transitions, fit.phi1_hat, fit.phi2_hat, fit.lambda_hat,
                                   kA1.r, kA1.regime_order, true);
    REQUIRE(at_opt.gradient.has_value());
    for (double g : *at_opt.gradient) CHECK(std::abs(g) < 0.05);
}

TEST_CASE("hitting the evaluation cap raises a convergence error with the best iterate") {
    RngStream rng(39);
    const CountSeries series = simulate(kA1, 150, 4, 500, rng);
    const auto transitions = transitions_of(series);
    CmlOptions options;
    options.max_evaluations = 12;
    try {
        cml_fit(transitions, kA1.r, kA1.regime_order, {}, options);
        FAIL("expected a convergence error");
    } catch (const ConvergenceError& e) {
        CHECK(std::isfinite(e.best_fit.loglik));
        CHECK(e.best_fit.phi1_hat > 0.0);
        CHECK(e.best_fit.phi1_hat < 1.0);
        CHECK(e.best_fit.method == FitMethod::CML);
    }
}

TEST_CASE("covariances are symmetric and carry positive diagonals") {
    RngStream rng(36);
    const CountSeries series = simulate(kA1, 400, 4, 500, rng);
    const auto transitions = transitions_of(series);
    const MeanFit fit = cml_fit(transitions, kA1.r, kA1.regime_order);
    const CmlCovariance cov = cml_covariance(transitions, kA1.r, kA1.regime_order, fit);
    CHECK(cov.hessian_negative_definite);
    for (int i = 0; i < 3; ++i) {
        CHECK(cov.sandwich(i, i) > 0.0);
        CHECK(cov.observed_information(i, i) > 0.0);
        for (int j = 0; j < 3; ++j) {
            CHECK(std::abs(cov.sandwich(i, j) - cov.sandwich(j, i)) < 1e-10);
            CHECK(std::abs(cov.observed_information(i, j) - cov.observed_information(j, i)) <
                  1e-10);
        }
    }
}

TEST_CASE("likelihood is invariant to how the origin convention is applied") {
    RngStream rng(37);
    const CountSeries series = simulate(kA1, 80, 4, 500, rng);
    CountSeries with_origin;
    with_origin.values.push_back(9);
    with_origin.values.insert(with_origin.values.end(), series.values.begin(),
                              series.values.end());

    const auto direct = transitions_with_origin(9, series);
    const auto prepended = transitions_of(with_origin);
    const LikelihoodEval a =
        conditional_log_likelihood(direct, 0.4, 0.2, 3.0, kA1.r, kA1.regime_order);
    const LikelihoodEval b =
        conditional_log_likelihood(prepended, 0.4, 0.2, 3.0, kA1.r, kA1.regime_order);
    CHECK(a.loglik == b.loglik);
}

TEST_CASE("reported standard errors calibrate against the sampling spread") {
    const int reps = 2000;
    std::vector<double> phi1(reps), se(reps);
#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k < reps; ++k) {
        RngStream rng(derive_seed(911, 0, 0, static_cast<std::uint64_t>(k)));
        const CountSeries series = simulate(kA1, 2000, 4, 500, rng);
        const auto transitions = transitions_of(series);
        CmlOptions options;
        options.with_covariance = false;
        const MeanFit fit = cml_fit(transitions, kA1.r, kA1.regime_order, {}, options);
        phi1[static_cast<std::size_t>(k)] = fit.phi1_hat;
        if (k < 200) {
            const CmlCovariance cov =
                cml_covariance(transitions, kA1.r, kA1.regime_order, fit);
            se[static_cast<std::size_t>(k)] = std::sqrt(cov.sandwich(0, 0) / 1999.0);
        }
    }
    const auto moments = oracle::sample_moments(std::span<const double>(phi1));
    const double sampling_sd = std::sqrt(moments.variance);
    std::vector<double> se_head(se.begin(), se.begin() + 200);
    std::nth_element(se_head.begin(), se_head.begin() + 100, se_head.end());
    CHECK(std::abs(se_head[100] - sampling_sd) / sampling_sd < 0.15);
}
