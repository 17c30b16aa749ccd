#pragma once

#include <span>
#include <vector>

#include "mtinar/rng.hpp"

namespace mtinar {

/// Which thinning-operator / innovation pair drives a step of the recursion.
enum class RegimeKind {
    BinomialPoisson,       // binomial thinning + Poisson innovation
    NegBinomialGeometric,  // negative-binomial thinning + geometric innovation
};

/// Full parameterization of the two-regime mixed-thinning process.
///
/// regime_order selects which operator pair is active below the threshold:
/// with regime_order = 0 the binomial/Poisson pair applies when the lagged
/// value is <= r, with regime_order = 1 the pairs swap. Ties (x_prev == r)
/// always belong to the "<= r" side.
struct ModelSpec {
    double phi1 = 0.5;    // binomial-thinning survival probability, in (0,1)
    double phi2 = 0.5;    // negative-binomial-thinning mean parameter, in (0,1)
    double lambda = 1.0;  // innovation mean, > 0
    int r = 0;            // threshold, >= 0
    int regime_order = 0; // flag in {0,1}

    void validate() const;  // throws InputError on a violated constraint
};

/// Ordered sequence of nonnegative integer observations.
struct CountSeries {
    std::vector<int> values;

    std::size_t size() const noexcept { return values.size(); }
    void validate() const;  // throws InputError if any value is negative
};

/// One observed step (x_{t-1}, x_t).
struct Transition {
    int prev = 0;
    int next = 0;
};

/// Consecutive pairs of a series; the first observation serves as the
/// origin, so a series of length n yields n-1 transitions.
std::vector<Transition> transitions_of(const CountSeries& series);

/// Transition pairs when the pre-sample origin x0 is known; yields n pairs.
std::vector<Transition> transitions_with_origin(int x0, const CountSeries& series);

/// Operator pair applied when the previous value is x_prev.
RegimeKind regime_of(const ModelSpec& spec, int x_prev);

/// True when x_prev activates the first indicator (the phi1 branch).
inline bool indicator_one(const ModelSpec& spec, int x_prev) {
    return regime_of(spec, x_prev) == RegimeKind::BinomialPoisson;
}

/// Binomial thinning: sum of x Bernoulli(phi) variables. Never exceeds x.
int draw_binomial_thin(int x, double phi, RngStream& rng);

/// Negative-binomial thinning: sum of x geometric variables with mean phi
/// each (pmf phi^k/(1+phi)^(k+1)). May exceed x.
int draw_nb_thin(int x, double phi, RngStream& rng);

/// Innovation draw: Poisson(lambda) in the binomial/Poisson regime,
/// geometric with mean lambda in the negative-binomial/geometric regime.
int draw_innovation(RegimeKind kind, double lambda, RngStream& rng);

/// One step of the recursion from x_prev.
int step(const ModelSpec& spec, int x_prev, RngStream& rng);

inline constexpr int kDefaultBurnIn = 500;

/// round(lambda / (1 - max(phi1, phi2))); couples quickly to stationarity.
int default_initial_state(const ModelSpec& spec);

/// Runs burn_in + n steps from x0 and keeps the last n values.
CountSeries simulate(const ModelSpec& spec, int n, int x0, int burn_in, RngStream& rng);

struct ConditionalMoments {
    double mean = 0.0;
    double variance = 0.0;
};

/// Exact one-step conditional mean and variance given the previous value.
ConditionalMoments conditional_moments(const ModelSpec& spec, int x_prev);

}  // namespace mtinar
