#include "mtinar/model.hpp"

#include <cmath>
#include <string>

#include "mtinar/errors.hpp"

namespace mtinar {

void ModelSpec::validate() const {
    if (!(phi1 > 0.0 && phi1 < 1.0))
        throw InputError("phi1 must lie in (0,1), got " + std::to_string(phi1));
    if (!(phi2 > 0.0 && phi2 < 1.0))
        throw InputError("phi2 must lie in (0,1), got " + std::to_string(phi2));
    if (!(lambda > 0.0))
        throw InputError("lambda must be positive, got " + std::to_string(lambda));
    if (r < 0)
        throw InputError("threshold r must be nonnegative, got " + std::to_string(r));
    if (regime_order != 0 && regime_order != 1)
        throw InputError("regime_order must be 0 or 1, got " + std::to_string(regime_order));
}

void CountSeries::validate() const {
    for (std::size_t t = 0; t < values.size(); ++t) {
        if (values[t] < 0)
            throw InputError("count series contains a negative value at position " +
                             std::to_string(t));
    }
}

std::vector<Transition> transitions_of(const CountSeries& series) {
    series.validate();
    if (series.size() < 2)
        throw InputError("need at least 2 observations to form transitions");
    std::vector<Transition> out;
    out.reserve(series.size() - 1);
    for (std::size_t t = 1; t < series.size(); ++t)
        out.push_back({series.values[t - 1], series.values[t]});
    return out;
}

std::vector<Transition> transitions_with_origin(int x0, const CountSeries& series) {
    series.validate();
    if (x0 < 0) throw InputError("origin x0 must be nonnegative");
    if (series.size() < 1) throw InputError("empty series");
    std::vector<Transition> out;
    out.reserve(series.size());
    out.push_back({x0, series.values[0]});
    for (std::size_t t = 1; t < series.size(); ++t)
        out.push_back({series.values[t - 1], series.values[t]});
    return out;
}

RegimeKind regime_of(const ModelSpec& spec, int x_prev) {
    const bool low = x_prev <= spec.r;
    return low == (spec.regime_order == 0) ? RegimeKind::BinomialPoisson
                                           : RegimeKind::NegBinomialGeometric;
}

int draw_binomial_thin(int x, double phi, RngStream& rng) {
    if (!(phi > 0.0 && phi < 1.0))
        throw InputError("thinning parameter must lie in (0,1)");
    if (x < 0) throw InputError("thinned count must be nonnegative");
    int survivors = 0;
    for (int i = 0; i < x; ++i)
        survivors += rng.next_uniform() < phi ? 1 : 0;
    return survivors;
}

int draw_nb_thin(int x, double phi, RngStream& rng) {
    if (!(phi > 0.0 && phi < 1.0))
        throw InputError("thinning parameter must lie in (0,1)");
    if (x < 0) throw InputError("thinned count must be nonnegative");
    int total = 0;
    for (int i = 0; i < x; ++i)
        total += sample_geometric_mean(phi, rng);
    return total;
}

int draw_innovation(RegimeKind kind, double lambda, RngStream& rng) {
    if (!(lambda > 0.0)) throw InputError("innovation mean must be positive");
    return kind == RegimeKind::BinomialPoisson ? sample_poisson(lambda, rng)
                                               : sample_geometric_mean(lambda, rng);
}

int step(const ModelSpec& spec, int x_prev, RngStream& rng) {
    const RegimeKind kind = regime_of(spec, x_prev);
    const int thinned = kind == RegimeKind::BinomialPoisson
                            ? draw_binomial_thin(x_prev, spec.phi1, rng)
                            : draw_nb_thin(x_prev, spec.phi2, rng);
    return thinned + draw_innovation(kind, spec.lambda, rng);
}

int default_initial_state(const ModelSpec& spec) {
    const double phi_max = std::max(spec.phi1, spec.phi2);
    return static_cast<int>(std::lround(spec.lambda / (1.0 - phi_max)));
}

CountSeries simulate(const ModelSpec& spec, int n, int x0, int burn_in, RngStream& rng) {
    spec.validate();
    if (n < 1) throw InputError("simulation length must be >= 1");
    if (burn_in < 0) throw InputError("burn-in must be nonnegative");
    if (x0 < 0) throw InputError("initial state must be nonnegative");

    int x = x0;
    for (int t = 0; t < burn_in; ++t) x = step(spec, x, rng);

    CountSeries series;
    series.values.reserve(static_cast<std::size_t>(n));
    for (int t = 0; t < n; ++t) {
        x = step(spec, x, rng);
        series.values.push_back(x);
    }
    return series;
}

ConditionalMoments conditional_moments(const ModelSpec& spec, int x_prev) {
    if (x_prev < 0) throw InputError("previous value must be nonnegative");
    const double x = static_cast<double>(x_prev);
    if (regime_of(spec, x_prev) == RegimeKind::BinomialPoisson) {
        return {spec.phi1 * x + spec.lambda,
                spec.phi1 * (1.0 - spec.phi1) * x + spec.lambda};
    }
    return {spec.phi2 * x + spec.lambda,
            spec.phi2 * (1.0 + spec.phi2) * x + spec.lambda * (1.0 + spec.lambda)};
}

}  // namespace mtinar
