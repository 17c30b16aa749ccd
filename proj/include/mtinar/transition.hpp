#pragma once

#include <vector>

#include "mtinar/matrix.hpp"
#include "mtinar/model.hpp"

namespace mtinar {

/// log P(X_t = j | X_{t-1} = i). Convolution sums evaluated in log space
/// via log-gamma; stable for counts in the hundreds.
double transition_log_probability(const ModelSpec& spec, int i, int j);

/// P(X_t = j | X_{t-1} = i), clamped to [0,1] after exponentiation.
double transition_probability(const ModelSpec& spec, int i, int j);

/// Smallest J such that the row-i mass up to J is >= 1 - mass_tol.
int row_truncation_point(const ModelSpec& spec, int i, double mass_tol = 1e-12);

/// Smallest state bound covering every row i <= observed_max at mass_tol,
/// and never below observed_max itself.
int default_max_state(const ModelSpec& spec, int observed_max, double mass_tol = 1e-12);

/// Hard default used in simulation-only contexts:
/// ceil(8 * max(lambda,1) / (1 - max(phi1, phi2))).
int simulation_max_state(const ModelSpec& spec);

/// State bound at which *every* truncated row (not just low ones) retains
/// mass >= 1 - tol, as required by the stationary solver.
int stationary_max_state(const ModelSpec& spec, double tol = 1e-12);

struct TransitionMatrixResult {
    DenseMatrix matrix;               // row-stochastic after renormalization
    std::vector<double> row_deficit;  // pre-normalization mass outside [0, max_state]
};

/// Truncated transition matrix on states {0..max_state}. Rows are built in
/// parallel; throws TruncationError if any row deficit exceeds 1e-6.
TransitionMatrixResult transition_matrix(const ModelSpec& spec, int max_state);

namespace serial {
TransitionMatrixResult transition_matrix(const ModelSpec& spec, int max_state);
}

/// Stationary law of the truncated, renormalized chain by power iteration
/// (stops when the successive L1 change drops below tol). Requires every
/// row deficit <= tol; otherwise throws TruncationError asking for a
/// larger max_state.
std::vector<double> stationary_distribution(const ModelSpec& spec, int max_state,
                                            double tol = 1e-12);

struct TheoreticalMoments {
    double mean = 0.0;
    double variance = 0.0;
    double q = 0.0;         // stationary probability of the indicator-one regime
    double mu1 = 0.0;       // regime-conditional means of the stationary law
    double mu2 = 0.0;
    double sigma1_sq = 0.0; // regime-conditional variances
    double sigma2_sq = 0.0;
    std::vector<double> acf;  // acf[h-1] = autocorrelation at lag h
};

/// Stationary mean/variance and autocorrelations from the truncated chain.
TheoreticalMoments theoretical_moments(const ModelSpec& spec, int max_state, int max_lag = 10);

}  // namespace mtinar
