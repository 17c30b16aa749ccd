#pragma once

#include <map>
#include <utility>
#include <vector>

#include "mtinar/cml.hpp"

namespace mtinar {

enum class ThresholdMethod { CMLGrid, VarianceCLS, DNess };

/// Outcome of a threshold search. per_candidate records the score of every
/// candidate that was not skipped; r_hat attains its optimum (maximum
/// log-likelihood or gain, minimum score function), ties broken toward the
/// smallest candidate.
struct ThresholdSearchResult {
    int r_hat = 0;
    std::map<int, double> per_candidate;
    std::vector<int> skipped;  // candidates without enough data in a regime
    MeanFit fit_at_r_hat;
    ThresholdMethod method = ThresholdMethod::CMLGrid;
    double dness_lambda = std::numeric_limits<double>::quiet_NaN();
};

/// Empirical quantiles at lo_q and hi_q (type-1: smallest value whose CDF
/// reaches the level). Needs at least 10 observations.
std::pair<int, int> candidate_range(const CountSeries& series, double lo_q, double hi_q);

/// Grid search maximizing the conditional log-likelihood over candidates.
ThresholdSearchResult search_r_cml(const CountSeries& series, int regime_order,
                                   std::pair<int, int> range, const CmlOptions& options = {});

/// Two-step search on the conditional-variance score: minimize the squared
/// deviation of squared residuals from the regime variance law jointly over
/// the parameters for each candidate, then refit the mean by least squares
/// at the winning threshold.
ThresholdSearchResult search_r_cls_var(const CountSeries& series, int regime_order,
                                       std::pair<int, int> range);

/// Doubly nested subsample search: profiles the innovation mean over an
/// (L+1)-point grid on [lambda_lo, lambda_hi], picks the candidate with the
/// largest one-regime-to-two-regime gain in the fixed-mean sum of squares.
ThresholdSearchResult dness_search(const CountSeries& series, int regime_order, double lambda_lo,
                                   double lambda_hi, int grid_points, std::pair<int, int> range);

}  // namespace mtinar
