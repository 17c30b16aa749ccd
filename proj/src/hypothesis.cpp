#include "mtinar/hypothesis.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <string>

#include "mtinar/errors.hpp"

namespace mtinar {

namespace {

struct RegimeTag {
    ModelSpec probe;
    explicit RegimeTag(int r, int regime_order) {
        probe.r = r;
        probe.regime_order = regime_order;
    }
    bool one(int x_prev) const { return indicator_one(probe, x_prev); }
};

double safe_quadratic_denominator(double value, const char* what) {
    if (!(value > 0.0)) throw NumericError(std::string("degenerate variance term in ") + what);
    return value;
}

}  // namespace

double chi_square_upper_tail(double statistic, int df) {
    if (df < 1) throw InputError("degrees of freedom must be positive");
    if (statistic <= 0.0) return 1.0;
    return boost::math::gamma_q(0.5 * df, 0.5 * statistic);
}

VarianceFit variance_cls_fit(std::span<const Transition> transitions, int r, int regime_order,
                             const MeanFit& mean_fit) {
    const RegimeTag tag(r, regime_order);
    const double n = static_cast<double>(transitions.size());

    // Per-regime sums of the squared residual regression V ~ x.
    double cnt[2] = {0, 0}, sx[2] = {0, 0}, sxx[2] = {0, 0}, sv[2] = {0, 0}, svx[2] = {0, 0};
    for (const Transition& tr : transitions) {
        const double u = mean_residual(tr, r, regime_order, mean_fit.phi1_hat,
                                       mean_fit.phi2_hat, mean_fit.lambda_hat);
        const double v = u * u;
        const double x = tr.prev;
        const int k = tag.one(tr.prev) ? 0 : 1;
        cnt[k] += 1.0;
        sx[k] += x;
        sxx[k] += x * x;
        sv[k] += v;
        svx[k] += v * x;
    }
    if (cnt[0] < 3.0 || cnt[1] < 3.0)
        throw NumericError("insufficient regime data for the variance regression (need >= 3)");

    VarianceFit fit;
    double slope[2], intercept[2];
    for (int k = 0; k < 2; ++k) {
        const double denom = cnt[k] * sxx[k] - sx[k] * sx[k];
        if (!(denom > 0.0))
            throw NumericError("singular design: lagged value constant within a regime");
        slope[k] = (cnt[k] * svx[k] - sx[k] * sv[k]) / denom;
        intercept[k] = (sxx[k] * sv[k] - sx[k] * svx[k]) / denom;
    }
    fit.sigma1_sq_hat = slope[0];
    fit.sigma2_sq_hat = slope[1];
    fit.b1_hat = intercept[0];
    fit.b2_hat = intercept[1];
    fit.n_lower = static_cast<long>(cnt[0]);
    fit.n_upper = static_cast<long>(cnt[1]);
    fit.n_transitions = static_cast<long>(n);

    const VarianceInformation info =
        variance_cls_information(transitions, r, regime_order, fit, mean_fit);

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eigen(info.v);
    const double smin = eigen.eigenvalues().cwiseAbs().minCoeff();
    const double smax = eigen.eigenvalues().cwiseAbs().maxCoeff();
    if (!(smin > 0.0) || smax / smin > 1e12)
        throw NumericError("variance information matrix numerically singular");

    const Eigen::Matrix4d vinv = info.v.inverse();
    Eigen::Matrix4d sandwich = vinv * info.w * vinv;
    fit.covariance = 0.5 * (sandwich + sandwich.transpose()).eval();
    for (int i = 0; i < 4; ++i)
        fit.std_errors[static_cast<std::size_t>(i)] = std::sqrt(fit.covariance(i, i) / n);
    return fit;
}

VarianceInformation variance_cls_information(std::span<const Transition> transitions, int r,
                                             int regime_order, const VarianceFit& fit,
                                             const MeanFit& mean_fit) {
    const RegimeTag tag(r, regime_order);
    const double n = static_cast<double>(transitions.size());
    if (n < 1.0) throw InputError("no transitions");
    const double slope[2] = {fit.sigma1_sq_hat, fit.sigma2_sq_hat};
    const double intercept[2] = {fit.b1_hat, fit.b2_hat};

    // Parameter order (sigma1^2, sigma2^2, b1, b2); weights are the squared
    // variance-regression residuals D_t.
    VarianceInformation info;
    Eigen::Matrix4d& vt = info.v;
    Eigen::Matrix4d& wt = info.w;
    for (const Transition& tr : transitions) {
        const double u = mean_residual(tr, r, regime_order, mean_fit.phi1_hat,
                                       mean_fit.phi2_hat, mean_fit.lambda_hat);
        const double v = u * u;
        const double x = tr.prev;
        const int k = tag.one(tr.prev) ? 0 : 1;
        const double d = v - slope[k] * x - intercept[k];
        const double d2 = d * d;
        const int si = k;       // slope index: 0 or 1
        const int bi = 2 + k;   // intercept index: 2 or 3
        vt(si, si) += x * x;
        vt(si, bi) += x;
        vt(bi, si) += x;
        vt(bi, bi) += 1.0;
        wt(si, si) += d2 * x * x;
        wt(si, bi) += d2 * x;
        wt(bi, si) += d2 * x;
        wt(bi, bi) += d2;
    }
    vt /= n;
    wt /= n;
    return info;
}

VarianceFit variance_cls_fit(const CountSeries& series, int r, int regime_order,
                             const MeanFit& mean_fit) {
    const std::vector<Transition> transitions = transitions_of(series);
    return variance_cls_fit(transitions, r, regime_order, mean_fit);
}

TestResult wald_mean_test(std::span<const Transition> transitions, int r, int regime_order) {
    const MeanFit fit = cls_fit(transitions, r, regime_order);
    const Eigen::Matrix3d& lam = fit.covariance;
    const double n = static_cast<double>(transitions.size());
    const double gap = fit.phi1_hat - fit.phi2_hat;
    const double denom = safe_quadratic_denominator(
        lam(0, 0) + lam(1, 1) - lam(0, 1) - lam(1, 0), "the mean Wald statistic");

    TestResult result;
    result.statistic = n * gap * gap / denom;
    result.df = 1;
    result.critical_value = kWaldMeanCritical05;
    result.p_value = chi_square_upper_tail(result.statistic, result.df);
    result.reject_at_05 = result.statistic > result.critical_value;
    return result;
}

TestResult wald_mean_test(const CountSeries& series, int r, int regime_order) {
    const std::vector<Transition> transitions = transitions_of(series);
    return wald_mean_test(std::span<const Transition>(transitions), r, regime_order);
}

TestResult wald_variance_test(std::span<const Transition> transitions, int r, int regime_order) {
    const MeanFit mean_fit = cls_fit(transitions, r, regime_order);
    const VarianceFit fit = variance_cls_fit(transitions, r, regime_order, mean_fit);
    const double n = static_cast<double>(transitions.size());

    Eigen::Matrix<double, 2, 4> contrast;
    contrast << 1, -1, 0, 0, 0, 0, 1, -1;
    const Eigen::Matrix2d gap_cov = contrast * fit.covariance * contrast.transpose();
    const Eigen::Vector2d gap(fit.sigma1_sq_hat - fit.sigma2_sq_hat, fit.b1_hat - fit.b2_hat);
    const double det = gap_cov.determinant();
    if (!(det > 0.0))
        throw NumericError("degenerate contrast covariance in the variance Wald statistic");

    TestResult result;
    result.statistic = n * gap.dot(gap_cov.inverse() * gap);
    result.df = 2;
    result.critical_value = kWaldVarianceCritical05;
    result.p_value = chi_square_upper_tail(result.statistic, result.df);
    result.reject_at_05 = result.statistic > result.critical_value;
    return result;
}

TestResult wald_variance_test(const CountSeries& series, int r, int regime_order) {
    const std::vector<Transition> transitions = transitions_of(series);
    return wald_variance_test(std::span<const Transition>(transitions), r, regime_order);
}

TestResult wald_variance_test_additive(std::span<const Transition> transitions, int r,
                                       int regime_order) {
    const MeanFit mean_fit = cls_fit(transitions, r, regime_order);
    const VarianceFit fit = variance_cls_fit(transitions, r, regime_order, mean_fit);
    const Eigen::Matrix4d& sig = fit.covariance;
    const double n = static_cast<double>(transitions.size());

    const double slope_gap = fit.sigma1_sq_hat - fit.sigma2_sq_hat;
    const double slope_denom = safe_quadratic_denominator(
        sig(0, 0) + sig(1, 1) - sig(0, 1) - sig(1, 0), "the variance Wald statistic");
    const double intercept_gap = fit.b1_hat - fit.b2_hat;
    const double intercept_denom = safe_quadratic_denominator(
        sig(2, 2) + sig(3, 3) - sig(2, 3) - sig(3, 2), "the variance Wald statistic");

    TestResult result;
    result.statistic = n * slope_gap * slope_gap / slope_denom +
                       n * intercept_gap * intercept_gap / intercept_denom;
    result.df = 2;
    result.critical_value = kWaldVarianceCritical05;
    result.p_value = chi_square_upper_tail(result.statistic, result.df);
    result.reject_at_05 = result.statistic > result.critical_value;
    return result;
}

TestResult wald_variance_test_additive(const CountSeries& series, int r, int regime_order) {
    const std::vector<Transition> transitions = transitions_of(series);
    return wald_variance_test_additive(std::span<const Transition>(transitions), r,
                                       regime_order);
}

}  // namespace mtinar
