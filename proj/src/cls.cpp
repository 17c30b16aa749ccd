#include "mtinar/cls.hpp"

#include <string>

#include "mtinar/errors.hpp"

namespace mtinar {

namespace {

struct RegimeSums {
    double n = 0.0;
    double n1 = 0.0, n2 = 0.0;  // indicator counts
    double a1 = 0.0, a2 = 0.0;  // sum of x_{t-1} per indicator
    double c1 = 0.0, c2 = 0.0;  // sum of x_{t-1}^2 per indicator
    double m1 = 0.0, m2 = 0.0;  // sum of x_t x_{t-1} per indicator
    double m3 = 0.0;            // sum of x_t
};

RegimeSums accumulate(std::span<const Transition> transitions, int r, int regime_order) {
    ModelSpec probe;  // only r and regime_order matter for the indicator
    probe.r = r;
    probe.regime_order = regime_order;
    RegimeSums s;
    s.n = static_cast<double>(transitions.size());
    for (const Transition& tr : transitions) {
        if (tr.prev < 0 || tr.next < 0) throw InputError("negative count in transitions");
        const double x = tr.prev;
        const double y = tr.next;
        s.m3 += y;
        if (indicator_one(probe, tr.prev)) {
            s.n1 += 1.0;
            s.a1 += x;
            s.c1 += x * x;
            s.m1 += x * y;
        } else {
            s.n2 += 1.0;
            s.a2 += x;
            s.c2 += x * x;
            s.m2 += x * y;
        }
    }
    return s;
}

void require_threshold(int r, int regime_order) {
    if (r < 0) throw InputError("threshold r must be nonnegative");
    if (regime_order != 0 && regime_order != 1)
        throw InputError("regime_order must be 0 or 1");
}

}  // namespace

double mean_residual(const Transition& tr, int r, int regime_order, double phi1, double phi2,
                     double lambda) {
    ModelSpec probe;
    probe.r = r;
    probe.regime_order = regime_order;
    const double slope = indicator_one(probe, tr.prev) ? phi1 : phi2;
    return tr.next - slope * tr.prev - lambda;
}

MeanFit cls_fit(std::span<const Transition> transitions, int r, int regime_order) {
    require_threshold(r, regime_order);
    const RegimeSums s = accumulate(transitions, r, regime_order);
    if (s.n1 < 2.0 || s.n2 < 2.0) {
        throw NumericError("insufficient regime data: " + std::to_string(long(s.n1)) + " / " +
                           std::to_string(long(s.n2)) + " transitions per regime (need >= 2)");
    }

    const double det = s.n * s.c1 * s.c2 - s.a1 * s.a1 * s.c2 - s.a2 * s.a2 * s.c1;
    if (!(det > 0.0)) throw NumericError("singular design in least squares system");

    MeanFit fit;
    fit.method = FitMethod::CLS;
    fit.phi1_hat =
        ((s.n * s.c2 - s.a2 * s.a2) * s.m1 + s.a1 * (s.a2 * s.m2 - s.c2 * s.m3)) / det;
    fit.phi2_hat =
        ((s.n * s.c1 - s.a1 * s.a1) * s.m2 + s.a2 * (s.a1 * s.m1 - s.c1 * s.m3)) / det;
    fit.lambda_hat =
        (s.c1 * (s.c2 * s.m3 - s.a2 * s.m2) - s.a1 * s.c2 * s.m1) / det;
    fit.n_lower = static_cast<long>(s.n1);
    fit.n_upper = static_cast<long>(s.n2);
    fit.n_transitions = static_cast<long>(s.n);
    fit.valid_parameters = fit.phi1_hat > 0.0 && fit.phi1_hat < 1.0 && fit.phi2_hat > 0.0 &&
                           fit.phi2_hat < 1.0 && fit.lambda_hat > 0.0;
    fit.covariance = cls_covariance(transitions, r, regime_order, fit);
    for (int i = 0; i < 3; ++i)
        fit.std_errors[static_cast<std::size_t>(i)] = std::sqrt(fit.covariance(i, i) / s.n);
    return fit;
}

MeanFit cls_fit(const CountSeries& series, int r, int regime_order) {
    const std::vector<Transition> transitions = transitions_of(series);
    return cls_fit(transitions, r, regime_order);
}

ClsInformation cls_information(std::span<const Transition> transitions, int r, int regime_order,
                               const MeanFit& fit) {
    require_threshold(r, regime_order);
    ModelSpec probe;
    probe.r = r;
    probe.regime_order = regime_order;

    const double n = static_cast<double>(transitions.size());
    if (n < 1.0) throw InputError("no transitions");

    ClsInformation info;
    Eigen::Matrix3d& v = info.v;
    Eigen::Matrix3d& w = info.w;
    for (const Transition& tr : transitions) {
        const double x = tr.prev;
        const double u = mean_residual(tr, r, regime_order, fit.phi1_hat, fit.phi2_hat,
                                       fit.lambda_hat);
        const double u2 = u * u;
        if (indicator_one(probe, tr.prev)) {
            v(0, 0) += x * x;
            v(0, 2) += x;
            w(0, 0) += u2 * x * x;
            w(0, 2) += u2 * x;
        } else {
            v(1, 1) += x * x;
            v(1, 2) += x;
            w(1, 1) += u2 * x * x;
            w(1, 2) += u2 * x;
        }
        w(2, 2) += u2;
    }
    v(2, 0) = v(0, 2);
    v(2, 1) = v(1, 2);
    w(2, 0) = w(0, 2);
    w(2, 1) = w(1, 2);
    v /= n;
    w /= n;
    v(2, 2) = 1.0;
    return info;
}

Eigen::Matrix3d cls_covariance(std::span<const Transition> transitions, int r, int regime_order,
                               const MeanFit& fit) {
    const ClsInformation info = cls_information(transitions, r, regime_order, fit);

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eigen(info.v);
    const double smin = eigen.eigenvalues().cwiseAbs().minCoeff();
    const double smax = eigen.eigenvalues().cwiseAbs().maxCoeff();
    if (!(smin > 0.0) || smax / smin > 1e12)
        throw NumericError("information matrix numerically singular (condition > 1e12)");

    const Eigen::Matrix3d vinv = info.v.inverse();
    Eigen::Matrix3d sandwich = vinv * info.w * vinv;
    sandwich = 0.5 * (sandwich + sandwich.transpose()).eval();
    return sandwich;
}

Eigen::Matrix3d cls_covariance(const CountSeries& series, int r, int regime_order,
                               const MeanFit& fit) {
    const std::vector<Transition> transitions = transitions_of(series);
    return cls_covariance(transitions, r, regime_order, fit);
}

}  // namespace mtinar
