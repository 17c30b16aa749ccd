#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <span>

#include "mtinar/model.hpp"

namespace mtinar {

enum class FitMethod { CLS, CML };

/// Estimated mean-regression parameters (phi1, phi2, lambda) with the
/// sqrt(n)-scaled sandwich covariance; standard errors are
/// sqrt(diag(covariance) / n_transitions).
///
/// Estimates are reported raw, never clamped into the parameter space;
/// check valid_parameters before treating them as a model.
struct MeanFit {
    double phi1_hat = 0.0;
    double phi2_hat = 0.0;
    double lambda_hat = 0.0;
    Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero();
    std::array<double, 3> std_errors{0.0, 0.0, 0.0};
    long n_lower = 0;  // transitions under the first indicator
    long n_upper = 0;  // transitions under the second indicator
    long n_transitions = 0;
    FitMethod method = FitMethod::CLS;
    bool valid_parameters = false;
    double loglik = std::numeric_limits<double>::quiet_NaN();  // set by CML fits
};

/// Closed-form conditional least squares at a known threshold. Uses the
/// n-1 consecutive pairs of the series; pass explicit transitions (e.g.
/// from transitions_with_origin) for the known-origin convention.
MeanFit cls_fit(const CountSeries& series, int r, int regime_order);
MeanFit cls_fit(std::span<const Transition> transitions, int r, int regime_order);

/// Empirical moment matrices behind the sandwich: v averages the outer
/// products of the regression gradient, w weighs them by squared residuals.
struct ClsInformation {
    Eigen::Matrix3d v = Eigen::Matrix3d::Zero();
    Eigen::Matrix3d w = Eigen::Matrix3d::Zero();
};

ClsInformation cls_information(std::span<const Transition> transitions, int r, int regime_order,
                               const MeanFit& fit);

/// Sandwich covariance V^-1 W V^-1 of the sqrt(n)-scaled limit, evaluated
/// at the fitted parameters and symmetrized. Throws NumericError when the
/// information matrix has condition number above 1e12.
Eigen::Matrix3d cls_covariance(std::span<const Transition> transitions, int r, int regime_order,
                               const MeanFit& fit);
Eigen::Matrix3d cls_covariance(const CountSeries& series, int r, int regime_order,
                               const MeanFit& fit);

/// Residual x_t - phi1 x I1 - phi2 x I2 - lambda of one transition.
double mean_residual(const Transition& tr, int r, int regime_order, double phi1, double phi2,
                     double lambda);

}  // namespace mtinar
