#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <vector>

namespace mtinar {

using ObjectiveFn = std::function<double(std::span<const double>)>;

struct NelderMeadOptions {
    int max_evaluations = 10000;
    double param_tol = 1e-8;   // simplex diameter below which we stop
    double value_tol = 1e-10;  // objective spread below which we stop
    double initial_step = 0.25;
};

struct NelderMeadResult {
    std::vector<double> x;
    double value = 0.0;
    int evaluations = 0;
    bool converged = false;
};

/// Downhill simplex minimizer. Stops when both the simplex diameter and
/// objective spread fall under their tolerances, or at the evaluation cap
/// (converged = false, best iterate still returned).
NelderMeadResult nelder_mead(const ObjectiveFn& f, std::span<const double> x0,
                             const NelderMeadOptions& options = {});

inline double logit(double p) { return std::log(p / (1.0 - p)); }
inline double inv_logit(double z) { return 1.0 / (1.0 + std::exp(-z)); }

/// Central-difference gradient with per-coordinate steps.
std::vector<double> central_gradient(const ObjectiveFn& f, std::span<const double> x,
                                     std::span<const double> steps);

/// Central-difference Hessian (symmetric by construction).
std::vector<double> central_hessian(const ObjectiveFn& f, std::span<const double> x,
                                    std::span<const double> steps);

/// max(base, base * |x|) step rule used for all numerical derivatives.
std::vector<double> derivative_steps(std::span<const double> x, double base = 1e-5);

}  // namespace mtinar
