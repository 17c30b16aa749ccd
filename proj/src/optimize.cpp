#include "mtinar/optimize.hpp"

#include <algorithm>
#include <numeric>

#include "mtinar/errors.hpp"

namespace mtinar {

namespace {

struct Vertex {
    std::vector<double> x;
    double value;
};

double diameter(const std::vector<Vertex>& simplex) {
    double d = 0.0;
    const auto& best = simplex.front().x;
    for (std::size_t v = 1; v < simplex.size(); ++v)
        for (std::size_t i = 0; i < best.size(); ++i)
            d = std::max(d, std::abs(simplex[v].x[i] - best[i]));
    return d;
}

}  // namespace

NelderMeadResult nelder_mead(const ObjectiveFn& f, std::span<const double> x0,
                             const NelderMeadOptions& options) {
    const std::size_t dim = x0.size();
    if (dim == 0) throw InputError("nelder_mead requires at least one dimension");

    int evaluations = 0;
    auto eval = [&](const std::vector<double>& x) {
        ++evaluations;
        return f(x);
    };

    std::vector<Vertex> simplex;
    simplex.reserve(dim + 1);
    simplex.push_back({std::vector<double>(x0.begin(), x0.end()), 0.0});
    simplex[0].value = eval(simplex[0].x);
    for (std::size_t i = 0; i < dim; ++i) {
        Vertex v = simplex[0];
        v.x[i] += options.initial_step;
        v.value = eval(v.x);
        simplex.push_back(std::move(v));
    }

    auto by_value = [](const Vertex& a, const Vertex& b) { return a.value < b.value; };
    std::sort(simplex.begin(), simplex.end(), by_value);

    constexpr double kReflect = 1.0, kExpand = 2.0, kContract = 0.5, kShrink = 0.5;

    while (evaluations < options.max_evaluations) {
        if (diameter(simplex) < options.param_tol &&
            simplex.back().value - simplex.front().value < options.value_tol) {
            return {simplex.front().x, simplex.front().value, evaluations, true};
        }

        // Centroid of all vertices except the worst.
        std::vector<double> centroid(dim, 0.0);
        for (std::size_t v = 0; v < dim; ++v)
            for (std::size_t i = 0; i < dim; ++i) centroid[i] += simplex[v].x[i];
        for (double& c : centroid) c /= static_cast<double>(dim);

        Vertex& worst = simplex.back();
        auto blend = [&](double coeff) {
            std::vector<double> x(dim);
            for (std::size_t i = 0; i < dim; ++i)
                x[i] = centroid[i] + coeff * (centroid[i] - worst.x[i]);
            return x;
        };

        Vertex reflected{blend(kReflect), 0.0};
        reflected.value = eval(reflected.x);

        if (reflected.value < simplex.front().value) {
            Vertex expanded{blend(kExpand), 0.0};
            expanded.value = eval(expanded.x);
            worst = expanded.value < reflected.value ? std::move(expanded) : std::move(reflected);
        } else if (reflected.value < simplex[dim - 1].value) {
            worst = std::move(reflected);
        } else {
            const bool outside = reflected.value < worst.value;
            Vertex contracted{blend(outside ? kContract : -kContract), 0.0};
            contracted.value = eval(contracted.x);
            if (contracted.value < std::min(reflected.value, worst.value)) {
                worst = std::move(contracted);
            } else {
                // Shrink toward the best vertex.
                for (std::size_t v = 1; v <= dim; ++v) {
                    for (std::size_t i = 0; i < dim; ++i)
                        simplex[v].x[i] =
                            simplex[0].x[i] + kShrink * (simplex[v].x[i] - simplex[0].x[i]);
                    simplex[v].value = eval(simplex[v].x);
                }
            }
        }
        std::sort(simplex.begin(), simplex.end(), by_value);
    }
    return {simplex.front().x, simplex.front().value, evaluations, false};
}

std::vector<double> derivative_steps(std::span<const double> x, double base) {
    std::vector<double> steps(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) steps[i] = std::max(base, base * std::abs(x[i]));
    return steps;
}

std::vector<double> central_gradient(const ObjectiveFn& f, std::span<const double> x,
                                     std::span<const double> steps) {
    std::vector<double> grad(x.size());
    std::vector<double> point(x.begin(), x.end());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double h = steps[i];
        point[i] = x[i] + h;
        const double up = f(point);
        point[i] = x[i] - h;
        const double down = f(point);
        point[i] = x[i];
        grad[i] = (up - down) / (2.0 * h);
    }
    return grad;
}

std::vector<double> central_hessian(const ObjectiveFn& f, std::span<const double> x,
                                    std::span<const double> steps) {
    const std::size_t n = x.size();
    std::vector<double> hess(n * n, 0.0);
    std::vector<double> point(x.begin(), x.end());
    const double center = f(point);

    for (std::size_t i = 0; i < n; ++i) {
        const double hi = steps[i];
        point[i] = x[i] + hi;
        const double up = f(point);
        point[i] = x[i] - hi;
        const double down = f(point);
        point[i] = x[i];
        hess[i * n + i] = (up - 2.0 * center + down) / (hi * hi);
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double hi = steps[i], hj = steps[j];
            double quad[4];
            int idx = 0;
            for (double si : {hi, -hi}) {
                for (double sj : {hj, -hj}) {
                    point[i] = x[i] + si;
                    point[j] = x[j] + sj;
                    quad[idx++] = f(point);
                }
            }
            point[i] = x[i];
            point[j] = x[j];
            const double value = (quad[0] - quad[1] - quad[2] + quad[3]) / (4.0 * hi * hj);
            hess[i * n + j] = value;
            hess[j * n + i] = value;
        }
    }
    return hess;
}

}  // namespace mtinar
