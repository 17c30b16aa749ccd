#include "mtinar/matrix.hpp"

#include <cstdint>

#include "mtinar/errors.hpp"

namespace mtinar {

namespace {

// i-k-j loop body shared by the serial and parallel variants; the inner
// accumulation order is what makes the two bit-identical.
inline void mul_row(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& c, std::size_t i) {
    const std::size_t n = a.cols();
    const std::size_t p = b.cols();
    double* out = c.row(i).data();
    for (std::size_t k = 0; k < n; ++k) {
        const double aik = a(i, k);
        if (aik == 0.0) continue;
        const double* brow = b.row(k).data();
        for (std::size_t j = 0; j < p; ++j) out[j] += aik * brow[j];
    }
}

inline double vec_mat_entry(std::span<const double> x, const DenseMatrix& m, std::size_t j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) acc += x[i] * m(i, j);
    return acc;
}

void check_mul_shapes(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.rows()) throw InputError("matrix product shape mismatch");
}

DenseMatrix identity(std::size_t n) {
    DenseMatrix id(n, n);
    for (std::size_t i = 0; i < n; ++i) id(i, i) = 1.0;
    return id;
}

template <typename Mul>
DenseMatrix power_by_squaring(const DenseMatrix& m, unsigned h, Mul mul) {
    if (m.rows() != m.cols()) throw InputError("matrix power requires a square matrix");
    DenseMatrix result = identity(m.rows());
    DenseMatrix base = m;
    while (h > 0) {
        if (h & 1u) result = mul(result, base);
        h >>= 1u;
        if (h > 0) base = mul(base, base);
    }
    return result;
}

}  // namespace

DenseMatrix mat_mul(const DenseMatrix& a, const DenseMatrix& b) {
    check_mul_shapes(a, b);
    DenseMatrix c(a.rows(), b.cols());
    const std::int64_t rows = static_cast<std::int64_t>(a.rows());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < rows; ++i) mul_row(a, b, c, static_cast<std::size_t>(i));
    return c;
}

std::vector<double> vec_mat(std::span<const double> x, const DenseMatrix& m) {
    if (x.size() != m.rows()) throw InputError("vector-matrix shape mismatch");
    std::vector<double> y(m.cols());
    const std::int64_t cols = static_cast<std::int64_t>(m.cols());
#pragma omp parallel for schedule(static)
    for (std::int64_t j = 0; j < cols; ++j)
        y[static_cast<std::size_t>(j)] = vec_mat_entry(x, m, static_cast<std::size_t>(j));
    return y;
}

DenseMatrix mat_power(const DenseMatrix& m, unsigned h) {
    return power_by_squaring(m, h, [](const DenseMatrix& a, const DenseMatrix& b) {
        return mat_mul(a, b);
    });
}

namespace serial {

DenseMatrix mat_mul(const DenseMatrix& a, const DenseMatrix& b) {
    check_mul_shapes(a, b);
    DenseMatrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) mul_row(a, b, c, i);
    return c;
}

std::vector<double> vec_mat(std::span<const double> x, const DenseMatrix& m) {
    if (x.size() != m.rows()) throw InputError("vector-matrix shape mismatch");
    std::vector<double> y(m.cols());
    for (std::size_t j = 0; j < m.cols(); ++j) y[j] = vec_mat_entry(x, m, j);
    return y;
}

DenseMatrix mat_power(const DenseMatrix& m, unsigned h) {
    return power_by_squaring(m, h, [](const DenseMatrix& a, const DenseMatrix& b) {
        return serial::mat_mul(a, b);
    });
}

}  // namespace serial

}  // namespace mtinar
