#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mtinar {

/// Row-major dense matrix used for transition kernels. Kept deliberately
/// plain so the OpenMP kernels below stay transparent.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    std::span<const double> data() const noexcept { return data_; }

    bool operator==(const DenseMatrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// OpenMP kernels. Each output element is accumulated in the same order as
// the serial reference, so results are bit-identical for any thread count.

/// C = A * B, parallel over rows of A.
DenseMatrix mat_mul(const DenseMatrix& a, const DenseMatrix& b);

/// y = x * M (row vector times matrix), parallel over output columns.
std::vector<double> vec_mat(std::span<const double> x, const DenseMatrix& m);

/// M^h by repeated squaring (h >= 0; h == 0 yields the identity).
DenseMatrix mat_power(const DenseMatrix& m, unsigned h);

namespace serial {

// Reference implementations used by tests and the benchmark.
DenseMatrix mat_mul(const DenseMatrix& a, const DenseMatrix& b);
std::vector<double> vec_mat(std::span<const double> x, const DenseMatrix& m);
DenseMatrix mat_power(const DenseMatrix& m, unsigned h);

}  // namespace serial

}  // namespace mtinar
