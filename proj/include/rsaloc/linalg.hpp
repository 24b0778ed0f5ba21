#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace rsaloc {

/// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const {
        return {data_.data() + r * cols_, cols_};
    }

    double* data() noexcept { return data_.data(); }
    const double* data() const noexcept { return data_.data(); }
    std::size_t size() const noexcept { return data_.size(); }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Least-squares solution of an overdetermined system.
struct LstsqSolution {
    std::vector<double> x;
    /// max|r_kk| / min|r_kk| over the R diagonal of the QR factorization;
    /// infinity when a diagonal entry vanishes. Squaring it gives a proxy
    /// for the condition number of the normal-equations matrix.
    double cond_r = 0.0;
};

/// Solves min ||A x - b||_2 by Householder QR. Requires rows >= cols.
LstsqSolution lstsq(const Matrix& a, std::span<const double> b);

/// Eigenvalues of a symmetric 3x3 matrix (row-major, 9 entries), ascending.
std::array<double, 3> sym3_eigenvalues(const std::array<double, 9>& m);

}  // namespace rsaloc
