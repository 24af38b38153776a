#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cdn {

// Dense row-major matrix of 64-bit reals. Immutable use after construction is
// the norm; the mutating accessors exist for builders only.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

    static Matrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double operator()(std::size_t i, std::size_t j) const {
        return data_[i * cols_ + j];
    }
    double& operator()(std::size_t i, std::size_t j) {
        return data_[i * cols_ + j];
    }

    std::span<const double> row(std::size_t i) const {
        return {data_.data() + i * cols_, cols_};
    }
    std::span<double> row(std::size_t i) {
        return {data_.data() + i * cols_, cols_};
    }

    const std::vector<double>& values() const { return data_; }

    std::vector<double> col(std::size_t j) const;
    Matrix transposed() const;

    // True iff every entry is finite.
    bool finite() const;

    // y = X * gamma
    std::vector<double> multiply(std::span<const double> gamma) const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

struct ThinSVD {
    Matrix u;                            // n x rank, orthonormal columns
    std::vector<double> singular_values; // non-increasing, > 0
    Matrix vt;                           // rank x d, orthonormal rows
    std::size_t rank = 0;
};

// Thrown by thin_svd on an all-zero matrix: leverage scores are undefined at
// rank zero.
class ZeroRankError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Thrown when power iteration fails to settle; carries the best estimate.
class SpectralNormError : public std::runtime_error {
public:
    SpectralNormError(const std::string& what, double best)
        : std::runtime_error(what), best_estimate(best) {}
    double best_estimate;
};

// One-sided Jacobi. Rank is the count of singular values above
// rank_tol * sigma_max.
ThinSVD thin_svd(const Matrix& x, double rank_tol = 1e-12);

double frobenius_norm(const Matrix& x);

// Largest singular value via power iteration on A^T A.
double spectral_norm(const Matrix& a, double tol = 1e-9);

// argmin_gamma sum_i w_i (a_i gamma - b_i)^2, minimum-norm on rank
// deficiency. An all-zero (or all-zero-weight) system yields the zero vector.
std::vector<double> solve_weighted_least_squares(const Matrix& a,
                                                 std::span<const double> b,
                                                 std::span<const double> w);

}  // namespace cdn
