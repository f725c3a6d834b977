#pragma once

#include <cstddef>
#include <vector>

namespace piml {

/// Row-major dense matrix, just large enough for the regression and
/// least-squares systems in this project (tens of rows/columns).
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

/// Solves A x = b by Gaussian elimination with partial pivoting.
/// Throws std::runtime_error when the system is numerically singular.
std::vector<double> solve_dense(Matrix a, std::vector<double> b);

/// C = Aᵀ A for a tall matrix A.
Matrix gram(const Matrix& a);

/// Aᵀ y.
std::vector<double> mat_t_vec(const Matrix& a, const std::vector<double>& y);

/// A x.
std::vector<double> mat_vec(const Matrix& a, const std::vector<double>& x);

}  // namespace piml
