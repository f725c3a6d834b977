#include "piml/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace piml {

std::vector<double> solve_dense(Matrix a, std::vector<double> b) {
    const std::size_t n = a.rows;
    if (a.cols != n || b.size() != n) {
        throw std::invalid_argument("solve_dense: dimension mismatch");
    }
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t pivot = k;
        double best = std::fabs(a(k, k));
        for (std::size_t r = k + 1; r < n; ++r) {
            double m = std::fabs(a(r, k));
            if (m > best) {
                best = m;
                pivot = r;
            }
        }
        if (!(best > 1e-300)) {
            throw std::runtime_error("solve_dense: singular system");
        }
        if (pivot != k) {
            for (std::size_t c = k; c < n; ++c) std::swap(a(k, c), a(pivot, c));
            std::swap(b[k], b[pivot]);
        }
        const double inv = 1.0 / a(k, k);
        for (std::size_t r = k + 1; r < n; ++r) {
            const double f = a(r, k) * inv;
            if (f == 0.0) continue;
            for (std::size_t c = k; c < n; ++c) a(r, c) -= f * a(k, c);
            b[r] -= f * b[k];
        }
    }
    std::vector<double> x(n, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t c = i + 1; c < n; ++c) s -= a(i, c) * x[c];
        x[i] = s / a(i, i);
    }
    return x;
}

Matrix gram(const Matrix& a) {
    Matrix g(a.cols, a.cols);
    for (std::size_t i = 0; i < a.cols; ++i) {
        for (std::size_t j = i; j < a.cols; ++j) {
            double s = 0.0;
            for (std::size_t r = 0; r < a.rows; ++r) s += a(r, i) * a(r, j);
            g(i, j) = s;
            g(j, i) = s;
        }
    }
    return g;
}

std::vector<double> mat_t_vec(const Matrix& a, const std::vector<double>& y) {
    std::vector<double> out(a.cols, 0.0);
    for (std::size_t r = 0; r < a.rows; ++r) {
        for (std::size_t c = 0; c < a.cols; ++c) out[c] += a(r, c) * y[r];
    }
    return out;
}

std::vector<double> mat_vec(const Matrix& a, const std::vector<double>& x) {
    std::vector<double> out(a.rows, 0.0);
    for (std::size_t r = 0; r < a.rows; ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < a.cols; ++c) s += a(r, c) * x[c];
        out[r] = s;
    }
    return out;
}

}  // namespace piml
