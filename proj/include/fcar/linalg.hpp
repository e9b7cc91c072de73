#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "fcar/errors.hpp"
#include "fcar/matrix.hpp"

namespace fcar {

/// Root-free Cholesky factorization A = L D L' of a symmetric matrix,
/// keeping every pivot for diagnostics. `complete` is false when a pivot
/// underflowed to the point that continuing would divide by zero.
struct LdltFactors {
    int n = 0;
    Matrix lower;              // unit lower triangle, diagonal implicitly 1
    std::vector<double> diag;  // pivots d_k in elimination order
    double min_pivot = 0.0;
    int min_index = -1;
    bool complete = true;

    /// Solves A x = b in place using the factors.
    void solve_in_place(std::span<double> b) const {
        for (int i = 0; i < n; ++i) {
            double s = b[static_cast<std::size_t>(i)];
            for (int k = 0; k < i; ++k) s -= lower(i, k) * b[static_cast<std::size_t>(k)];
            b[static_cast<std::size_t>(i)] = s;
        }
        for (int i = 0; i < n; ++i) b[static_cast<std::size_t>(i)] /= diag[static_cast<std::size_t>(i)];
        for (int i = n - 1; i >= 0; --i) {
            double s = b[static_cast<std::size_t>(i)];
            for (int k = i + 1; k < n; ++k) s -= lower(k, i) * b[static_cast<std::size_t>(k)];
            b[static_cast<std::size_t>(i)] = s;
        }
    }
};

inline LdltFactors ldlt_factor(const Matrix& a) {
    const int n = a.rows();
    if (a.cols() != n) throw InvalidArgument("ldlt_factor: matrix must be square");
    LdltFactors f;
    f.n = n;
    f.lower = Matrix(n, n);
    f.diag.assign(static_cast<std::size_t>(n), 0.0);
    f.min_pivot = std::numeric_limits<double>::infinity();
    for (int j = 0; j < n; ++j) {
        double d = a(j, j);
        for (int k = 0; k < j; ++k) d -= f.lower(j, k) * f.lower(j, k) * f.diag[static_cast<std::size_t>(k)];
        f.diag[static_cast<std::size_t>(j)] = d;
        if (d < f.min_pivot) {
            f.min_pivot = d;
            f.min_index = j;
        }
        if (!(std::fabs(d) > 0.0) || std::isnan(d)) {
            f.complete = false;
            f.n = j + 1;  // columns beyond j were never formed
            return f;
        }
        for (int i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (int k = 0; k < j; ++k) s -= f.lower(i, k) * f.lower(j, k) * f.diag[static_cast<std::size_t>(k)];
            f.lower(i, j) = s / d;
        }
    }
    return f;
}

struct SpdSolution {
    Matrix x;          // same shape as the right-hand sides
    double min_pivot;  // smallest pivot met during elimination
};

namespace detail {
inline void require_symmetric(const Matrix& a) {
    double scale = 0.0;
    for (int i = 0; i < a.rows(); ++i) scale = std::max(scale, std::fabs(a(i, i)));
    const double tol = 1e-8 * std::max(scale, 1e-300);
    for (int i = 0; i < a.rows(); ++i)
        for (int j = i + 1; j < a.cols(); ++j)
            if (std::fabs(a(i, j) - a(j, i)) > tol)
                throw InvalidArgument("solve_spd: matrix is not symmetric");
}
}  // namespace detail

/// Solves A X = B for symmetric positive definite A, column by column of B.
/// Pivots below `rel_tol` times the largest diagonal entry abort with a
/// SingularMatrix error carrying the offending pivot.
inline SpdSolution solve_spd(const Matrix& a, const Matrix& b, double rel_tol = 1e-12) {
    if (a.rows() != b.rows()) throw InvalidArgument("solve_spd: dimension mismatch");
    detail::require_symmetric(a);
    double max_diag = 0.0;
    for (int i = 0; i < a.rows(); ++i) max_diag = std::max(max_diag, std::fabs(a(i, i)));
    const double tol = rel_tol * std::max(max_diag, 1e-300);
    const LdltFactors f = ldlt_factor(a);
    if (!f.complete || f.min_pivot < tol)
        throw SingularMatrix("solve_spd: pivot " + std::to_string(f.min_pivot) +
                                 " below tolerance at index " + std::to_string(f.min_index),
                             f.min_pivot, f.min_index);
    const int n = a.rows();
    Matrix x = b;
    std::vector<double> col(static_cast<std::size_t>(n));
    for (int j = 0; j < b.cols(); ++j) {
        for (int i = 0; i < n; ++i) col[static_cast<std::size_t>(i)] = b(i, j);
        f.solve_in_place(col);
        for (int i = 0; i < n; ++i) x(i, j) = col[static_cast<std::size_t>(i)];
    }
    return {std::move(x), f.min_pivot};
}

inline std::vector<double> solve_spd(const Matrix& a, std::span<const double> b, double rel_tol = 1e-12) {
    Matrix rhs(a.rows(), 1);
    for (int i = 0; i < a.rows(); ++i) rhs(i, 0) = b[static_cast<std::size_t>(i)];
    SpdSolution s = solve_spd(a, rhs, rel_tol);
    std::vector<double> out(static_cast<std::size_t>(a.rows()));
    for (int i = 0; i < a.rows(); ++i) out[static_cast<std::size_t>(i)] = s.x(i, 0);
    return out;
}

}  // namespace fcar
