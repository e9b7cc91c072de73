#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fcar/errors.hpp"

namespace fcar {

/// Shared evaluation abscissas in [0,1], strictly increasing, at least two
/// points. Trapezoid weights for the actual gaps are precomputed once so
/// that quadrature over the grid is a plain dot product.
class Grid {
public:
    explicit Grid(std::vector<double> points) : pts_(std::move(points)) {
        if (pts_.size() < 2) throw InvalidArgument("Grid: need at least 2 points");
        if (!(pts_.front() >= 0.0) || !(pts_.back() <= 1.0))
            throw InvalidArgument("Grid: points must lie in [0,1]");
        min_gap_ = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i + 1 < pts_.size(); ++i) {
            const double gap = pts_[i + 1] - pts_[i];
            if (!(gap > 0.0)) throw InvalidArgument("Grid: points must be strictly increasing");
            min_gap_ = std::min(min_gap_, gap);
        }
        weights_.assign(pts_.size(), 0.0);
        for (std::size_t i = 0; i + 1 < pts_.size(); ++i) {
            const double half = 0.5 * (pts_[i + 1] - pts_[i]);
            weights_[i] += half;
            weights_[i + 1] += half;
        }
    }

    int size() const { return static_cast<int>(pts_.size()); }
    double operator[](int i) const { return pts_[static_cast<std::size_t>(i)]; }
    const std::vector<double>& points() const { return pts_; }
    std::span<const double> trapz_weights() const { return weights_; }
    double min_gap() const { return min_gap_; }

    /// Index of the grid point equal to `t` up to `tol`, or -1.
    int index_of(double t, double tol = 1e-9) const {
        auto it = std::lower_bound(pts_.begin(), pts_.end(), t - tol);
        if (it == pts_.end()) return -1;
        if (std::fabs(*it - t) <= tol) return static_cast<int>(it - pts_.begin());
        return -1;
    }

    bool operator==(const Grid& o) const { return pts_ == o.pts_; }

private:
    std::vector<double> pts_;
    std::vector<double> weights_;
    double min_gap_ = 0.0;
};

/// {0, 1/(n-1), ..., 1}.
inline Grid make_uniform_grid(int n) {
    if (n < 2) throw InvalidArgument("make_uniform_grid: need n >= 2");
    std::vector<double> pts(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) pts[static_cast<std::size_t>(i)] = static_cast<double>(i) / (n - 1);
    pts.back() = 1.0;
    return Grid(std::move(pts));
}

/// Composite trapezoid rule over the grid's own gaps. Exact for
/// piecewise-linear integrands whose kinks lie on grid points.
inline double trapz(const Grid& g, std::span<const double> f) {
    if (static_cast<int>(f.size()) != g.size())
        throw InvalidArgument("trapz: value count does not match the grid");
    const auto w = g.trapz_weights();
    double acc = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) acc += w[i] * f[i];
    return acc;
}

}  // namespace fcar
