#pragma once

#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "fcar/grid.hpp"
#include "fcar/matrix.hpp"

namespace fcar {

/// An ordered collection of curves sampled on a common grid. One matrix
/// row per curve, columns aligned with the grid. A series is either raw
/// or centered; centered series carry the mean curve that was removed.
class FunctionalSeries {
public:
    FunctionalSeries(Grid grid, Matrix values)
        : grid_(std::move(grid)), values_(std::move(values)) {
        validate();
    }

    /// Wraps values the caller asserts are already mean-free (zero mean
    /// curve unless one is supplied).
    static FunctionalSeries already_centered(Grid grid, Matrix values,
                                             std::vector<double> mean = {}) {
        FunctionalSeries s(std::move(grid), std::move(values));
        if (mean.empty()) mean.assign(static_cast<std::size_t>(s.grid_size()), 0.0);
        if (static_cast<int>(mean.size()) != s.grid_size())
            throw InvalidArgument("FunctionalSeries: mean curve length mismatch");
        s.centered_ = true;
        s.mean_ = std::move(mean);
        return s;
    }

    const Grid& grid() const { return grid_; }
    int count() const { return values_.rows(); }
    int grid_size() const { return values_.cols(); }
    std::span<const double> curve(int i) const { return values_.row(i); }
    const Matrix& values() const { return values_; }
    bool centered() const { return centered_; }
    const std::vector<double>& mean_curve() const { return mean_; }

    /// Rows [first, first+count) as a new series with the same grid.
    FunctionalSeries slice(int first, int n) const {
        if (first < 0 || n < 2 || first + n > count())
            throw InvalidArgument("FunctionalSeries::slice: range out of bounds");
        Matrix v(n, grid_size());
        for (int i = 0; i < n; ++i) {
            auto src = curve(first + i);
            auto dst = v.row(i);
            std::copy(src.begin(), src.end(), dst.begin());
        }
        FunctionalSeries out(grid_, std::move(v));
        out.centered_ = centered_;
        out.mean_ = mean_;
        return out;
    }

private:
    void validate() const {
        if (values_.rows() < 2) throw InvalidArgument("FunctionalSeries: need at least 2 curves");
        if (values_.cols() != grid_.size())
            throw InvalidArgument("FunctionalSeries: row length does not match the grid");
        for (double v : values_.flat())
            if (!std::isfinite(v)) throw InvalidArgument("FunctionalSeries: non-finite value");
    }

    Grid grid_;
    Matrix values_;
    bool centered_ = false;
    std::vector<double> mean_;
};

struct CenterResult {
    FunctionalSeries series;
    std::vector<double> mean_curve;
};

/// Removes the pointwise sample mean curve from every row.
inline CenterResult center(const FunctionalSeries& s) {
    if (s.centered()) throw InvalidArgument("center: series is already centered");
    const int m = s.count();
    const int g = s.grid_size();
    std::vector<double> mean(static_cast<std::size_t>(g), 0.0);
    for (int i = 0; i < m; ++i) {
        auto row = s.curve(i);
        for (int j = 0; j < g; ++j) mean[static_cast<std::size_t>(j)] += row[static_cast<std::size_t>(j)];
    }
    for (double& v : mean) v /= m;
    Matrix vals(m, g);
    for (int i = 0; i < m; ++i) {
        auto src = s.curve(i);
        auto dst = vals.row(i);
        for (int j = 0; j < g; ++j)
            dst[static_cast<std::size_t>(j)] = src[static_cast<std::size_t>(j)] - mean[static_cast<std::size_t>(j)];
    }
    FunctionalSeries out = FunctionalSeries::already_centered(s.grid(), std::move(vals), mean);
    return {std::move(out), std::move(mean)};
}

}  // namespace fcar
