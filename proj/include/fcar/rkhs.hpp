#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fcar/errors.hpp"
#include "fcar/grid.hpp"
#include "fcar/linalg.hpp"
#include "fcar/matrix.hpp"
#include "fcar/parallel.hpp"
#include "fcar/selection.hpp"

namespace fcar::rkhs {

/// A member of the Brownian-motion RKHS represented exactly: the
/// continuous piecewise-linear interpolant of its grid samples, with
/// f(0) = 0. The inner product integrates the product of the piecewise
/// constant derivatives, which is exact for this representation.
class PLFunction {
public:
    PLFunction(Grid grid, std::vector<double> values)
        : grid_(std::move(grid)), values_(std::move(values)) {
        if (static_cast<int>(values_.size()) != grid_.size())
            throw InvalidArgument("PLFunction: value count does not match the grid");
        if (grid_[0] != 0.0)
            throw NotInRkhs("PLFunction: grid must start at 0");
        if (values_[0] != 0.0)
            throw NotInRkhs("PLFunction: f(0) must be 0");
    }

    const Grid& grid() const { return grid_; }
    const std::vector<double>& values() const { return values_; }

    double operator()(double t) const {
        const auto& pts = grid_.points();
        if (t <= pts.front()) return values_.front();
        if (t >= pts.back()) return values_.back();
        auto it = std::upper_bound(pts.begin(), pts.end(), t);
        const std::size_t hi = static_cast<std::size_t>(it - pts.begin());
        const std::size_t lo = hi - 1;
        const double w = (t - pts[lo]) / (pts[hi] - pts[lo]);
        return (1.0 - w) * values_[lo] + w * values_[hi];
    }

    /// The kernel section min(t, .) realized on the same grid; `t` must be
    /// a grid point so the kink is representable.
    static PLFunction kernel_section(const Grid& grid, double t) {
        if (grid.index_of(t) < 0 && t != 0.0)
            throw InvalidArgument("kernel_section: t must be a grid point");
        std::vector<double> v(static_cast<std::size_t>(grid.size()));
        for (int i = 0; i < grid.size(); ++i) v[static_cast<std::size_t>(i)] = std::min(grid[i], t);
        return PLFunction(grid, std::move(v));
    }

private:
    Grid grid_;
    std::vector<double> values_;
};

namespace detail {

inline std::vector<double> union_points(std::span<const double> a, std::span<const double> b) {
    std::vector<double> u;
    u.reserve(a.size() + b.size());
    std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(u));
    u.erase(std::unique(u.begin(), u.end()), u.end());
    return u;
}

}  // namespace detail

/// <f, g>_H = int_0^1 f'(s) g'(s) ds, exact for the piecewise-linear
/// representation. Functions on different grids are refined to the union
/// grid first (resampling a PL function onto a superset of its grid is
/// lossless).
inline double h_inner(const PLFunction& f, const PLFunction& g) {
    if (f.grid() == g.grid()) {
        const auto& pts = f.grid().points();
        const auto& fv = f.values();
        const auto& gv = g.values();
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < pts.size(); ++i)
            acc += (fv[i + 1] - fv[i]) * (gv[i + 1] - gv[i]) / (pts[i + 1] - pts[i]);
        return acc;
    }
    const std::vector<double> u = detail::union_points(f.grid().points(), g.grid().points());
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < u.size(); ++i) {
        const double df = f(u[i + 1]) - f(u[i]);
        const double dg = g(u[i + 1]) - g(u[i]);
        acc += df * dg / (u[i + 1] - u[i]);
    }
    return acc;
}

inline double h_norm_sq(const PLFunction& f) { return h_inner(f, f); }

/// A bivariate kernel phi(s, t) with phi(s, 0) = 0, the target of the
/// finite-point approximation study. Named registry entries cover the
/// test kernels and the sparse-log generating kernel.
class KernelSurface {
public:
    KernelSurface(std::string name, std::function<double(double, double)> f)
        : name_(std::move(name)), f_(std::move(f)) {}

    static KernelSurface named(const std::string& name) {
        if (name == "phi1")
            return KernelSurface("phi1", [](double s, double t) {
                return std::cos(2.0 * M_PI * s) * std::sin(2.0 * M_PI * t);
            });
        if (name == "phi2")
            return KernelSurface("phi2",
                                 [](double s, double t) { return std::sin(2.0 * M_PI * s * t); });
        if (name == "phi3")
            return KernelSurface("phi3",
                                 [](double s, double t) { return -std::log(5.0 * s * t + 1.0); });
        if (name == "sparse-log")
            return KernelSurface("sparse-log", [](double s, double t) {
                static const double tstar[3] = {0.3, 0.5, 0.9};
                double acc = 0.0;
                for (int j = 0; j < 3; ++j)
                    acc += std::log((1.0 + s) / (j + 1.0)) * std::min(tstar[j], t);
                return acc;
            });
        throw InvalidArgument("KernelSurface: unknown kernel '" + name + "'");
    }

    const std::string& name() const { return name_; }

    double operator()(double s, double t) const { return f_(s, t); }

    /// phi(s, .) sampled onto `grid` as a PL function; rejects kernels
    /// that violate phi(s, 0) = 0.
    PLFunction section(double s, const Grid& grid) const {
        std::vector<double> v(static_cast<std::size_t>(grid.size()));
        for (int i = 0; i < grid.size(); ++i) v[static_cast<std::size_t>(i)] = f_(s, grid[i]);
        if (std::fabs(v[0]) > 1e-12 || grid[0] != 0.0)
            throw NotInRkhs("KernelSurface: phi(s,0) must vanish on a grid starting at 0");
        v[0] = 0.0;
        return PLFunction(grid, std::move(v));
    }

private:
    std::string name_;
    std::function<double(double, double)> f_;
};

struct Projection {
    std::vector<double> coefficients;
    double sq_distance;
};

/// Projects phi(s, .) onto span{ min(t_j, .) : t_j in T }. Coefficients
/// solve the min-kernel Gram system against phi(s, T); the squared
/// distance is evaluated as the H-norm of the residual section on the
/// union of the sample grid and T, which is algebraically
/// ||phi(s,.)||^2 - phi(s,T)' Sigma_T^{-1} phi(s,T) but free of the
/// cancellation that form suffers when the distance is tiny.
inline Projection project(const KernelSurface& phi, double s, std::span<const double> points,
                          const Grid& sample_grid) {
    const int p = static_cast<int>(points.size());
    if (p < 1) throw InvalidArgument("project: need at least one point");
    for (double t : points)
        if (!(t > 0.0) || t > 1.0)
            throw InvalidArgument("project: points must lie in (0,1]");
    Matrix gram(p, p);
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j) gram(i, j) = std::min(points[static_cast<std::size_t>(i)], points[static_cast<std::size_t>(j)]);
    std::vector<double> rhs(static_cast<std::size_t>(p));
    for (int j = 0; j < p; ++j) rhs[static_cast<std::size_t>(j)] = phi(s, points[static_cast<std::size_t>(j)]);
    const std::vector<double> coeff = solve_spd(gram, rhs);

    std::vector<double> sorted(points.begin(), points.end());
    std::sort(sorted.begin(), sorted.end());
    const std::vector<double> upts = detail::union_points(sample_grid.points(), sorted);
    double acc = 0.0;
    double prev_r = 0.0;  // residual at 0 vanishes: phi(s,0)=0 and all min(t_j,0)=0
    if (upts.front() != 0.0 || std::fabs(phi(s, 0.0)) > 1e-12)
        throw NotInRkhs("project: phi(s,0) must vanish on a grid starting at 0");
    for (std::size_t i = 1; i < upts.size(); ++i) {
        double proj = 0.0;
        for (int j = 0; j < p; ++j) proj += coeff[static_cast<std::size_t>(j)] * std::min(points[static_cast<std::size_t>(j)], upts[i]);
        const double r = phi(s, upts[i]) - proj;
        const double dr = r - prev_r;
        acc += dr * dr / (upts[i] - upts[i - 1]);
        prev_r = r;
    }
    return {coeff, std::max(acc, 0.0)};
}

enum class Design { greedy, quantile };

/// Exact-kernel counterpart of the sample covariance model: candidate
/// abscissas are the positive grid points, covariances are min(u, v) and
/// cross columns are kernel sections. Lets the greedy selector pick
/// approximation points for a known kernel with the same code path that
/// selects sample points.
class BrownianKernelModel {
public:
    BrownianKernelModel(const KernelSurface& phi, const Grid& grid) : grid_(grid) {
        for (double t : grid.points())
            if (t > 0.0) abscissas_.push_back(t);
        if (abscissas_.empty())
            throw InvalidArgument("BrownianKernelModel: grid has no positive points");
        sections_ = Matrix(static_cast<int>(abscissas_.size()), grid_.size());
        for (int c = 0; c < static_cast<int>(abscissas_.size()); ++c) {
            // row c: s -> phi(s, t_c)
            for (int s = 0; s < grid_.size(); ++s) sections_(c, s) = phi(grid_[s], abscissas_[static_cast<std::size_t>(c)]);
        }
    }

    const Grid& integration_grid() const { return grid_; }
    std::span<const double> candidate_abscissas() const { return abscissas_; }
    int lags() const { return 1; }
    double variance(const Candidate& a) const { return a.abscissa; }  // min(t,t)
    double max_variance() const { return abscissas_.back(); }
    double cov(const Candidate& a, const Candidate& b) const {
        return std::min(a.abscissa, b.abscissa);
    }
    void cross_column(const Candidate& a, std::span<double> out) const {
        auto row = sections_.row(a.index);
        std::copy(row.begin(), row.end(), out.begin());
    }

private:
    Grid grid_;
    std::vector<double> abscissas_;
    Matrix sections_;  // candidate x s
};

struct DistanceProfile {
    Grid s_grid;
    std::vector<std::vector<double>> designs;    // designs[p-1] = points used at size p
    std::vector<std::vector<double>> distances;  // distances[p-1][i] at s = s_grid[i]
};

/// H-distances between phi(s, .) and its projection on p points, for p up
/// to p_max. Greedy designs are nested prefixes chosen by the selection
/// criterion with phi in place of the sample cross-covariance; quantile
/// designs are the uniform quantiles {j/p}.
inline DistanceProfile distance_profile(const KernelSurface& phi, int p_max, Design design,
                                        const Grid& grid = make_uniform_grid(1001)) {
    if (p_max < 1) throw InvalidArgument("distance_profile: p_max must be >= 1");
    DistanceProfile out{grid, {}, {}};
    out.designs.resize(static_cast<std::size_t>(p_max));
    out.distances.assign(static_cast<std::size_t>(p_max),
                         std::vector<double>(static_cast<std::size_t>(grid.size()), 0.0));

    if (design == Design::greedy) {
        BrownianKernelModel model(phi, grid);
        SelectionOptions opt;
        opt.p_max = p_max;
        const SelectionTrace trace = select_greedy(model, opt);
        for (int p = 1; p <= p_max; ++p) {
            const int pe = std::min(p, trace.size());
            std::vector<double>& d = out.designs[static_cast<std::size_t>(p) - 1];
            for (int j = 0; j < pe; ++j) d.push_back(trace.chosen[static_cast<std::size_t>(j)].abscissa);
        }
    } else {
        for (int p = 1; p <= p_max; ++p) {
            std::vector<double>& d = out.designs[static_cast<std::size_t>(p) - 1];
            for (int j = 1; j <= p; ++j) d.push_back(static_cast<double>(j) / p);
        }
    }

    for (int p = 1; p <= p_max; ++p) {
        const std::vector<double>& pts = out.designs[static_cast<std::size_t>(p) - 1];
        std::vector<double>& col = out.distances[static_cast<std::size_t>(p) - 1];
        parallel::parallel_for(0, grid.size(), [&](int i) {
            const Projection pr = project(phi, grid[i], pts, grid);
            col[static_cast<std::size_t>(i)] = std::sqrt(pr.sq_distance);
        });
    }
    return out;
}

}  // namespace fcar::rkhs
