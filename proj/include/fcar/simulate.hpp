#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fcar/errors.hpp"
#include "fcar/grid.hpp"
#include "fcar/matrix.hpp"
#include "fcar/points.hpp"
#include "fcar/rng.hpp"
#include "fcar/series.hpp"

namespace fcar {

enum class SimFamily { sparse_log, sparse_sin, ou, far };

inline const char* family_name(SimFamily f) {
    switch (f) {
        case SimFamily::sparse_log: return "sparse-log";
        case SimFamily::sparse_sin: return "sparse-sin";
        case SimFamily::ou: return "ou";
        case SimFamily::far: return "far";
    }
    return "?";
}

inline std::optional<SimFamily> parse_family(const std::string& s) {
    if (s == "sparse-log") return SimFamily::sparse_log;
    if (s == "sparse-sin") return SimFamily::sparse_sin;
    if (s == "ou") return SimFamily::ou;
    if (s == "far") return SimFamily::far;
    return std::nullopt;
}

struct SimConfig {
    SimFamily family = SimFamily::ou;
    int m = 100;
    Grid grid = make_uniform_grid(101);
    int burn_in = 100;
    std::uint64_t seed = 0;
    double theta = 1.0;                             // ou rate
    std::vector<double> t_star = {0.3, 0.5, 0.9};   // sparse evaluation points
    int basis_dim = 15;                             // far
    double operator_scale = 0.8;                    // far spectral scale
};

/// The generating operator of a simulated family, available so the exact
/// baseline can apply the true rho to a curve.
class TrueKernel {
public:
    static TrueKernel sparse_log(std::vector<double> t_star) {
        return TrueKernel(SimFamily::sparse_log, 0.0, std::move(t_star));
    }
    static TrueKernel sparse_sin(std::vector<double> t_star) {
        return TrueKernel(SimFamily::sparse_sin, 0.0, std::move(t_star));
    }
    static TrueKernel ou(double theta) { return TrueKernel(SimFamily::ou, theta, {1.0}); }

    SimFamily family() const { return family_; }
    double theta() const { return theta_; }
    const std::vector<double>& points() const { return t_star_; }
    int point_count() const { return static_cast<int>(t_star_.size()); }
    double point(int j) const { return t_star_[static_cast<std::size_t>(j)]; }

    double alpha(int j, double s) const {
        switch (family_) {
            case SimFamily::sparse_log: return std::log((1.0 + s) / (j + 1.0));
            case SimFamily::sparse_sin: return std::sin(30.0 * M_PI * s / (j + 1.0));
            case SimFamily::ou: return std::exp(-theta_ * s);
            default: throw Unsupported("TrueKernel: family has no closed-form kernel");
        }
    }

    /// rho(x_prev) on the given grid; evaluation points off the grid are
    /// read by linear interpolation.
    std::vector<double> apply(const Grid& grid, std::span<const double> x_prev) const {
        if (static_cast<int>(x_prev.size()) != grid.size())
            throw InvalidArgument("TrueKernel::apply: curve length does not match the grid");
        std::vector<double> out(static_cast<std::size_t>(grid.size()), 0.0);
        for (int j = 0; j < point_count(); ++j) {
            const double xj = interp(grid, x_prev, t_star_[static_cast<std::size_t>(j)]);
            for (int s = 0; s < grid.size(); ++s)
                out[static_cast<std::size_t>(s)] += alpha(j, grid[s]) * xj;
        }
        return out;
    }

    static double interp(const Grid& grid, std::span<const double> f, double t) {
        const auto& pts = grid.points();
        if (t <= pts.front()) return f[0];
        if (t >= pts.back()) return f[f.size() - 1];
        auto it = std::upper_bound(pts.begin(), pts.end(), t);
        const std::size_t hi = static_cast<std::size_t>(it - pts.begin());
        const std::size_t lo = hi - 1;
        const double w = (t - pts[lo]) / (pts[hi] - pts[lo]);
        return (1.0 - w) * f[lo] + w * f[hi];
    }

private:
    TrueKernel(SimFamily f, double theta, std::vector<double> t_star)
        : family_(f), theta_(theta), t_star_(std::move(t_star)) {}

    SimFamily family_;
    double theta_;
    std::vector<double> t_star_;
};

struct SimResult {
    FunctionalSeries series;
    std::optional<TrueKernel> kernel;  // absent for far
};

namespace detail {

/// Standard Brownian motion restricted to the grid: exact joint law via
/// cumulated independent increments, B(0) = 0.
inline std::vector<double> brownian_curve(GaussianSampler& rng, const Grid& grid) {
    std::vector<double> b(static_cast<std::size_t>(grid.size()));
    b[0] = grid[0] > 0.0 ? rng.normal() * std::sqrt(grid[0]) : 0.0;
    for (int k = 0; k + 1 < grid.size(); ++k)
        b[static_cast<std::size_t>(k) + 1] =
            b[static_cast<std::size_t>(k)] + rng.normal() * std::sqrt(grid[k + 1] - grid[k]);
    return b;
}

/// Shared sparse recursion x_n(s) = sum_j alpha(j,s) x_{n-1}(t_j) + B_n(s)
/// with arbitrary coefficient functions (tests drive it with custom ones).
inline FunctionalSeries gen_sparse_with(const SimConfig& cfg,
                                        const std::function<double(int, double)>& alpha) {
    if (cfg.m < 2) throw InvalidArgument("gen_sparse: need m >= 2");
    if (cfg.burn_in < 50) throw InvalidArgument("gen_sparse: burn_in must be >= 50");
    const Grid& grid = cfg.grid;
    const int g = grid.size();
    const int p = static_cast<int>(cfg.t_star.size());
    if (p < 1) throw InvalidArgument("gen_sparse: need at least one evaluation point");
    std::vector<int> tidx(static_cast<std::size_t>(p));
    for (int j = 0; j < p; ++j) {
        tidx[static_cast<std::size_t>(j)] = grid.index_of(cfg.t_star[static_cast<std::size_t>(j)]);
        if (tidx[static_cast<std::size_t>(j)] < 0)
            throw InvalidArgument("gen_sparse: evaluation point not on the grid");
    }
    Matrix coeff(g, p);
    for (int s = 0; s < g; ++s)
        for (int j = 0; j < p; ++j) coeff(s, j) = alpha(j, grid[s]);

    GaussianSampler rng(cfg.seed);
    Matrix out(cfg.m, g);
    std::vector<double> x(static_cast<std::size_t>(g), 0.0);
    for (int n = 0; n < cfg.burn_in + cfg.m; ++n) {
        const std::vector<double> noise = brownian_curve(rng, grid);
        std::vector<double> next(static_cast<std::size_t>(g));
        double sup = 0.0;
        for (int s = 0; s < g; ++s) {
            double acc = noise[static_cast<std::size_t>(s)];
            for (int j = 0; j < p; ++j)
                acc += coeff(s, j) * x[static_cast<std::size_t>(tidx[static_cast<std::size_t>(j)])];
            next[static_cast<std::size_t>(s)] = acc;
            sup = std::max(sup, std::fabs(acc));
        }
        if (sup > 1e6)
            throw Instability("gen_sparse: trajectory exceeded 1e6 at step " + std::to_string(n));
        x = std::move(next);
        if (n >= cfg.burn_in) {
            auto row = out.row(n - cfg.burn_in);
            std::copy(x.begin(), x.end(), row.begin());
        }
    }
    return FunctionalSeries(grid, std::move(out));
}

struct FarPath {
    Matrix psi;           // rescaled transition matrix
    Matrix coefficients;  // m x D basis-coefficient trajectory
};

}  // namespace detail

/// Spectral radius of a square matrix via repeated squaring: after k
/// squarings, ||A^(2^k)||_F^(1/2^k) has shed the polynomial factors and
/// only the dominant eigenvalue magnitude remains.
inline double spectral_radius_estimate(const Matrix& a, int squarings = 14) {
    if (a.rows() != a.cols() || a.rows() == 0)
        throw InvalidArgument("spectral_radius_estimate: matrix must be square");
    const int n = a.rows();
    auto frob = [n](const Matrix& m) {
        double s = 0.0;
        for (double v : m.flat()) s += v * v;
        return std::sqrt(s);
    };
    double nf = frob(a);
    if (nf == 0.0) return 0.0;
    Matrix cur(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) cur(i, j) = a(i, j) / nf;
    double logn = std::log(nf);
    for (int it = 0; it < squarings; ++it) {
        Matrix sq(n, n);
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k) {
                const double v = cur(i, k);
                if (v == 0.0) continue;
                for (int j = 0; j < n; ++j) sq(i, j) += v * cur(k, j);
            }
        const double f = frob(sq);
        if (f == 0.0) return 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) sq(i, j) = sq(i, j) / f;
        cur = std::move(sq);
        logn = 2.0 * logn + std::log(f);
    }
    return std::exp(logn / std::pow(2.0, squarings));
}

namespace detail {

inline FarPath far_coefficient_path(const SimConfig& cfg, const Matrix* psi_override = nullptr) {
    if (cfg.basis_dim < 2) throw InvalidArgument("gen_far: basis dimension must be >= 2");
    if (!(cfg.operator_scale > 0.0) || !(cfg.operator_scale < 1.0))
        throw InvalidArgument("gen_far: operator scale must lie in (0,1)");
    if (cfg.burn_in < 50) throw InvalidArgument("gen_far: burn_in must be >= 50");
    const int d = cfg.basis_dim;
    GaussianSampler rng(cfg.seed);
    Matrix psi(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) psi(i, j) = rng.normal();
    if (psi_override) {
        if (psi_override->rows() != d || psi_override->cols() != d)
            throw InvalidArgument("gen_far: transition override has the wrong shape");
        psi = *psi_override;
    } else {
        const double rho = spectral_radius_estimate(psi);
        if (rho == 0.0) throw Instability("gen_far: degenerate transition matrix");
        const double scale = cfg.operator_scale / rho;
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) psi(i, j) *= scale;
    }

    // innovation standard deviations: linearly decaying variances
    std::vector<double> sd(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) sd[static_cast<std::size_t>(j)] = std::sqrt(static_cast<double>(d - j) / d);

    Matrix coeff(cfg.m, d);
    std::vector<double> xi(static_cast<std::size_t>(d), 0.0);
    for (int n = 0; n < cfg.burn_in + cfg.m; ++n) {
        std::vector<double> next(static_cast<std::size_t>(d), 0.0);
        for (int i = 0; i < d; ++i) {
            double acc = sd[static_cast<std::size_t>(i)] * rng.normal();
            for (int j = 0; j < d; ++j) acc += psi(i, j) * xi[static_cast<std::size_t>(j)];
            next[static_cast<std::size_t>(i)] = acc;
        }
        xi = std::move(next);
        if (n >= cfg.burn_in) {
            auto row = coeff.row(n - cfg.burn_in);
            std::copy(xi.begin(), xi.end(), row.begin());
        }
    }
    return {std::move(psi), std::move(coeff)};
}

/// First D Fourier basis functions on [0,1]: 1, sqrt2 sin(2 pi t),
/// sqrt2 cos(2 pi t), sqrt2 sin(4 pi t), ...
inline Matrix fourier_basis(const Grid& grid, int d) {
    Matrix f(grid.size(), d);
    const double sq2 = std::sqrt(2.0);
    for (int s = 0; s < grid.size(); ++s) {
        const double t = grid[s];
        for (int j = 0; j < d; ++j) {
            if (j == 0) {
                f(s, j) = 1.0;
            } else {
                const int k = (j + 1) / 2;
                const double a = 2.0 * M_PI * k * t;
                f(s, j) = (j % 2 == 1) ? sq2 * std::sin(a) : sq2 * std::cos(a);
            }
        }
    }
    return f;
}

}  // namespace detail

/// Sparse FCAR(1) with Brownian innovations on the paper's point set.
inline SimResult gen_sparse(const SimConfig& cfg) {
    if (cfg.family != SimFamily::sparse_log && cfg.family != SimFamily::sparse_sin)
        throw InvalidArgument("gen_sparse: config family is not sparse");
    TrueKernel kernel = cfg.family == SimFamily::sparse_log
                            ? TrueKernel::sparse_log(cfg.t_star)
                            : TrueKernel::sparse_sin(cfg.t_star);
    FunctionalSeries s = detail::gen_sparse_with(
        cfg, [&kernel](int j, double t) { return kernel.alpha(j, t); });
    return {std::move(s), std::move(kernel)};
}

/// Stationary Ornstein-Uhlenbeck segments: one long exactly-discretized
/// path cut into unit intervals, so x_n(1) == x_{n+1}(0) bit for bit.
inline SimResult gen_ou(const SimConfig& cfg) {
    if (cfg.family != SimFamily::ou) throw InvalidArgument("gen_ou: config family is not ou");
    if (!(cfg.theta > 0.0)) throw InvalidArgument("gen_ou: theta must be positive");
    if (cfg.m < 2) throw InvalidArgument("gen_ou: need m >= 2");
    if (cfg.burn_in < 0) throw InvalidArgument("gen_ou: negative burn_in");
    const Grid& grid = cfg.grid;
    const int g = grid.size();
    const double theta = cfg.theta;
    GaussianSampler rng(cfg.seed);

    auto advance = [&](double z, double dt) {
        if (dt <= 0.0) return z;
        const double damp = std::exp(-theta * dt);
        const double sd = std::sqrt((1.0 - std::exp(-2.0 * theta * dt)) / (2.0 * theta));
        return damp * z + sd * rng.normal();
    };

    double z = rng.normal() * std::sqrt(1.0 / (2.0 * theta));  // stationary start at grid[0]
    const double wrap_gap = (1.0 - grid[g - 1]) + grid[0];
    Matrix out(cfg.m, g);
    for (int n = 0; n < cfg.burn_in + cfg.m; ++n) {
        std::vector<double> v(static_cast<std::size_t>(g));
        v[0] = z;
        for (int k = 0; k + 1 < g; ++k) {
            z = advance(z, grid[k + 1] - grid[k]);
            v[static_cast<std::size_t>(k) + 1] = z;
        }
        if (n >= cfg.burn_in) {
            auto row = out.row(n - cfg.burn_in);
            std::copy(v.begin(), v.end(), row.begin());
        }
        z = advance(z, wrap_gap);
    }
    return {FunctionalSeries(grid, std::move(out)), TrueKernel::ou(theta)};
}

/// Functional AR in a Fourier basis: coefficient recursion with a random
/// transition matrix rescaled to the requested spectral radius and
/// linearly decaying innovation variances. No closed-form kernel.
inline SimResult gen_far(const SimConfig& cfg) {
    if (cfg.family != SimFamily::far) throw InvalidArgument("gen_far: config family is not far");
    if (cfg.m < 2) throw InvalidArgument("gen_far: need m >= 2");
    detail::FarPath path = detail::far_coefficient_path(cfg);
    const Matrix basis = detail::fourier_basis(cfg.grid, cfg.basis_dim);
    Matrix out(cfg.m, cfg.grid.size());
    for (int n = 0; n < cfg.m; ++n) {
        auto xi = path.coefficients.row(n);
        auto row = out.row(n);
        for (int s = 0; s < cfg.grid.size(); ++s) {
            double acc = 0.0;
            for (int j = 0; j < cfg.basis_dim; ++j) acc += basis(s, j) * xi[static_cast<std::size_t>(j)];
            row[static_cast<std::size_t>(s)] = acc;
        }
    }
    return {FunctionalSeries(cfg.grid, std::move(out)), std::nullopt};
}

inline SimResult simulate(const SimConfig& cfg) {
    switch (cfg.family) {
        case SimFamily::sparse_log:
        case SimFamily::sparse_sin: return gen_sparse(cfg);
        case SimFamily::ou: return gen_ou(cfg);
        case SimFamily::far: return gen_far(cfg);
    }
    throw InvalidArgument("simulate: unknown family");
}

/// Operator norm of rho^power for the one-step operator
/// f -> sum_k alpha_k(.) f(t_k): composes the coefficient functions
/// through the point set and returns sup_s sum_k |beta_k(s)| on the grid.
inline double operator_norm_rho(const Matrix& alpha, const PointSet& pts, const Grid& grid,
                                int power) {
    if (power < 1) throw InvalidArgument("operator_norm_rho: power must be >= 1");
    const int p = pts.size();
    if (alpha.cols() != p || alpha.rows() != grid.size())
        throw InvalidArgument("operator_norm_rho: alpha must be grid-size x point-count");
    for (int j = 0; j < p; ++j)
        if (pts[j].index < 0 || pts[j].index >= grid.size())
            throw InvalidArgument("operator_norm_rho: point index outside the grid");
    const int g = grid.size();
    Matrix beta(p, g);  // beta_k over the grid
    for (int k = 0; k < p; ++k)
        for (int s = 0; s < g; ++s) beta(k, s) = alpha(s, k);
    for (int n = 2; n <= power; ++n) {
        Matrix next(p, g);
        for (int k = 0; k < p; ++k) {
            for (int j = 0; j < p; ++j) {
                const double b_at_tj = beta(k, pts[j].index);
                if (b_at_tj == 0.0) continue;
                for (int s = 0; s < g; ++s) next(k, s) += alpha(s, j) * b_at_tj;
            }
        }
        beta = std::move(next);
    }
    double norm = 0.0;
    for (int s = 0; s < g; ++s) {
        double acc = 0.0;
        for (int k = 0; k < p; ++k) acc += std::fabs(beta(k, s));
        norm = std::max(norm, acc);
    }
    return norm;
}

}  // namespace fcar
