#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fcar/errors.hpp"
#include "fcar/grid.hpp"
#include "fcar/linalg.hpp"
#include "fcar/matrix.hpp"
#include "fcar/parallel.hpp"
#include "fcar/points.hpp"
#include "fcar/series.hpp"

namespace fcar {

/// Sample lagged covariance surfaces of a centered series,
///
///   c_l(s,t) = 1/(m-l) * sum_{i=1}^{m-l} x_{i+l}(s) x_i(t)   for l >= 1,
///   c_0(s,t) = 1/m     * sum_{i=1}^{m}   x_i(s) x_i(t).
///
/// The first argument always refers to the more recent curve. Surfaces
/// are held densely per lag while the grid is small enough; above the
/// dense limit entries and columns are formed on demand from the data.
class LaggedCovariances {
public:
    static constexpr int kDefaultDenseLimit = 1024;

    LaggedCovariances(const FunctionalSeries& series, int q,
                      int dense_limit = kDefaultDenseLimit)
        : grid_(series.grid()), m_(series.count()), q_(q) {
        if (q < 1) throw InvalidArgument("LaggedCovariances: order must be >= 1");
        if (!series.centered())
            throw InvalidArgument("LaggedCovariances: series must be centered first");
        if (m_ <= q)
            throw InsufficientSample("LaggedCovariances: need more than q curves, got " +
                                     std::to_string(m_) + " for q=" + std::to_string(q));
        const int g = grid_.size();
        if (g <= dense_limit) {
            surfaces_.reserve(static_cast<std::size_t>(q_) + 1);
            for (int lag = 0; lag <= q_; ++lag) surfaces_.push_back(build_surface(series, lag));
        } else {
            data_ = series.values();
        }
        diag0_.assign(static_cast<std::size_t>(g), 0.0);
        for (int t = 0; t < g; ++t) diag0_[static_cast<std::size_t>(t)] = compute_entry(0, t, t);
        max_var_ = 0.0;
        for (double v : diag0_) max_var_ = std::max(max_var_, v);
    }

    const Grid& grid() const { return grid_; }
    int sample_size() const { return m_; }
    int order() const { return q_; }
    bool dense() const { return !surfaces_.empty(); }

    /// c_lag(s,t); `s_idx` indexes the recent curve, `t_idx` the older one.
    double entry(int lag, int s_idx, int t_idx) const {
        check_lag(lag);
        if (dense()) return surfaces_[static_cast<std::size_t>(lag)](t_idx, s_idx);
        return compute_entry(lag, s_idx, t_idx);
    }

    /// Fills `out[s] = c_lag(s, t)` over the whole grid.
    void cross_column(int lag, int t_idx, std::span<double> out) const {
        check_lag(lag);
        const int g = grid_.size();
        if (static_cast<int>(out.size()) != g)
            throw InvalidArgument("cross_column: output length mismatch");
        if (dense()) {
            auto row = surfaces_[static_cast<std::size_t>(lag)].row(t_idx);
            std::copy(row.begin(), row.end(), out.begin());
            return;
        }
        std::fill(out.begin(), out.end(), 0.0);
        const int n = m_ - lag;
        for (int i = 0; i < n; ++i) {
            const double xt = data_(i, t_idx);
            auto recent = data_.row(i + lag);
            for (int s = 0; s < g; ++s) out[static_cast<std::size_t>(s)] += recent[static_cast<std::size_t>(s)] * xt;
        }
        const double inv = 1.0 / n;
        for (double& v : out) v *= inv;
    }

    double variance_at(int t_idx) const { return diag0_[static_cast<std::size_t>(t_idx)]; }
    double max_variance() const { return max_var_; }

    /// Covariance between two stacked-process evaluations. Equal lags use
    /// the lag-0 surface; otherwise the surface at the lag difference with
    /// the more recent candidate in the first slot.
    double candidate_cov(const Candidate& a, const Candidate& b) const {
        if (a.lag < 1 || a.lag > q_ || b.lag < 1 || b.lag > q_)
            throw InvalidArgument("candidate_cov: lag out of range 1..q");
        if (a.lag == b.lag) return entry(0, a.index, b.index);
        if (a.lag < b.lag) return entry(b.lag - a.lag, a.index, b.index);
        return entry(a.lag - b.lag, b.index, a.index);
    }

    /// Symmetric p x p matrix of candidate covariances.
    Matrix cov_matrix(const PointSet& pts) const {
        const int p = pts.size();
        Matrix s(p, p);
        for (int i = 0; i < p; ++i)
            for (int j = 0; j <= i; ++j) {
                const double v = candidate_cov(pts[i], pts[j]);
                s(i, j) = v;
                s(j, i) = v;
            }
        return s;
    }

    /// G x p matrix whose column j is s -> c_{lag_j}(s, t_j).
    Matrix cross_cov_matrix(const PointSet& pts) const {
        const int g = grid_.size();
        const int p = pts.size();
        Matrix x(g, p);
        std::vector<double> col(static_cast<std::size_t>(g));
        for (int j = 0; j < p; ++j) {
            cross_column(pts[j].lag, pts[j].index, col);
            for (int s = 0; s < g; ++s) x(s, j) = col[static_cast<std::size_t>(s)];
        }
        return x;
    }

private:
    void check_lag(int lag) const {
        if (lag < 0 || lag > q_) throw InvalidArgument("lag out of range 0..q");
    }

    Matrix build_surface(const FunctionalSeries& series, int lag) const {
        const int g = grid_.size();
        const int n = m_ - lag;
        Matrix surf(g, g);  // row = older abscissa t, entry (t, s) = c_lag(s, t)
        parallel::parallel_for(0, g, [&](int t) {
            auto out = surf.row(t);
            for (int i = 0; i < n; ++i) {
                const double xt = series.values()(i, t);
                auto recent = series.curve(i + lag);
                for (int s = 0; s < g; ++s) out[static_cast<std::size_t>(s)] += recent[static_cast<std::size_t>(s)] * xt;
            }
            const double inv = 1.0 / n;
            for (double& v : out) v *= inv;
        });
        return surf;
    }

    double compute_entry(int lag, int s_idx, int t_idx) const {
        if (dense()) return surfaces_[static_cast<std::size_t>(lag)](t_idx, s_idx);
        const int n = m_ - lag;
        double acc = 0.0;
        for (int i = 0; i < n; ++i) acc += data_(i + lag, s_idx) * data_(i, t_idx);
        return acc / n;
    }

    Grid grid_;
    int m_;
    int q_;
    std::vector<Matrix> surfaces_;  // dense path, index = lag
    Matrix data_;                   // lazy path keeps the centered values
    std::vector<double> diag0_;
    double max_var_ = 0.0;
};

inline LaggedCovariances estimate_covariances(const FunctionalSeries& centered, int q,
                                              int dense_limit = LaggedCovariances::kDefaultDenseLimit) {
    return LaggedCovariances(centered, q, dense_limit);
}

}  // namespace fcar
