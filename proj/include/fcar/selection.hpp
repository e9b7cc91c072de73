#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fcar/covariance.hpp"
#include "fcar/errors.hpp"
#include "fcar/grid.hpp"
#include "fcar/linalg.hpp"
#include "fcar/parallel.hpp"
#include "fcar/points.hpp"
#include "fcar/series.hpp"

namespace fcar {

/// Tuning knobs for the greedy search.
///
/// `delta` is the minimum same-lag separation between selected abscissas;
/// zero picks one grid step, i.e. any two distinct grid points qualify.
/// Candidates whose conditional variance falls below `denom_rel_tol`
/// times the largest variance on the diagonal are excluded instead of
/// regularized. Selection also stops once the best available gain drops
/// below `gain_rel_stop` times the criterion value accumulated so far.
struct SelectionOptions {
    int p_max = 10;
    double delta = 0.0;
    double denom_rel_tol = 1e-10;
    double gain_rel_stop = 1e-14;
};

/// Output of the greedy search: candidates in selection order, the
/// criterion increment of each step, and how many candidates each step
/// dropped for a near-zero conditional variance.
struct SelectionTrace {
    std::vector<Candidate> chosen;
    std::vector<double> gains;
    std::vector<int> skipped;

    int size() const { return static_cast<int>(chosen.size()); }
    double total_gain() const {
        double s = 0.0;
        for (double g : gains) s += g;
        return s;
    }
};

/// Adapter giving the greedy machinery a uniform view of sample lagged
/// covariances. The same duck-typed surface is implemented by the exact
/// Brownian-kernel model used for kernel approximation, so one greedy
/// code path serves both.
class SampleCovModel {
public:
    explicit SampleCovModel(const LaggedCovariances& c) : c_(&c) {}

    const Grid& integration_grid() const { return c_->grid(); }
    std::span<const double> candidate_abscissas() const { return c_->grid().points(); }
    int lags() const { return c_->order(); }
    double variance(const Candidate& a) const { return c_->variance_at(a.index); }
    double max_variance() const { return c_->max_variance(); }
    double cov(const Candidate& a, const Candidate& b) const { return c_->candidate_cov(a, b); }
    void cross_column(const Candidate& a, std::span<double> out) const {
        c_->cross_column(a.lag, a.index, out);
    }

private:
    const LaggedCovariances* c_;
};

namespace detail {

template <class Model>
std::vector<Candidate> enumerate_candidates(const Model& m) {
    const auto abscissas = m.candidate_abscissas();
    std::vector<Candidate> cands;
    cands.reserve(abscissas.size() * static_cast<std::size_t>(m.lags()));
    for (int lag = 1; lag <= m.lags(); ++lag)
        for (int i = 0; i < static_cast<int>(abscissas.size()); ++i)
            cands.push_back({lag, i, abscissas[static_cast<std::size_t>(i)]});
    return cands;
}

inline double default_delta(std::span<const double> abscissas) {
    double g = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < abscissas.size(); ++i)
        g = std::min(g, abscissas[i + 1] - abscissas[i]);
    return g;
}

}  // namespace detail

/// Scores every (lag, abscissa) candidate by the one-point criterion,
/// the integral over s of c_lag(s,t)^2 divided by c_0(t,t). Candidates
/// with a near-zero variance score -infinity.
template <class Model>
std::vector<double> initial_scores(const Model& m,
                                   double denom_rel_tol = 1e-10) {
    const auto cands = detail::enumerate_candidates(m);
    const Grid& sgrid = m.integration_grid();
    const double tau = denom_rel_tol * m.max_variance();
    std::vector<double> scores(cands.size(), -std::numeric_limits<double>::infinity());
    parallel::parallel_for(0, static_cast<int>(cands.size()), [&](int ci) {
        const Candidate& c = cands[static_cast<std::size_t>(ci)];
        const double var = m.variance(c);
        if (!(var >= tau) || var <= 0.0) return;
        std::vector<double> col(static_cast<std::size_t>(sgrid.size()));
        m.cross_column(c, col);
        for (double& v : col) v *= v;
        scores[static_cast<std::size_t>(ci)] = trapz(sgrid, col) / var;
    });
    return scores;
}

inline std::vector<double> initial_scores(const LaggedCovariances& c,
                                          double denom_rel_tol = 1e-10) {
    return initial_scores(SampleCovModel(c), denom_rel_tol);
}

/// Direct evaluation of the criterion at a fixed point set via the
/// covariance matrix solve, independent of the greedy recursion.
template <class Model>
double qhat0_direct(const Model& m, std::span<const Candidate> pts) {
    const int p = static_cast<int>(pts.size());
    if (p == 0) return 0.0;
    const Grid& sgrid = m.integration_grid();
    const int g = sgrid.size();
    Matrix sigma(p, p);
    for (int i = 0; i < p; ++i)
        for (int j = 0; j <= i; ++j) {
            const double v = m.cov(pts[static_cast<std::size_t>(i)], pts[static_cast<std::size_t>(j)]);
            sigma(i, j) = v;
            sigma(j, i) = v;
        }
    Matrix cross(g, p);
    std::vector<double> col(static_cast<std::size_t>(g));
    for (int j = 0; j < p; ++j) {
        m.cross_column(pts[static_cast<std::size_t>(j)], col);
        for (int s = 0; s < g; ++s) cross(s, j) = col[static_cast<std::size_t>(s)];
    }
    const SpdSolution sol = solve_spd(sigma, cross.transposed());  // p x g
    std::vector<double> integrand(static_cast<std::size_t>(g), 0.0);
    for (int s = 0; s < g; ++s) {
        double acc = 0.0;
        for (int j = 0; j < p; ++j) acc += cross(s, j) * sol.x(j, s);
        integrand[static_cast<std::size_t>(s)] = acc;
    }
    return trapz(sgrid, integrand);
}

inline double qhat0_direct(const LaggedCovariances& c, const PointSet& pts) {
    return qhat0_direct(SampleCovModel(c), std::span<const Candidate>(pts.candidates()));
}

/// Incremental greedy maximization of the criterion. The first step takes
/// the best one-point score; each later step evaluates the exact criterion
/// increment of every admissible candidate,
///
///   gain(t) = int_s ( c(s,T)' Sigma_T^{-1} v  -  c(s,t) )^2 ds
///             / ( c_0(t,t) - v' Sigma_T^{-1} v ),     v = cov(t, T),
///
/// and adds the argmax. Sigma_T is kept factored in selection order, so
/// its pivots are exactly the denominators already accepted. Ties break
/// toward the smaller lag, then the smaller grid index.
template <class Model>
class GreedySelector {
public:
    struct Step {
        Candidate chosen;
        double gain;
    };

    GreedySelector(const Model& m, SelectionOptions opt) : m_(m), opt_(opt) {
        if (opt_.p_max < 1) throw InvalidArgument("GreedySelector: p_max must be >= 1");
        if (!(m_.max_variance() > 0.0))
            throw SingularMatrix("GreedySelector: series has no variance", m_.max_variance(), -1);
        cands_ = detail::enumerate_candidates(m_);
        if (opt_.delta <= 0.0) opt_.delta = detail::default_delta(m_.candidate_abscissas());
        tau_ = opt_.denom_rel_tol * m_.max_variance();
        g_ = m_.integration_grid().size();
    }

    const SelectionTrace& trace() const { return trace_; }
    const SelectionOptions& options() const { return opt_; }

    /// Performs one step; empty when selection is exhausted or the best
    /// gain is no longer meaningful.
    std::optional<Step> step() {
        if (trace_.size() >= opt_.p_max) return std::nullopt;
        return trace_.chosen.empty() ? first_step() : next_step();
    }

    void run() {
        while (step()) {
        }
    }

private:
    std::optional<Step> first_step() {
        const auto scores = initial_scores(m_, opt_.denom_rel_tol);
        int skipped = 0;
        for (double s : scores)
            if (s == -std::numeric_limits<double>::infinity()) ++skipped;
        int best = -1;
        double best_score = 0.0;
        for (std::size_t i = 0; i < scores.size(); ++i)
            if (scores[i] > best_score) {
                best_score = scores[i];
                best = static_cast<int>(i);
            }
        if (best < 0) return std::nullopt;  // nothing explains any variance
        return accept(cands_[static_cast<std::size_t>(best)], best_score, skipped);
    }

    std::optional<Step> next_step() {
        const int p = trace_.size();
        const double neg_inf = -std::numeric_limits<double>::infinity();
        std::vector<double> scores(cands_.size(), neg_inf);
        std::vector<unsigned char> denom_skip(cands_.size(), 0);
        parallel::parallel_for(0, static_cast<int>(cands_.size()), [&](int ci) {
            const Candidate& c = cands_[static_cast<std::size_t>(ci)];
            if (!admissible(c)) return;
            std::vector<double> v(static_cast<std::size_t>(p));
            for (int k = 0; k < p; ++k) v[static_cast<std::size_t>(k)] = m_.cov(c, trace_.chosen[static_cast<std::size_t>(k)]);
            std::vector<double> w = v;
            chol_solve(w);
            double den = m_.variance(c);
            for (int k = 0; k < p; ++k) den -= v[static_cast<std::size_t>(k)] * w[static_cast<std::size_t>(k)];
            if (!(den >= tau_)) {
                denom_skip[static_cast<std::size_t>(ci)] = 1;
                return;
            }
            std::vector<double> resid(static_cast<std::size_t>(g_));
            m_.cross_column(c, resid);
            for (int s = 0; s < g_; ++s) {
                double acc = -resid[static_cast<std::size_t>(s)];
                const auto arow = a_.row(s);
                for (int k = 0; k < p; ++k) acc += arow[static_cast<std::size_t>(k)] * v[static_cast<std::size_t>(k)];
                resid[static_cast<std::size_t>(s)] = acc * acc;
            }
            scores[static_cast<std::size_t>(ci)] = trapz(m_.integration_grid(), resid) / den;
        });
        int skipped = 0;
        for (unsigned char b : denom_skip) skipped += b;
        int best = -1;
        double best_gain = 0.0;
        for (std::size_t i = 0; i < scores.size(); ++i)
            if (scores[i] > best_gain) {
                best_gain = scores[i];
                best = static_cast<int>(i);
            }
        if (best < 0) return std::nullopt;
        if (best_gain < opt_.gain_rel_stop * trace_.total_gain()) return std::nullopt;
        return accept(cands_[static_cast<std::size_t>(best)], best_gain, skipped);
    }

    bool admissible(const Candidate& c) const {
        for (const Candidate& x : trace_.chosen) {
            if (x == c) return false;
            if (x.lag == c.lag && !PointSet::separated(x.abscissa, c.abscissa, opt_.delta)) return false;
        }
        return true;
    }

    Step accept(const Candidate& c, double gain, int skipped) {
        append_to_factor(c);
        trace_.chosen.push_back(c);
        trace_.gains.push_back(gain);
        trace_.skipped.push_back(skipped);
        refresh_projection();
        return Step{c, gain};
    }

    // Appends one row to the L D L' factors of Sigma_T in selection order;
    // the new pivot equals the accepted denominator.
    void append_to_factor(const Candidate& c) {
        const int p = trace_.size();
        std::vector<double> v(static_cast<std::size_t>(p));
        for (int k = 0; k < p; ++k) v[static_cast<std::size_t>(k)] = m_.cov(c, trace_.chosen[static_cast<std::size_t>(k)]);
        std::vector<double> lrow(static_cast<std::size_t>(p));
        for (int k = 0; k < p; ++k) {
            double s = v[static_cast<std::size_t>(k)];
            for (int j = 0; j < k; ++j)
                s -= lfac_[rowcol(k, j)] * lrow[static_cast<std::size_t>(j)] * dfac_[static_cast<std::size_t>(j)];
            lrow[static_cast<std::size_t>(k)] = s / dfac_[static_cast<std::size_t>(k)];
        }
        double d = m_.variance(c);
        for (int k = 0; k < p; ++k)
            d -= lrow[static_cast<std::size_t>(k)] * lrow[static_cast<std::size_t>(k)] * dfac_[static_cast<std::size_t>(k)];
        for (int k = 0; k < p; ++k) lfac_.push_back(lrow[static_cast<std::size_t>(k)]);
        dfac_.push_back(d);
    }

    std::size_t rowcol(int i, int j) const {
        // packed row-major lower triangle without the unit diagonal
        return static_cast<std::size_t>(i) * (static_cast<std::size_t>(i) - 1) / 2 + static_cast<std::size_t>(j);
    }

    void chol_solve(std::span<double> b) const {
        const int p = static_cast<int>(b.size());
        for (int i = 0; i < p; ++i) {
            double s = b[static_cast<std::size_t>(i)];
            for (int k = 0; k < i; ++k) s -= lfac_[rowcol(i, k)] * b[static_cast<std::size_t>(k)];
            b[static_cast<std::size_t>(i)] = s;
        }
        for (int i = 0; i < p; ++i) b[static_cast<std::size_t>(i)] /= dfac_[static_cast<std::size_t>(i)];
        for (int i = p - 1; i >= 0; --i) {
            double s = b[static_cast<std::size_t>(i)];
            for (int k = i + 1; k < p; ++k) s -= lfac_[rowcol(k, i)] * b[static_cast<std::size_t>(k)];
            b[static_cast<std::size_t>(i)] = s;
        }
    }

    // a_(s, j) = [ c(s,T)' Sigma_T^{-1} ]_j over the integration grid.
    void refresh_projection() {
        const int p = trace_.size();
        a_ = Matrix(g_, p);
        std::vector<double> col(static_cast<std::size_t>(g_));
        Matrix cross(p, g_);  // row j = cross column of chosen j
        for (int j = 0; j < p; ++j) {
            m_.cross_column(trace_.chosen[static_cast<std::size_t>(j)], col);
            for (int s = 0; s < g_; ++s) cross(j, s) = col[static_cast<std::size_t>(s)];
        }
        std::vector<double> rhs(static_cast<std::size_t>(p));
        for (int s = 0; s < g_; ++s) {
            for (int j = 0; j < p; ++j) rhs[static_cast<std::size_t>(j)] = cross(j, s);
            chol_solve(rhs);
            for (int j = 0; j < p; ++j) a_(s, j) = rhs[static_cast<std::size_t>(j)];
        }
    }

    const Model& m_;
    SelectionOptions opt_;
    std::vector<Candidate> cands_;
    SelectionTrace trace_;
    std::vector<double> lfac_;  // packed strict lower triangle of L
    std::vector<double> dfac_;  // pivots
    Matrix a_;
    double tau_ = 0.0;
    int g_ = 0;
};

/// One greedy step on an existing selector; throws once no admissible
/// candidate remains.
template <class Model>
typename GreedySelector<Model>::Step greedy_step(GreedySelector<Model>& sel) {
    auto st = sel.step();
    if (!st) throw SelectionExhausted("greedy_step: no admissible candidate remains");
    return *st;
}

template <class Model>
SelectionTrace select_greedy(const Model& m, const SelectionOptions& opt) {
    GreedySelector<Model> sel(m, opt);
    sel.run();
    if (sel.trace().size() == 0)
        throw SelectionExhausted("select_greedy: no candidate with positive gain");
    return sel.trace();
}

/// Full selection on a centered series: estimates the lagged covariances
/// and runs the greedy search. Deterministic given its inputs.
inline SelectionTrace select_points(const FunctionalSeries& centered, int q, int p_max = 10,
                                    double delta = 0.0) {
    const LaggedCovariances c = estimate_covariances(centered, q);
    SelectionOptions opt;
    opt.p_max = p_max;
    opt.delta = delta;
    return select_greedy(SampleCovModel(c), opt);
}

// ---------------------------------------------------------------------------
// Estimators of the number of points
// ---------------------------------------------------------------------------

struct Kmeans2Result {
    std::vector<int> labels;  // 0 = cluster seeded at the minimum value
    bool split = true;        // false when all values coincide
};

/// One-dimensional two-means with Lloyd iteration, centroids seeded at
/// the minimum and maximum, iterated until the centroids move less than
/// 1e-12.
inline Kmeans2Result kmeans2(std::span<const double> values) {
    if (values.size() < 2) throw InvalidArgument("kmeans2: need at least 2 values");
    double lo = values[0], hi = values[0];
    for (double v : values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    Kmeans2Result r;
    r.labels.assign(values.size(), 0);
    if (lo == hi) {
        r.split = false;
        return r;
    }
    double c0 = lo, c1 = hi;
    for (int it = 0; it < 10000; ++it) {
        double s0 = 0.0, s1 = 0.0;
        int n0 = 0, n1 = 0;
        for (std::size_t i = 0; i < values.size(); ++i) {
            const int lab = std::fabs(values[i] - c0) <= std::fabs(values[i] - c1) ? 0 : 1;
            r.labels[i] = lab;
            if (lab == 0) {
                s0 += values[i];
                ++n0;
            } else {
                s1 += values[i];
                ++n1;
            }
        }
        const double nc0 = n0 > 0 ? s0 / n0 : c0;
        const double nc1 = n1 > 0 ? s1 / n1 : c1;
        const bool done = std::fabs(nc0 - c0) < 1e-12 && std::fabs(nc1 - c1) < 1e-12;
        c0 = nc0;
        c1 = nc1;
        if (done) break;
    }
    return r;
}

/// Clusters the log-gains into two groups and returns the last position
/// still sharing the first gain's cluster. Without a split the whole
/// trace is kept.
inline int estimate_p_kmeans(const SelectionTrace& trace) {
    if (trace.size() == 0) throw InvalidArgument("estimate_p_kmeans: empty trace");
    if (trace.size() == 1) return 1;
    std::vector<double> logs(trace.gains.size());
    for (std::size_t i = 0; i < trace.gains.size(); ++i) {
        if (!(trace.gains[i] > 0.0))
            throw InvalidArgument("estimate_p_kmeans: gains must be positive");
        logs[i] = std::log(trace.gains[i]);
    }
    const Kmeans2Result km = kmeans2(logs);
    if (!km.split) return trace.size();
    const int first = km.labels[0];
    int p = 1;
    for (std::size_t i = 0; i < km.labels.size(); ++i)
        if (km.labels[i] == first) p = static_cast<int>(i) + 1;
    return p;
}

/// Rolling-origin cross-validation for the number of points. The last
/// `folds` curves each serve once as a one-step-ahead validation target
/// for models fitted on the growing head; the mean relative L2 error
/// picks p (ties to the smaller p).
inline int estimate_p_cv(const FunctionalSeries& series, int q, int p_max, int folds = 5,
                         double delta = 0.0) {
    if (folds < 1) throw InvalidArgument("estimate_p_cv: need at least one fold");
    if (p_max < 1) throw InvalidArgument("estimate_p_cv: p_max must be >= 1");
    const int m = series.count();
    if (m - folds < q + 2)
        throw InvalidArgument("estimate_p_cv: series too short for the fold scheme");
    const Grid& grid = series.grid();
    const int g = grid.size();
    std::vector<double> err(static_cast<std::size_t>(p_max) + 1, 0.0);

    for (int f = 0; f < folds; ++f) {
        const int origin = m - folds + f;
        FunctionalSeries head = series.slice(0, origin);
        std::vector<double> mean;
        std::optional<FunctionalSeries> centered_store;
        if (head.centered()) {
            mean = head.mean_curve();
        } else {
            CenterResult cr = center(head);
            mean = std::move(cr.mean_curve);
            centered_store.emplace(std::move(cr.series));
        }
        const FunctionalSeries& chead = centered_store ? *centered_store : head;
        const LaggedCovariances cov = estimate_covariances(chead, q);
        SelectionOptions opt;
        opt.p_max = p_max;
        opt.delta = delta;
        const SelectionTrace trace = select_greedy(SampleCovModel(cov), opt);
        const double delta_eff = opt.delta > 0.0 ? opt.delta : grid.min_gap();

        for (int p = 1; p <= p_max; ++p) {
            const int pe = std::min(p, trace.size());
            std::vector<Candidate> pts(trace.chosen.begin(), trace.chosen.begin() + pe);
            PointSet ps(pts, delta_eff);
            const Matrix sigma = cov.cov_matrix(ps);
            const Matrix cross = cov.cross_cov_matrix(ps);
            const Matrix alpha = solve_spd(sigma, cross.transposed()).x.transposed();  // g x pe
            std::vector<double> diff(static_cast<std::size_t>(g));
            for (int s = 0; s < g; ++s) {
                double acc = mean[static_cast<std::size_t>(s)];
                for (int j = 0; j < pe; ++j) {
                    const Candidate& c = ps[j];
                    const double x = series.curve(origin - c.lag)[static_cast<std::size_t>(c.index)] -
                                     mean[static_cast<std::size_t>(c.index)];
                    acc += alpha(s, j) * x;
                }
                diff[static_cast<std::size_t>(s)] = acc - series.curve(origin)[static_cast<std::size_t>(s)];
            }
            std::vector<double> truth_sq(static_cast<std::size_t>(g));
            for (int s = 0; s < g; ++s) {
                const double v = series.curve(origin)[static_cast<std::size_t>(s)];
                truth_sq[static_cast<std::size_t>(s)] = v * v;
                diff[static_cast<std::size_t>(s)] *= diff[static_cast<std::size_t>(s)];
            }
            const double den = std::sqrt(trapz(grid, truth_sq));
            if (den == 0.0)
                throw DivisionGuard("estimate_p_cv: validation curve " + std::to_string(origin) +
                                        " has zero norm",
                                    origin);
            err[static_cast<std::size_t>(p)] += std::sqrt(trapz(grid, diff)) / den;
        }
    }

    int best = 1;
    for (int p = 2; p <= p_max; ++p)
        if (err[static_cast<std::size_t>(p)] < err[static_cast<std::size_t>(best)]) best = p;
    return best;
}

}  // namespace fcar
