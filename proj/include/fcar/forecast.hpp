#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fcar/covariance.hpp"
#include "fcar/errors.hpp"
#include "fcar/selection.hpp"
#include "fcar/series.hpp"
#include "fcar/simulate.hpp"

namespace fcar {

enum class PRule { kmeans, cv, fixed };

inline const char* p_rule_name(PRule r) {
    switch (r) {
        case PRule::kmeans: return "kmeans";
        case PRule::cv: return "cv";
        case PRule::fixed: return "fixed";
    }
    return "?";
}

struct FitOptions {
    int q = 1;
    int p_max = 10;
    PRule rule = PRule::kmeans;
    int fixed_p = 0;   // used when rule == fixed
    double delta = 0;  // 0 picks one grid step
    bool center = true;
    int cv_folds = 5;
};

/// A fitted predictor: the selected points, the coefficient functions on
/// the grid (column j = alpha_j), the training mean curve and the raw
/// selection trace the order estimate was read from.
struct FCARModel {
    Grid grid;
    int q = 1;
    PointSet points;
    Matrix alpha;  // grid-size x p_hat
    std::vector<double> mean_curve;
    int p_hat = 0;
    PRule p_rule = PRule::kmeans;
    SelectionTrace trace;

    FCARModel() : grid(make_uniform_grid(2)) {}
};

/// Fits the predictor: centers the series, estimates lagged covariances,
/// selects points greedily, truncates to the estimated number of points
/// and computes the coefficient functions.
inline FCARModel fit(const FunctionalSeries& raw, const FitOptions& opt = {}) {
    if (opt.q < 1) throw InvalidArgument("fit: order must be >= 1");
    if (raw.count() <= opt.q + 1)
        throw InsufficientSample("fit: need more than q+1 curves");

    std::vector<double> mean;
    std::optional<FunctionalSeries> centered_store;
    if (raw.centered()) {
        mean = raw.mean_curve();
    } else if (opt.center) {
        CenterResult cr = center(raw);
        mean = std::move(cr.mean_curve);
        centered_store.emplace(std::move(cr.series));
    } else {
        mean.assign(static_cast<std::size_t>(raw.grid_size()), 0.0);
        centered_store.emplace(
            FunctionalSeries::already_centered(raw.grid(), raw.values(), mean));
    }
    const FunctionalSeries& centered = centered_store ? *centered_store : raw;

    const LaggedCovariances cov = estimate_covariances(centered, opt.q);
    SelectionOptions sopt;
    sopt.p_max = opt.p_max;
    sopt.delta = opt.delta;
    const SelectionTrace trace = select_greedy(SampleCovModel(cov), sopt);

    int p_hat = trace.size();
    switch (opt.rule) {
        case PRule::kmeans: p_hat = estimate_p_kmeans(trace); break;
        case PRule::cv:
            p_hat = std::min(estimate_p_cv(raw, opt.q, opt.p_max, opt.cv_folds, opt.delta),
                             trace.size());
            break;
        case PRule::fixed:
            if (opt.fixed_p < 1 || opt.fixed_p > trace.size())
                throw InvalidArgument("fit: fixed p " + std::to_string(opt.fixed_p) +
                                      " exceeds the selection trace of length " +
                                      std::to_string(trace.size()));
            p_hat = opt.fixed_p;
            break;
    }

    const double delta_eff = sopt.delta > 0.0 ? sopt.delta : raw.grid().min_gap();
    std::vector<Candidate> kept(trace.chosen.begin(), trace.chosen.begin() + p_hat);
    FCARModel model;
    model.grid = raw.grid();
    model.q = opt.q;
    model.points = PointSet(std::move(kept), delta_eff);
    model.mean_curve = std::move(mean);
    model.p_hat = p_hat;
    model.p_rule = opt.rule;
    model.trace = trace;

    const Matrix sigma = cov.cov_matrix(model.points);
    const Matrix cross = cov.cross_cov_matrix(model.points);
    model.alpha = solve_spd(sigma, cross.transposed()).x.transposed();
    return model;
}

/// One-step forecast from the last q curves, most recent first. The
/// curves are raw readings; the training mean is removed at the selected
/// points internally and added back unless `uncenter` is off.
inline std::vector<double> predict(const FCARModel& model,
                                   std::span<const std::span<const double>> recent,
                                   bool uncenter = true) {
    if (static_cast<int>(recent.size()) < model.q)
        throw InvalidArgument("predict: need the last q curves");
    const int g = model.grid.size();
    for (int l = 0; l < model.q; ++l)
        if (static_cast<int>(recent[static_cast<std::size_t>(l)].size()) != g)
            throw InvalidArgument("predict: curve length does not match the model grid");
    std::vector<double> loads(static_cast<std::size_t>(model.points.size()));
    for (int j = 0; j < model.points.size(); ++j) {
        const Candidate& c = model.points[j];
        const auto& curve = recent[static_cast<std::size_t>(c.lag - 1)];
        loads[static_cast<std::size_t>(j)] = curve[static_cast<std::size_t>(c.index)] -
                                             model.mean_curve[static_cast<std::size_t>(c.index)];
    }
    std::vector<double> out(static_cast<std::size_t>(g), 0.0);
    for (int s = 0; s < g; ++s) {
        double acc = 0.0;
        const auto arow = model.alpha.row(s);
        for (int j = 0; j < model.points.size(); ++j) acc += arow[static_cast<std::size_t>(j)] * loads[static_cast<std::size_t>(j)];
        out[static_cast<std::size_t>(s)] = acc;
    }
    if (uncenter)
        for (int s = 0; s < g; ++s) out[static_cast<std::size_t>(s)] += model.mean_curve[static_cast<std::size_t>(s)];
    return out;
}

inline std::vector<double> predict(const FCARModel& model, const FunctionalSeries& history,
                                   bool uncenter = true) {
    if (history.count() < model.q) throw InvalidArgument("predict: history shorter than q");
    if (!(history.grid() == model.grid))
        throw InvalidArgument("predict: history grid does not match the model grid");
    std::vector<std::span<const double>> recent;
    recent.reserve(static_cast<std::size_t>(model.q));
    for (int l = 1; l <= model.q; ++l) recent.push_back(history.curve(history.count() - l));
    return predict(model, recent, uncenter);
}

/// The previous curve, unchanged.
inline std::vector<double> naive_predict(std::span<const double> prev) {
    return {prev.begin(), prev.end()};
}

/// Applies the true generating operator; only simulations can supply one.
inline std::vector<double> exact_predict(const std::optional<TrueKernel>& kernel,
                                         const Grid& grid, std::span<const double> x_prev) {
    if (!kernel)
        throw Unsupported("exact_predict: no generating kernel is available for this data");
    return kernel->apply(grid, x_prev);
}

}  // namespace fcar
