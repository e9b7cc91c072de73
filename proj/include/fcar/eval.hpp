#pragma once

#include <chrono>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fcar/errors.hpp"
#include "fcar/forecast.hpp"
#include "fcar/grid.hpp"
#include "fcar/series.hpp"
#include "fcar/simulate.hpp"

namespace fcar {

/// Evenly spaced train/test windows, the last one ending flush with the
/// series. Overlap between windows is allowed.
struct WindowScheme {
    int train = 0;
    int test = 0;
    std::vector<int> starts;

    int window_size() const { return train + test; }
};

inline WindowScheme make_windows(int m, int n_blocks, int train, int test) {
    if (n_blocks < 1) throw InvalidArgument("make_windows: need at least one block");
    if (train < 1) throw InvalidArgument("make_windows: train size must be >= 1");
    if (test < 1) throw InvalidArgument("make_windows: test size must be >= 1");
    if (train + test > m) throw InvalidArgument("make_windows: window exceeds the series");
    WindowScheme w{train, test, {}};
    const int span = m - (train + test);
    if (n_blocks == 1) {
        w.starts.push_back(span);
        return w;
    }
    for (int i = 0; i < n_blocks; ++i) {
        const double frac = static_cast<double>(i) * span / (n_blocks - 1);
        w.starts.push_back(static_cast<int>(std::llround(frac)));
    }
    return w;
}

enum class Norm { L2, sup };

inline double curve_norm(const Grid& grid, std::span<const double> x, Norm which) {
    if (which == Norm::sup) {
        double m = 0.0;
        for (double v : x) m = std::max(m, std::fabs(v));
        return m;
    }
    std::vector<double> sq(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) sq[i] = x[i] * x[i];
    return std::sqrt(trapz(grid, sq));
}

struct RelErrors {
    double e1 = 0.0;  // mean of per-curve relative errors
    double e2 = 0.0;  // ratio of summed norms
};

/// Both relative test errors under the chosen norm. Truth curves with a
/// zero norm cannot be scored and raise a DivisionGuard naming the curve.
inline RelErrors relative_errors(const Grid& grid, std::span<const std::vector<double>> truths,
                                 std::span<const std::vector<double>> preds, Norm which) {
    if (truths.size() != preds.size() || truths.empty())
        throw InvalidArgument("relative_errors: need equally many truths and predictions");
    double sum_ratio = 0.0, sum_num = 0.0, sum_den = 0.0;
    std::vector<double> diff;
    for (std::size_t i = 0; i < truths.size(); ++i) {
        if (truths[i].size() != preds[i].size())
            throw InvalidArgument("relative_errors: curve length mismatch");
        diff.assign(truths[i].size(), 0.0);
        for (std::size_t k = 0; k < diff.size(); ++k) diff[k] = truths[i][k] - preds[i][k];
        const double num = curve_norm(grid, diff, which);
        const double den = curve_norm(grid, truths[i], which);
        if (den == 0.0)
            throw DivisionGuard("relative_errors: truth curve " + std::to_string(i) +
                                    " has zero norm",
                                static_cast<int>(i));
        sum_ratio += num / den;
        sum_num += num;
        sum_den += den;
    }
    return {sum_ratio / static_cast<double>(truths.size()), sum_num / sum_den};
}

enum class Method { rkhs_kmeans, rkhs_cv, naive, exact };

inline const char* method_name(Method m) {
    switch (m) {
        case Method::rkhs_kmeans: return "rkhs-kmeans";
        case Method::rkhs_cv: return "rkhs-cv";
        case Method::naive: return "naive";
        case Method::exact: return "exact";
    }
    return "?";
}

inline std::optional<Method> parse_method(const std::string& s) {
    if (s == "rkhs-kmeans") return Method::rkhs_kmeans;
    if (s == "rkhs-cv") return Method::rkhs_cv;
    if (s == "naive") return Method::naive;
    if (s == "exact") return Method::exact;
    return std::nullopt;
}

struct MethodReport {
    Method method = Method::naive;
    double e1_l2 = 0.0, e2_l2 = 0.0, e1_sup = 0.0, e2_sup = 0.0;
    double seconds_per_window = 0.0;
};

struct ErrorReport {
    std::vector<MethodReport> rows;

    const MethodReport& row(Method m) const {
        for (const auto& r : rows)
            if (r.method == m) return r;
        throw InvalidArgument("ErrorReport: method not present");
    }
};

/// Window benchmark: per window, fit on the training block and predict
/// each test curve one step ahead from the true preceding curves. Test
/// pairs are pooled over windows before the error metrics are taken;
/// timing covers fit plus all test predictions.
inline ErrorReport benchmark(const FunctionalSeries& series,
                             const std::optional<TrueKernel>& kernel,
                             const std::vector<Method>& methods, const WindowScheme& scheme,
                             const FitOptions& base_opt = {}) {
    for (int start : scheme.starts)
        if (start < 0 || start + scheme.window_size() > series.count())
            throw InvalidArgument("benchmark: window outside the series");
    ErrorReport report;
    for (Method method : methods) {
        if (method == Method::exact && !kernel)
            throw Unsupported("benchmark: the exact baseline needs a generating kernel");
        std::vector<std::vector<double>> truths, preds;
        const auto t0 = std::chrono::steady_clock::now();
        for (int start : scheme.starts) {
            std::optional<FCARModel> model;
            if (method == Method::rkhs_kmeans || method == Method::rkhs_cv) {
                FitOptions opt = base_opt;
                opt.rule = method == Method::rkhs_kmeans ? PRule::kmeans : PRule::cv;
                model = fit(series.slice(start, scheme.train), opt);
            }
            for (int k = 0; k < scheme.test; ++k) {
                const int target = start + scheme.train + k;
                std::vector<double> pred;
                switch (method) {
                    case Method::naive: pred = naive_predict(series.curve(target - 1)); break;
                    case Method::exact:
                        pred = exact_predict(kernel, series.grid(), series.curve(target - 1));
                        break;
                    default: {
                        std::vector<std::span<const double>> recent;
                        for (int l = 1; l <= base_opt.q; ++l) recent.push_back(series.curve(target - l));
                        pred = predict(*model, recent, true);
                    }
                }
                truths.emplace_back(series.curve(target).begin(), series.curve(target).end());
                preds.push_back(std::move(pred));
            }
        }
        const auto t1 = std::chrono::steady_clock::now();
        MethodReport row;
        row.method = method;
        const RelErrors l2 = relative_errors(series.grid(), truths, preds, Norm::L2);
        const RelErrors sup = relative_errors(series.grid(), truths, preds, Norm::sup);
        row.e1_l2 = l2.e1;
        row.e2_l2 = l2.e2;
        row.e1_sup = sup.e1;
        row.e2_sup = sup.e2;
        row.seconds_per_window = std::chrono::duration<double>(t1 - t0).count() /
                                 static_cast<double>(scheme.starts.size());
        report.rows.push_back(row);
    }
    return report;
}

/// Repeats a simulation benchmark over `reps` seeds (base seed, base+1,
/// ...) and averages every metric. Deterministic apart from the timings.
inline ErrorReport benchmark_replicated(SimConfig cfg, int reps, const std::vector<Method>& methods,
                                        int n_blocks, int train, int test,
                                        const FitOptions& opt = {}) {
    if (reps < 1) throw InvalidArgument("benchmark_replicated: need at least one replication");
    ErrorReport total;
    for (int r = 0; r < reps; ++r) {
        cfg.seed = cfg.seed + (r == 0 ? 0 : 1);
        SimResult sim = simulate(cfg);
        const WindowScheme scheme = make_windows(sim.series.count(), n_blocks, train, test);
        ErrorReport rep = benchmark(sim.series, sim.kernel, methods, scheme, opt);
        if (r == 0) {
            total = rep;
        } else {
            for (std::size_t i = 0; i < rep.rows.size(); ++i) {
                total.rows[i].e1_l2 += rep.rows[i].e1_l2;
                total.rows[i].e2_l2 += rep.rows[i].e2_l2;
                total.rows[i].e1_sup += rep.rows[i].e1_sup;
                total.rows[i].e2_sup += rep.rows[i].e2_sup;
                total.rows[i].seconds_per_window += rep.rows[i].seconds_per_window;
            }
        }
    }
    for (auto& row : total.rows) {
        row.e1_l2 /= reps;
        row.e2_l2 /= reps;
        row.e1_sup /= reps;
        row.e2_sup /= reps;
        row.seconds_per_window /= reps;
    }
    return total;
}

}  // namespace fcar
