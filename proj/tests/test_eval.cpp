#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "fcar/eval.hpp"
#include "fcar/rng.hpp"

using namespace fcar;

TEST_CASE("window schemes", "[eval]") {
    const WindowScheme one = make_windows(115, 1, 100, 15);
    REQUIRE(one.starts == std::vector<int>{0});

    const WindowScheme five = make_windows(42, 5, 32, 2);
    REQUIRE(five.starts == std::vector<int>{0, 2, 4, 6, 8});
    REQUIRE(five.starts.back() + five.window_size() == 42);

    REQUIRE_THROWS_AS(make_windows(42, 5, 32, 0), InvalidArgument);
    REQUIRE_THROWS_AS(make_windows(10, 1, 20, 5), InvalidArgument);
    REQUIRE_THROWS_AS(make_windows(10, 0, 5, 2), InvalidArgument);
}

TEST_CASE("curve norms", "[eval]") {
    const Grid g = make_uniform_grid(101);
    std::vector<double> ones(101, 1.0);
    REQUIRE(curve_norm(g, ones, Norm::L2) == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(curve_norm(g, ones, Norm::sup) == 1.0);

    std::vector<double> lin(101);
    for (int i = 0; i < 101; ++i) lin[static_cast<std::size_t>(i)] = g[i];
    REQUIRE(curve_norm(g, lin, Norm::L2) == Catch::Approx(1.0 / std::sqrt(3.0)).margin(1e-4));
    REQUIRE(curve_norm(g, lin, Norm::sup) == 1.0);

    std::vector<double> zero(101, 0.0);
    REQUIRE(curve_norm(g, zero, Norm::L2) == 0.0);
    REQUIRE(curve_norm(g, zero, Norm::sup) == 0.0);
}

TEST_CASE("relative errors by hand", "[eval]") {
    const Grid g = make_uniform_grid(5);  // quarter gaps are binary-exact
    std::vector<std::vector<double>> truths{std::vector<double>(5, 1.0),
                                            std::vector<double>(5, 3.0)};
    std::vector<std::vector<double>> preds{std::vector<double>(5, 1.1),
                                           std::vector<double>(5, 3.1)};

    const RelErrors perfect = relative_errors(g, truths, truths, Norm::L2);
    REQUIRE(perfect.e1 == 0.0);
    REQUIRE(perfect.e2 == 0.0);

    for (Norm norm : {Norm::L2, Norm::sup}) {
        const RelErrors r = relative_errors(g, truths, preds, norm);
        REQUIRE(std::fabs(r.e1 - 0.2 / 3.0) <= 1e-12);
        REQUIRE(std::fabs(r.e2 - 0.05) <= 1e-12);
    }

    std::vector<std::vector<double>> twice{std::vector<double>(5, 2.0),
                                           std::vector<double>(5, 6.0)};
    const RelErrors doubled = relative_errors(g, truths, twice, Norm::L2);
    REQUIRE(doubled.e1 == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(doubled.e2 == Catch::Approx(1.0).margin(1e-12));

    std::vector<std::vector<double>> with_zero{std::vector<double>(5, 1.0),
                                               std::vector<double>(5, 0.0)};
    try {
        relative_errors(g, with_zero, preds, Norm::L2);
        FAIL("expected DivisionGuard");
    } catch (const DivisionGuard& e) {
        REQUIRE(e.curve_index == 1);
    }
}

TEST_CASE("e2 is scale invariant and errors ignore grid labels", "[eval]") {
    const Grid g = make_uniform_grid(21);
    GaussianSampler rng(2);
    std::vector<std::vector<double>> truths, preds, truths3, preds3;
    for (int i = 0; i < 6; ++i) {
        std::vector<double> t(21), p(21);
        for (int k = 0; k < 21; ++k) {
            t[static_cast<std::size_t>(k)] = 1.0 + rng.normal();
            p[static_cast<std::size_t>(k)] = t[static_cast<std::size_t>(k)] + 0.3 * rng.normal();
        }
        truths.push_back(t);
        preds.push_back(p);
        for (double& v : t) v *= 3.0;
        for (double& v : p) v *= 3.0;
        truths3.push_back(t);
        preds3.push_back(p);
    }
    const RelErrors base = relative_errors(g, truths, preds, Norm::L2);
    const RelErrors scaled = relative_errors(g, truths3, preds3, Norm::L2);
    REQUIRE(scaled.e2 == Catch::Approx(base.e2).margin(1e-12));
    REQUIRE(scaled.e1 == Catch::Approx(base.e1).margin(1e-12));

    // reversing the (uniform) grid labels reverses nothing metric-wise
    std::vector<std::vector<double>> truths_r = truths, preds_r = preds;
    for (auto& c : truths_r) std::reverse(c.begin(), c.end());
    for (auto& c : preds_r) std::reverse(c.begin(), c.end());
    const RelErrors rev = relative_errors(g, truths_r, preds_r, Norm::L2);
    REQUIRE(rev.e1 == Catch::Approx(base.e1).margin(1e-12));
    REQUIRE(rev.e2 == Catch::Approx(base.e2).margin(1e-12));
}

TEST_CASE("naive benchmark on a period-repeating series is exact", "[eval]") {
    const Grid g = make_uniform_grid(11);
    Matrix vals(30, 11);
    for (int i = 0; i < 30; ++i)
        for (int j = 0; j < 11; ++j) vals(i, j) = 2.0 + std::sin(2.0 * M_PI * g[j]);
    FunctionalSeries s(g, std::move(vals));
    const WindowScheme scheme = make_windows(30, 2, 20, 4);
    const ErrorReport rep = benchmark(s, std::nullopt, {Method::naive}, scheme);
    REQUIRE(rep.row(Method::naive).e1_l2 == 0.0);
    REQUIRE(rep.row(Method::naive).e2_sup == 0.0);
}

TEST_CASE("benchmark needs a kernel for the exact baseline", "[eval]") {
    const Grid g = make_uniform_grid(11);
    GaussianSampler rng(6);
    Matrix vals(30, 11);
    for (double& v : vals.flat()) v = rng.normal();
    FunctionalSeries s(g, std::move(vals));
    const WindowScheme scheme = make_windows(30, 1, 25, 5);
    REQUIRE_THROWS_AS(benchmark(s, std::nullopt, {Method::exact}, scheme), Unsupported);
}

TEST_CASE("benchmark is deterministic apart from timing", "[eval]") {
    SimConfig cfg;
    cfg.family = SimFamily::sparse_log;
    cfg.m = 60;
    cfg.grid = make_uniform_grid(31);
    cfg.seed = 5;
    const SimResult sim = gen_sparse(cfg);
    const WindowScheme scheme = make_windows(60, 2, 40, 5);
    const ErrorReport a =
        benchmark(sim.series, sim.kernel, {Method::rkhs_kmeans, Method::naive}, scheme);
    const ErrorReport b =
        benchmark(sim.series, sim.kernel, {Method::rkhs_kmeans, Method::naive}, scheme);
    REQUIRE(a.row(Method::rkhs_kmeans).e1_l2 == b.row(Method::rkhs_kmeans).e1_l2);
    REQUIRE(a.row(Method::naive).e2_sup == b.row(Method::naive).e2_sup);
}

TEST_CASE("error sandwich on sparse-log replications", "[eval][slow]") {
    SimConfig cfg;
    cfg.family = SimFamily::sparse_log;
    cfg.m = 115;
    cfg.grid = make_uniform_grid(101);
    cfg.seed = 3000;
    const ErrorReport rep = benchmark_replicated(
        cfg, 20, {Method::exact, Method::rkhs_kmeans, Method::naive}, 1, 100, 15);
    const double e_exact = rep.row(Method::exact).e1_l2;
    const double e_rkhs = rep.row(Method::rkhs_kmeans).e1_l2;
    const double e_naive = rep.row(Method::naive).e1_l2;
    REQUIRE(e_exact <= e_rkhs);
    REQUIRE(e_rkhs <= e_naive);
}

TEST_CASE("OU sup-norm error beats naive", "[eval][slow]") {
    SimConfig cfg;
    cfg.family = SimFamily::ou;
    cfg.theta = 1.0;
    cfg.m = 115;
    cfg.burn_in = 0;
    cfg.grid = make_uniform_grid(101);
    cfg.seed = 4000;
    const ErrorReport rep =
        benchmark_replicated(cfg, 10, {Method::rkhs_kmeans, Method::naive}, 1, 100, 15);
    REQUIRE(rep.row(Method::rkhs_kmeans).e1_sup <= rep.row(Method::naive).e1_sup);
}
