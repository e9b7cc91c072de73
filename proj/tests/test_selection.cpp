#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "fcar/covariance.hpp"
#include "fcar/rng.hpp"
#include "fcar/selection.hpp"
#include "fcar/simulate.hpp"

using namespace fcar;

namespace {

FunctionalSeries random_centered_series(int m, int g, std::uint64_t seed) {
    GaussianSampler rng(seed);
    Matrix vals(m, g);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < g; ++j) vals(i, j) = rng.normal();
    CenterResult r = center(FunctionalSeries(make_uniform_grid(g), std::move(vals)));
    return std::move(r.series);
}

}  // namespace

TEST_CASE("initial scores on degenerate data", "[selection]") {
    const Grid g = make_uniform_grid(5);
    // constant curves with zero lag-1 autocorrelation: scores all vanish
    Matrix vals(3, 5);
    const double levels[3] = {-1.0, 0.0, 1.0};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 5; ++j) vals(i, j) = levels[i];
    FunctionalSeries s = FunctionalSeries::already_centered(g, std::move(vals));
    const LaggedCovariances c = estimate_covariances(s, 1);
    for (double sc : initial_scores(c)) REQUIRE(std::fabs(sc) <= 1e-14);
}

TEST_CASE("prefix identity: cumulative gains equal the direct criterion", "[selection]") {
    for (int q = 1; q <= 2; ++q) {
        for (int trial = 0; trial < 10; ++trial) {
            FunctionalSeries s = random_centered_series(50, 51, 100 * static_cast<std::uint64_t>(q) + static_cast<std::uint64_t>(trial));
            const LaggedCovariances c = estimate_covariances(s, q);
            SelectionOptions opt;
            opt.p_max = 8;
            const SelectionTrace trace = select_greedy(SampleCovModel(c), opt);
            REQUIRE(trace.size() >= 1);
            REQUIRE(trace.gains.size() == trace.chosen.size());
            double cum = 0.0;
            for (int k = 0; k < trace.size(); ++k) {
                REQUIRE(trace.gains[static_cast<std::size_t>(k)] > 0.0);
                cum += trace.gains[static_cast<std::size_t>(k)];
                const double direct = qhat0_direct(
                    SampleCovModel(c),
                    std::span<const Candidate>(trace.chosen.data(), static_cast<std::size_t>(k) + 1));
                REQUIRE(std::fabs(cum - direct) <= 1e-8 * std::fabs(direct));
            }
        }
    }
}

TEST_CASE("single-point criterion equals the initial score", "[selection]") {
    FunctionalSeries s = random_centered_series(40, 21, 7);
    const LaggedCovariances c = estimate_covariances(s, 1);
    const std::vector<double> scores = initial_scores(c);
    for (int t = 0; t < 21; t += 5) {
        const Candidate cand{1, t, s.grid()[t]};
        const double direct = qhat0_direct(SampleCovModel(c), std::span<const Candidate>(&cand, 1));
        REQUIRE(direct == Catch::Approx(scores[static_cast<std::size_t>(t)]).epsilon(1e-10));
    }
}

TEST_CASE("direct criterion vanishes without cross covariance", "[selection]") {
    const Grid g = make_uniform_grid(5);
    GaussianSampler rng(3);
    // white noise in n: lag-1 covariances are near zero but variances are not
    Matrix vals(400, 5);
    for (int i = 0; i < 400; ++i) {
        const double z = rng.normal();
        for (int j = 0; j < 5; ++j) vals(i, j) = z;
    }
    CenterResult cr = center(FunctionalSeries(g, std::move(vals)));
    const LaggedCovariances c = estimate_covariances(cr.series, 1);
    PointSet pts({{1, 2, g[2]}}, g.min_gap());
    REQUIRE(std::fabs(qhat0_direct(c, pts)) <= 0.05);
}

TEST_CASE("duplicated grid column is skipped after its twin is chosen", "[selection]") {
    FunctionalSeries base = random_centered_series(60, 8, 21);
    // duplicate column 3 into column 4
    Matrix vals = base.values();
    for (int i = 0; i < 60; ++i) vals(i, 4) = vals(i, 3);
    FunctionalSeries s = FunctionalSeries::already_centered(base.grid(), std::move(vals));
    const LaggedCovariances c = estimate_covariances(s, 1);
    SelectionOptions opt;
    opt.p_max = 8;
    const SelectionTrace trace = select_greedy(SampleCovModel(c), opt);
    int dup_count = 0;
    int total_skipped = 0;
    for (const Candidate& cand : trace.chosen)
        if (cand.index == 3 || cand.index == 4) ++dup_count;
    for (int k : trace.skipped) total_skipped += k;
    REQUIRE(dup_count <= 1);      // the twin is never added
    REQUIRE(total_skipped >= 1);  // and shows up in the skip counts
}

TEST_CASE("p_max=1 returns the argmax of the initial scores", "[selection]") {
    FunctionalSeries s = random_centered_series(45, 17, 13);
    const LaggedCovariances c = estimate_covariances(s, 1);
    const SelectionTrace trace = select_points(s, 1, 1);
    REQUIRE(trace.size() == 1);
    const std::vector<double> scores = initial_scores(c);
    const std::size_t best =
        static_cast<std::size_t>(std::max_element(scores.begin(), scores.end()) - scores.begin());
    REQUIRE(trace.chosen[0].index == static_cast<int>(best));
    REQUIRE(trace.gains[0] == Catch::Approx(scores[best]));
}

TEST_CASE("selection is deterministic", "[selection]") {
    FunctionalSeries s = random_centered_series(50, 31, 2);
    const SelectionTrace a = select_points(s, 2, 6);
    const SelectionTrace b = select_points(s, 2, 6);
    REQUIRE(a.size() == b.size());
    for (int k = 0; k < a.size(); ++k) {
        REQUIRE(a.chosen[static_cast<std::size_t>(k)] == b.chosen[static_cast<std::size_t>(k)]);
        REQUIRE(a.gains[static_cast<std::size_t>(k)] == b.gains[static_cast<std::size_t>(k)]);
    }
}

TEST_CASE("scaling the curves scales the gains and keeps the selection", "[selection]") {
    FunctionalSeries s = random_centered_series(40, 25, 8);
    const SelectionTrace base = select_points(s, 1, 6);

    // powers of two scale exactly
    Matrix twice = s.values();
    for (double& v : twice.flat()) v *= 2.0;
    const SelectionTrace t2 =
        select_points(FunctionalSeries::already_centered(s.grid(), std::move(twice)), 1, 6);
    REQUIRE(t2.size() == base.size());
    for (int k = 0; k < base.size(); ++k) {
        REQUIRE(t2.chosen[static_cast<std::size_t>(k)] == base.chosen[static_cast<std::size_t>(k)]);
        REQUIRE(t2.gains[static_cast<std::size_t>(k)] == 4.0 * base.gains[static_cast<std::size_t>(k)]);
    }

    Matrix neg3 = s.values();
    for (double& v : neg3.flat()) v *= -3.0;
    const SelectionTrace t3 =
        select_points(FunctionalSeries::already_centered(s.grid(), std::move(neg3)), 1, 6);
    REQUIRE(t3.size() == base.size());
    for (int k = 0; k < base.size(); ++k) {
        REQUIRE(t3.chosen[static_cast<std::size_t>(k)] == base.chosen[static_cast<std::size_t>(k)]);
        REQUIRE(t3.gains[static_cast<std::size_t>(k)] ==
                Catch::Approx(9.0 * base.gains[static_cast<std::size_t>(k)]).epsilon(1e-9));
    }
}

TEST_CASE("selection requires variance", "[selection]") {
    const Grid g = make_uniform_grid(4);
    FunctionalSeries zeros = FunctionalSeries::already_centered(g, Matrix(6, 4));
    REQUIRE_THROWS_AS(select_points(zeros, 1, 3), SingularMatrix);
}

TEST_CASE("stepping past exhaustion throws", "[selection]") {
    // rank-one data: after the first point every remaining candidate is
    // perfectly explained and gets skipped
    const Grid g = make_uniform_grid(9);
    GaussianSampler rng(44);
    Matrix vals(30, 9);
    for (int i = 0; i < 30; ++i) {
        const double z = rng.normal();
        for (int j = 0; j < 9; ++j) vals(i, j) = z * (1.0 + g[j]);
    }
    CenterResult cr = center(FunctionalSeries(g, std::move(vals)));
    const LaggedCovariances c = estimate_covariances(cr.series, 1);
    SelectionOptions opt;
    opt.p_max = 5;
    SampleCovModel model(c);
    GreedySelector<SampleCovModel> sel(model, opt);
    REQUIRE_NOTHROW(greedy_step(sel));
    REQUIRE_THROWS_AS(greedy_step(sel), SelectionExhausted);
    REQUIRE(sel.trace().size() == 1);
}

TEST_CASE("kmeans2 hand cases", "[selection]") {
    {
        const std::vector<double> v{0.0, 1.0, 10.0, 11.0};
        const Kmeans2Result r = kmeans2(v);
        REQUIRE(r.split);
        REQUIRE(r.labels == std::vector<int>{0, 0, 1, 1});
    }
    {
        const std::vector<double> v{0.0, -10.0};
        const Kmeans2Result r = kmeans2(v);
        REQUIRE(r.split);
        REQUIRE(r.labels[0] != r.labels[1]);
    }
    {
        const std::vector<double> v{5.0, 5.0, 5.0, 5.0};
        const Kmeans2Result r = kmeans2(v);
        REQUIRE_FALSE(r.split);
    }
    REQUIRE_THROWS_AS(kmeans2(std::vector<double>{1.0}), InvalidArgument);
}

TEST_CASE("kmeans order estimate hand cases", "[selection]") {
    auto trace_from_logs = [](const std::vector<double>& logs) {
        SelectionTrace t;
        for (std::size_t i = 0; i < logs.size(); ++i) {
            t.chosen.push_back({1, static_cast<int>(i), 0.1 * static_cast<double>(i)});
            t.gains.push_back(std::exp(logs[i]));
            t.skipped.push_back(0);
        }
        return t;
    };
    REQUIRE(estimate_p_kmeans(trace_from_logs({0.0, -0.1, -0.2, -8.0, -9.0, -10.0})) == 3);
    REQUIRE(estimate_p_kmeans(trace_from_logs({0.0, -10.0})) == 1);
    // gentle decay with no gap collapses to a single cluster only when all
    // values coincide; equal gains hit the fallback rule
    REQUIRE(estimate_p_kmeans(trace_from_logs({-1.0, -1.0, -1.0, -1.0})) == 4);
    SelectionTrace empty;
    REQUIRE_THROWS_AS(estimate_p_kmeans(empty), InvalidArgument);
}

TEST_CASE("cross-validation picks one point for a noiseless rank-one process", "[selection]") {
    const Grid g = make_uniform_grid(21);
    const int t1 = 10;  // abscissa 0.5
    auto alpha = [](double s) { return 0.9 - 0.3 * s; };  // alpha(0.5) = 0.75
    const int m = 25;
    Matrix vals(m, 21);
    double beta = 1.0;
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < 21; ++j) vals(i, j) = beta * alpha(g[j]);
        beta *= alpha(g[t1]);
    }
    FunctionalSeries s(g, std::move(vals));
    REQUIRE(estimate_p_cv(s, 1, 5, 5) == 1);
    REQUIRE(estimate_p_cv(s, 1, 1, 5) == 1);  // p_max=1 never fits beyond p=1
}

TEST_CASE("cross-validation input validation", "[selection]") {
    FunctionalSeries s = random_centered_series(6, 5, 1);
    REQUIRE_THROWS_AS(estimate_p_cv(s, 1, 3, 5), InvalidArgument);
    REQUIRE_THROWS_AS(estimate_p_cv(s, 1, 0, 2), InvalidArgument);
}

TEST_CASE("OU selects the right endpoint first (median over seeds)", "[selection][slow]") {
    std::vector<double> firsts;
    for (int seed = 0; seed < 20; ++seed) {
        SimConfig cfg;
        cfg.family = SimFamily::ou;
        cfg.theta = 1.0;
        cfg.m = 500;
        cfg.burn_in = 0;
        cfg.grid = make_uniform_grid(101);
        cfg.seed = 400 + static_cast<std::uint64_t>(seed);
        CenterResult cr = center(gen_ou(cfg).series);
        const SelectionTrace trace = select_points(cr.series, 1, 1);
        firsts.push_back(trace.chosen[0].abscissa);
    }
    std::sort(firsts.begin(), firsts.end());
    REQUIRE(firsts[10] == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("cross-validation is deterministic and in range", "[selection][slow]") {
    // With noisy data the validation curve across p is nearly flat (the
    // innovation error dominates), so the argmin is data-driven rather
    // than pinned at the generating order; here we check the stable
    // contract: determinism and the admissible range.
    for (int seed = 0; seed < 5; ++seed) {
        SimConfig cfg;
        cfg.family = SimFamily::ou;
        cfg.theta = 1.0;
        cfg.m = 200;
        cfg.burn_in = 0;
        cfg.grid = make_uniform_grid(51);
        cfg.seed = 700 + static_cast<std::uint64_t>(seed);
        const SimResult sim = gen_ou(cfg);
        const int a = estimate_p_cv(sim.series, 1, 10, 5);
        const int b = estimate_p_cv(sim.series, 1, 10, 5);
        REQUIRE(a == b);
        REQUIRE(a >= 1);
        REQUIRE(a <= 10);
    }
}
