#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "fcar/grid.hpp"
#include "fcar/rng.hpp"
#include "fcar/series.hpp"

using namespace fcar;

TEST_CASE("uniform grid endpoints and spacing", "[core]") {
    const Grid g2 = make_uniform_grid(2);
    REQUIRE(g2.points() == std::vector<double>{0.0, 1.0});

    const Grid g3 = make_uniform_grid(3);
    REQUIRE(g3.points() == std::vector<double>{0.0, 0.5, 1.0});

    const Grid g101 = make_uniform_grid(101);
    REQUIRE(g101.size() == 101);
    for (int i = 0; i + 1 < 101; ++i)
        REQUIRE(g101[i + 1] - g101[i] == Catch::Approx(0.01).margin(1e-15));

    REQUIRE_THROWS_AS(make_uniform_grid(1), InvalidArgument);
}

TEST_CASE("grid validation", "[core]") {
    REQUIRE_THROWS_AS(Grid({0.5}), InvalidArgument);
    REQUIRE_THROWS_AS(Grid({0.3, 0.3}), InvalidArgument);
    REQUIRE_THROWS_AS(Grid({0.5, 0.2}), InvalidArgument);
    REQUIRE_THROWS_AS(Grid({-0.1, 0.5}), InvalidArgument);
    REQUIRE_THROWS_AS(Grid({0.1, 1.5}), InvalidArgument);
    const Grid g({0.1, 0.4, 0.45, 1.0});
    REQUIRE(g.min_gap() == Catch::Approx(0.05));
    REQUIRE(g.index_of(0.45) == 2);
    REQUIRE(g.index_of(0.44) == -1);
}

TEST_CASE("trapz basic values", "[core]") {
    const Grid g = make_uniform_grid(101);
    std::vector<double> ones(101, 1.0);
    REQUIRE(trapz(g, ones) == Catch::Approx(1.0).margin(1e-12));

    std::vector<double> lin(101);
    for (int i = 0; i < 101; ++i) lin[i] = g[i];
    REQUIRE(trapz(g, lin) == Catch::Approx(0.5).margin(1e-12));

    // quadratic: composite trapezoid error is h^2 (b-a) f''/12 = 1e-4*2/12
    std::vector<double> sq(101);
    for (int i = 0; i < 101; ++i) sq[i] = g[i] * g[i];
    REQUIRE(trapz(g, sq) == Catch::Approx(0.3333500).margin(1e-7));

    REQUIRE_THROWS_AS(trapz(g, std::vector<double>(100, 1.0)), InvalidArgument);
}

TEST_CASE("trapz is linear and exact on piecewise linear data", "[core]") {
    GaussianSampler rng(11);
    std::vector<double> pts{0.0, 0.05, 0.2, 0.45, 0.8, 1.0};
    const Grid g(pts);
    std::vector<double> f(pts.size()), h(pts.size());
    for (auto& v : f) v = rng.normal();
    for (auto& v : h) v = rng.normal();
    const double a = 1.7, b = -0.4;
    std::vector<double> mix(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) mix[i] = a * f[i] + b * h[i];
    REQUIRE(trapz(g, mix) == Catch::Approx(a * trapz(g, f) + b * trapz(g, h)).margin(1e-12));

    // hat with its kink on a grid point integrates exactly
    std::vector<double> hat(pts.size(), 0.0);
    hat[2] = 1.0;  // kink at 0.2: area = (0.2-0.05)/2 + (0.45-0.2)/2
    REQUIRE(trapz(g, hat) == Catch::Approx((0.15 + 0.25) / 2).margin(1e-15));
}

TEST_CASE("center removes the mean curve", "[core]") {
    const Grid g = make_uniform_grid(3);

    Matrix two(2, 3);
    for (int j = 0; j < 3; ++j) {
        two(0, j) = 0.0;
        two(1, j) = 2.0;
    }
    const CenterResult r = center(FunctionalSeries(g, two));
    for (int j = 0; j < 3; ++j) {
        REQUIRE(r.mean_curve[static_cast<std::size_t>(j)] == Catch::Approx(1.0));
        REQUIRE(r.series.curve(0)[static_cast<std::size_t>(j)] == Catch::Approx(-1.0));
        REQUIRE(r.series.curve(1)[static_cast<std::size_t>(j)] == Catch::Approx(1.0));
    }

    Matrix same(3, 3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) same(i, j) = 4.5;
    const CenterResult rd = center(FunctionalSeries(g, same));
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) REQUIRE(rd.series.curve(i)[static_cast<std::size_t>(j)] == 0.0);
}

TEST_CASE("center leaves zero column means and is idempotent", "[core]") {
    GaussianSampler rng(5);
    const Grid g = make_uniform_grid(17);
    Matrix vals(23, 17);
    for (int i = 0; i < 23; ++i)
        for (int j = 0; j < 17; ++j) vals(i, j) = 3.0 * rng.normal() + 1.0;
    const CenterResult r = center(FunctionalSeries(g, vals));
    for (int j = 0; j < 17; ++j) {
        double colmean = 0.0;
        for (int i = 0; i < 23; ++i) colmean += r.series.curve(i)[static_cast<std::size_t>(j)];
        colmean /= 23;
        REQUIRE(std::fabs(colmean) <= 1e-12);
    }
    REQUIRE_THROWS_AS(center(r.series), InvalidArgument);

    // re-centering the centered values changes nothing beyond rounding
    const CenterResult r2 = center(FunctionalSeries(g, r.series.values()));
    for (int i = 0; i < 23; ++i)
        for (int j = 0; j < 17; ++j)
            REQUIRE(std::fabs(r2.series.curve(i)[static_cast<std::size_t>(j)] -
                              r.series.curve(i)[static_cast<std::size_t>(j)]) <= 1e-12);
}

TEST_CASE("series validation", "[core]") {
    const Grid g = make_uniform_grid(4);
    REQUIRE_THROWS_AS(FunctionalSeries(g, Matrix(1, 4)), InvalidArgument);
    REQUIRE_THROWS_AS(FunctionalSeries(g, Matrix(3, 5)), InvalidArgument);
    Matrix bad(2, 4);
    bad(1, 2) = std::numeric_limits<double>::quiet_NaN();
    REQUIRE_THROWS_AS(FunctionalSeries(g, bad), InvalidArgument);
}
