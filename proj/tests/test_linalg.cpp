#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "fcar/linalg.hpp"
#include "fcar/rng.hpp"

using namespace fcar;

namespace {

Matrix random_spd(int n, GaussianSampler& rng) {
    Matrix b(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) b(i, j) = rng.normal();
    Matrix a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int k = 0; k < n; ++k) s += b(i, k) * b(j, k);
            a(i, j) = s;
        }
    for (int i = 0; i < n; ++i) a(i, i) += 0.5;  // keep it comfortably positive
    return a;
}

}  // namespace

TEST_CASE("solve_spd on trivial systems", "[linalg]") {
    Matrix eye(3, 3);
    for (int i = 0; i < 3; ++i) eye(i, i) = 1.0;
    Matrix rhs(3, 1);
    rhs(0, 0) = 4.0;
    rhs(1, 0) = -1.0;
    rhs(2, 0) = 0.25;
    const SpdSolution s = solve_spd(eye, rhs);
    for (int i = 0; i < 3; ++i) REQUIRE(s.x(i, 0) == Catch::Approx(rhs(i, 0)));
    REQUIRE(s.min_pivot == Catch::Approx(1.0));

    Matrix one(1, 1);
    one(0, 0) = 4.0;
    std::vector<double> b{2.0};
    REQUIRE(solve_spd(one, b)[0] == Catch::Approx(0.5));
}

TEST_CASE("solve_spd residuals on random systems", "[linalg]") {
    GaussianSampler rng(42);
    for (int trial = 0; trial < 25; ++trial) {
        const int n = 1 + static_cast<int>(rng.raw() % 9);
        const Matrix a = random_spd(n, rng);
        std::vector<double> b(static_cast<std::size_t>(n));
        double bnorm = 0.0;
        for (auto& v : b) {
            v = rng.normal();
            bnorm += v * v;
        }
        bnorm = std::sqrt(bnorm);
        const std::vector<double> x = solve_spd(a, b);
        double rnorm = 0.0;
        for (int i = 0; i < n; ++i) {
            double r = -b[static_cast<std::size_t>(i)];
            for (int j = 0; j < n; ++j) r += a(i, j) * x[static_cast<std::size_t>(j)];
            rnorm += r * r;
        }
        REQUIRE(std::sqrt(rnorm) <= 1e-8 * bnorm);
    }
}

TEST_CASE("solve_spd rejects singular and asymmetric input", "[linalg]") {
    Matrix sing(2, 2);
    sing(0, 0) = 1.0;
    sing(0, 1) = 1.0;
    sing(1, 0) = 1.0;
    sing(1, 1) = 1.0;  // rank one
    std::vector<double> b{1.0, 2.0};
    try {
        solve_spd(sing, b);
        FAIL("expected SingularMatrix");
    } catch (const SingularMatrix& e) {
        REQUIRE(std::fabs(e.pivot) <= 1e-12);
        REQUIRE(e.index == 1);
    }

    Matrix asym(2, 2);
    asym(0, 0) = 1.0;
    asym(0, 1) = 0.5;
    asym(1, 0) = -0.5;
    asym(1, 1) = 1.0;
    REQUIRE_THROWS_AS(solve_spd(asym, b), InvalidArgument);
}

TEST_CASE("ldlt reports every pivot", "[linalg]") {
    GaussianSampler rng(3);
    const Matrix a = random_spd(5, rng);
    const LdltFactors f = ldlt_factor(a);
    REQUIRE(f.complete);
    REQUIRE(f.min_pivot > 0.0);
    REQUIRE(static_cast<int>(f.diag.size()) == 5);
    // reconstruct A = L D L' and compare
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) {
            double s = 0.0;
            for (int k = 0; k < 5; ++k) {
                const double li = k == i ? 1.0 : (k < i ? f.lower(i, k) : 0.0);
                const double lj = k == j ? 1.0 : (k < j ? f.lower(j, k) : 0.0);
                s += li * lj * f.diag[static_cast<std::size_t>(k)];
            }
            REQUIRE(s == Catch::Approx(a(i, j)).margin(1e-10));
        }
}
