#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fracheat/quadrature.hpp"

using namespace fracheat;

TEST_CASE("tanh-sinh resolves endpoint singularities") {
    // int_0^1 x^{-1/2} (1-x)^{-0.3} dx = B(1/2, 0.7)
    auto f = [](double, double da, double db) { return std::pow(da, -0.5) * std::pow(db, -0.3); };
    auto r = quad::tanh_sinh(f, 0.0, 1.0);
    const double beta = std::tgamma(0.5) * std::tgamma(0.7) / std::tgamma(1.2);
    CHECK(r.value == doctest::Approx(beta).epsilon(1e-10));
    CHECK_NOTHROW(quad::check(r, {}, "test"));
}

TEST_CASE("endpoint distances keep full precision") {
    // integrand depends only on b - x, which must not round to zero
    auto f = [](double, double, double db) { return std::pow(db, -0.9); };
    auto r = quad::tanh_sinh(f, 1.0, 1.0 + 1e-3);
    CHECK(r.value == doctest::Approx(10.0 * std::pow(1e-3, 0.1)).epsilon(1e-9));
}

TEST_CASE("graded points cluster around anchors") {
    std::vector<double> anchors{1.0};
    auto pts = quad::graded_points(0.0, 1.0, anchors, 1e-3);
    CHECK(pts.front() == 0.0);
    CHECK(pts.back() == 1.0);
    CHECK(pts.size() == 12);
    for (std::size_t i = 1; i < pts.size(); ++i) CHECK(pts[i] > pts[i - 1]);
    CHECK(pts[pts.size() - 2] == doctest::Approx(1.0 - 1e-3));
}

TEST_CASE("piecewise sum over a boundary layer") {
    const double lam = 1e4;
    auto f = [&](double x, double, double) { return std::exp(-lam * (1 - x)); };
    std::vector<double> anchors{1.0};
    auto pts = quad::graded_points(0.0, 1.0, anchors, 1.0 / lam);
    auto r = quad::piecewise(f, pts);
    CHECK(r.value == doctest::Approx(-std::expm1(-lam) / lam).epsilon(1e-11));
}

TEST_CASE("non-convergence raises with the residual") {
    quad::Result bad{1.0, 0.5, 1.0};
    CHECK_THROWS_AS(quad::check(bad, {}, "probe"), NumericalError);
    quad::Options lax;
    lax.throw_on_failure = false;
    CHECK_NOTHROW(quad::check(bad, lax, "probe"));
}
