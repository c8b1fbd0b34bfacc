#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fracheat/errors.hpp"
#include "fracheat/mode_moments.hpp"

using namespace fracheat;

namespace {

double ito_variance(long n, double t) {
    const double l = double(n) * n;
    return -std::expm1(-2 * l * t) / (2 * l);
}

}  // namespace

TEST_CASE("Brownian mode variance is the Ito closed form") {
    for (long n : {1L, 2L, 5L, 30L})
        for (double t : {0.1, 0.5, 1.0, 3.0}) {
            CHECK(mode_variance(0.5, n, t) == doctest::Approx(ito_variance(n, t)).epsilon(1e-13));
            CHECK(mode_variance(0.5, n, t, ModeMethod::Kstar) ==
                  doctest::Approx(ito_variance(n, t)).epsilon(1e-8));
        }
}

TEST_CASE("Brownian increment and cross moments") {
    const double s = 0.5, t = 1.0;
    const double closed = std::pow(std::expm1(-(t - s)), 2) * (-std::expm1(-2 * s)) / 2 +
                          (-std::expm1(-2 * (t - s))) / 2;
    CHECK(mode_increment_moment(0.5, 1, s, t) == doctest::Approx(closed).epsilon(1e-13));
    CHECK(mode_increment_moment(0.5, 1, s, t, ModeMethod::Kstar) == doctest::Approx(closed).epsilon(1e-8));
    for (long n : {1L, 3L})
        for (auto [ti, tj] : {std::pair{0.2, 0.9}, std::pair{0.7, 0.4}}) {
            const double l = double(n) * n, m = std::min(ti, tj);
            const double ref = std::exp(-l * (ti + tj)) * std::expm1(2 * l * m) / (2 * l);
            CHECK(mode_cross_moment(0.5, n, ti, tj) == doctest::Approx(ref).epsilon(1e-13));
        }
}

TEST_CASE("degenerate arguments") {
    for (double H : {0.3, 0.5, 0.7}) CHECK(mode_increment_moment(H, 3, 0.6, 0.6) == 0.0);
    CHECK(mode_cross_moment(0.3, 2, 0.8, 0.8) == doctest::Approx(mode_variance(0.3, 2, 0.8)).epsilon(1e-14));
    CHECK(mode_cross_moment(0.7, 2, 0.3, 0.8) == doctest::Approx(mode_cross_moment(0.7, 2, 0.8, 0.3)).epsilon(1e-14));
    CHECK_THROWS_AS(mode_variance(0.3, 2, 1.0, ModeMethod::Isometry), DomainError);
    CHECK_THROWS_AS(mode_variance(0.3, 0, 1.0), DomainError);
    CHECK_THROWS_AS(mode_variance(1.2, 1, 1.0), DomainError);
    CHECK_THROWS_AS(mode_increment_moment(0.3, 1, 0.8, 0.5), DomainError);
}

TEST_CASE("zero rate reduces to fBm") {
    for (double H : {0.2, 0.3, 0.7}) {
        CHECK(ou_variance(H, 0.0, 0.8) == doctest::Approx(std::pow(0.8, 2 * H)).epsilon(1e-13));
        CHECK(ou_cross(H, 0.0, 0.3, 0.7) == doctest::Approx(fbm_covariance(H, 0.3, 0.7)).epsilon(1e-13));
        CHECK(ou_increment(H, 0.0, 0.3, 0.7) == doctest::Approx(std::pow(0.4, 2 * H)).epsilon(1e-13));
    }
}

TEST_CASE("K*, isometry and stationary routes agree") {
    for (double H : {0.3, 0.7})
        for (long n : {1L, 4L})
            for (double t : {0.5, 1.0}) {
                const double ref = mode_variance(H, n, t);
                CHECK(mode_variance(H, n, t, ModeMethod::Kstar) == doctest::Approx(ref).epsilon(1e-8));
                if (H > 0.5) CHECK(mode_variance(H, n, t, ModeMethod::Isometry) == doctest::Approx(ref).epsilon(1e-8));
            }
    CHECK(mode_increment_moment(0.3, 2, 0.9, 1.0, ModeMethod::Kstar) ==
          doctest::Approx(mode_increment_moment(0.3, 2, 0.9, 1.0)).epsilon(1e-8));
    CHECK(mode_increment_moment(0.7, 3, 0.5, 0.6, ModeMethod::Kstar) ==
          doctest::Approx(mode_increment_moment(0.7, 3, 0.5, 0.6)).epsilon(1e-8));
    CHECK(mode_cross_moment(0.3, 2, 0.5, 1.0, ModeMethod::Kstar) ==
          doctest::Approx(mode_cross_moment(0.3, 2, 0.5, 1.0)).epsilon(1e-8));
    CHECK(mode_cross_moment(0.7, 1, 1.0, 0.4, ModeMethod::Kstar) ==
          doctest::Approx(mode_cross_moment(0.7, 1, 1.0, 0.4)).epsilon(1e-8));
}

TEST_CASE("frozen values from independent extended-precision quadrature") {
    // phi(t) B(t) - int phi' B dr expanded against the fBm covariance, 30 digits
    CHECK(mode_variance(0.7, 3, 1.0) == doctest::Approx(0.028654853061824492).epsilon(1e-12));
    CHECK(mode_variance(0.3, 2, 1.0) == doctest::Approx(0.19476899445564860).epsilon(1e-12));
}

TEST_CASE("Monte Carlo oracle brackets the exact values") {
    auto check_mc = [](double exact, McEstimate e) {
        CHECK(std::abs(exact - e.mean) <= 0.01 * std::abs(e.mean) + 3 * e.se);
    };
    {
        auto phi = mode_integrand(9.0, 1.0);
        auto e = rs_oracle(0.7, 1.0, McDefaults::grid_steps, McDefaults::paths, McDefaults::seed, {{phi, phi}});
        check_mc(mode_variance(0.7, 3, 1.0), e[0]);
    }
    {
        auto h = increment_integrand(4.0, 0.9, 1.0);
        auto e = rs_oracle(0.3, 1.0, McDefaults::grid_steps, McDefaults::paths, McDefaults::seed, {{h, h}});
        check_mc(mode_increment_moment(0.3, 2, 0.9, 1.0), e[0]);
    }
    {
        auto f = truncated_mode_integrand(1.0, 0.5), g = mode_integrand(1.0, 1.0);
        auto e = rs_oracle(0.3, 1.0, 1024, 8000, 7, {{f, g}, {g, g}});
        check_mc(mode_cross_moment(0.3, 1, 0.5, 1.0), e[0]);
        check_mc(mode_variance(0.3, 1, 1.0), e[1]);
    }
}

TEST_CASE("Monte Carlo oracle is reproducible") {
    auto phi = mode_integrand(1.0, 1.0);
    auto a = rs_oracle(0.4, 1.0, 128, 200, 5, {{phi, phi}});
    auto b = rs_oracle(0.4, 1.0, 128, 200, 5, {{phi, phi}});
    CHECK(a[0].mean == b[0].mean);
    CHECK(a[0].se == b[0].se);
}

TEST_CASE("variance decays like n^{-4H}") {
    for (double H : {0.3, 0.7}) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int k = 0;
        for (long n = 8; n <= 64; ++n, ++k) {
            const double x = std::log(double(n)), y = std::log(mode_variance(H, n, 1.0));
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        const double slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
        CHECK(std::abs(slope + 4 * H) < 0.1);
    }
}
