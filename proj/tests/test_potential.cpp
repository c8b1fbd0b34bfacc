#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "fracheat/errors.hpp"
#include "fracheat/potential.hpp"

using namespace fracheat;

namespace {

PointCloud cloud2(std::vector<double> xy, double h) {
    PointCloud c;
    c.d = 2;
    c.coords = std::move(xy);
    c.h = h;
    return c;
}

double log_slope(const PrelCheck& hi, const PrelCheck& lo, double a_hi, double a_lo) {
    return (lo.lhs / lo.normalization - hi.lhs / hi.normalization) / std::log(a_hi / a_lo);
}

}  // namespace

TEST_CASE("kernel values") {
    CHECK(k_beta({-1, 1}, 0.3) == 1.0);
    CHECK(k_beta({-1, 1}, 0.0) == 1.0);
    CHECK(k_beta({0, 2.5}, 2.5) == 0.0);
    CHECK(k_beta({2, 1}, 0.5) == 4.0);
    CHECK(std::isinf(k_beta({0, 1}, 0.0)));
    CHECK(std::isinf(k_beta({0.5, 1}, 0.0)));
    CHECK_THROWS_AS(k_beta({1, 1}, -1.0), DomainError);
    for (double b : {0.3, 1.0, 2.5})
        CHECK(std::abs(k_beta({b + 1e-9, 1}, 0.7) - k_beta({b, 1}, 0.7)) < 1e-8);
    CHECK(default_N0(1.0, 3.0) == doctest::Approx(3 * std::numbers::e));
}

TEST_CASE("self energy") {
    // disk of radius h, beta = 1: 16 / (3 pi h)
    CHECK(self_energy({1, 1}, 2, 0.01) == doctest::Approx(169.765272631355024820).epsilon(1e-11));
    // segment cell of half width 1/128 with log kernel, N0 = 4
    CHECK(self_energy({0, 4}, 1, 1.0 / 128) == doctest::Approx(7.0451774444795624753).epsilon(1e-11));
    CHECK(std::isinf(self_energy({1, 1}, 1, 0.1)));
    CHECK(std::isinf(self_energy({0.5, 1}, 2, 0.0)));
    CHECK(self_energy({-0.5, 1}, 2, 0.0) == 1.0);
}

TEST_CASE("energies") {
    const auto two = cloud2({0, 0, 1, 0}, 0.01);
    DiscreteMeasure half{{0.5, 0.5}};
    // the cross term uses the centre distance; the averaged pair kernel is 1 + 2.5e-5
    CHECK(energy(two, half, {1, 1}) == doctest::Approx(85.3826488168495583).epsilon(1e-6));
    CHECK(energy(two, half, {1, 1}) == doctest::Approx(85.3826363156775124).epsilon(1e-12));
    CHECK(energy(two, half, {-0.5, 1}) == doctest::Approx(1.0).epsilon(1e-15));
    const auto point = cloud2({0.2, 0.3}, 0.0);
    CHECK(std::isinf(energy(point, {{1.0}}, {0.5, 1})));
    CHECK(energy(point, {{1.0}}, {-1, 1}) == 1.0);
    CHECK_THROWS_AS(energy(two, {{0.6, 0.6}}, {1, 1}), DomainError);
    CHECK_THROWS_AS(energy(two, {{1.2, -0.2}}, {1, 1}), DomainError);
}

TEST_CASE("trivial capacities") {
    const auto two = cloud2({0, 0, 1, 0}, 0.0);
    CHECK(capacity(two, {-0.5, 1}).cap == 1.0);
    const auto point = cloud2({0.2, 0.3}, 0.0);
    CHECK(capacity(point, {0.5, 1}).cap == 0.0);
    CHECK(capacity(point, {0.0, 1}).cap == 0.0);
    CHECK(capacity(point, {-1, 1}).cap == 1.0);
    CHECK_THROWS_AS(capacity(PointCloud{}, {1, 1}), DomainError);
}

TEST_CASE("64-point interval against the weight-mesh oracle") {
    const auto c = segment_cloud(0, 1, 64);
    CHECK(c.h == 1.0 / 128);
    const auto r = capacity(c, {0, 4});
    CHECK(r.method == "frank-wolfe");
    CHECK(r.gap <= 1e-8);
    // min over a 316 x 316 mesh of w_i ~ (x_i (1 - x_i) + eps)^{-s}
    const double mesh = 2.7715552207268033;
    CHECK(r.energy <= mesh);
    CHECK(std::abs(r.cap - 1 / mesh) <= 0.02 / mesh);
    // an SLSQP solve of the same quadratic program
    CHECK(r.energy == doctest::Approx(2.7709143591617034).epsilon(1e-7));

    const auto K = energy_matrix(c, {0, 4});
    Eigen::Map<const Eigen::VectorXd> w(r.minimizer.weights.data(), 64);
    const Eigen::VectorXd Kw = K * w;
    CHECK(Kw.minCoeff() >= w.dot(Kw) - 1e-8);
    double sum = 0;
    for (double v : r.minimizer.weights) {
        CHECK(v >= 0);
        sum += v;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    // mirror symmetry x -> 1 - x
    Eigen::VectorXd sym = 0.5 * (w + w.reverse());
    CHECK(sym.dot(K * sym) >= r.energy - 1e-8);
}

TEST_CASE("capacity is monotone under inclusion") {
    const auto big = segment_cloud(0, 1, 32);
    PointCloud small = big;
    small.coords.resize(16);
    for (double beta : {0.0, 0.5}) {
        const EnergyKernel k{beta, 4};
        const auto a = capacity(small, k), b = capacity(big, k);
        CHECK(a.cap <= b.cap);
        CHECK(a.gap <= 1e-8);
        CHECK(b.gap <= 1e-8);
    }
}

TEST_CASE("non-PSD energy matrix falls back to projected gradient") {
    // log kernel with N0 far below the diameter is indefinite
    PointCloud c;
    c.d = 1;
    c.coords = {0, 1, 2, 3};
    c.h = 0.1;
    const auto r = capacity(c, {0, 0.05});
    CHECK(r.min_eigenvalue < 0);
    CHECK(r.method == "projected-gradient");
    CHECK(std::isfinite(r.energy));
}

TEST_CASE("Hausdorff cover sums") {
    const auto seg = segment_cloud(0, 3, 1 << 15);
    std::vector<double> eps;
    for (int k = 1; k <= 12; ++k) eps.push_back(std::ldexp(1.0, -k));
    const auto s = hausdorff_estimate(seg, 1.0, eps);
    for (std::size_t i = 0; i < s.size(); ++i) CHECK(std::abs(s[i] - 3) <= 0.06);
    for (std::size_t i = 1; i < s.size(); ++i) CHECK(s[i] <= 1.1 * s[i - 1]);

    CHECK(std::isinf(hausdorff_estimate(seg, -0.5, eps)[0]));

    PointCloud pts;
    pts.d = 2;
    pts.coords = {0, 0, 1, 0, 0, 1, 0.3, 0.3};
    const auto f = hausdorff_estimate(pts, 0.5, eps);
    CHECK(f.back() < 0.3);
    CHECK(f.back() == doctest::Approx(0.0).scale(1));

    const std::vector<double> bad{0.1, 0.2};
    CHECK_THROWS_AS(hausdorff_estimate(seg, 1.0, bad), DomainError);
}

TEST_CASE("point CSV") {
    const auto file = (std::filesystem::temp_directory_path() / "fracheat_points.csv").string();
    {
        std::ofstream out(file);
        out << "x_1,x_2\n0,0\n1,0.5\n";
    }
    const auto c = read_point_csv(file, 0.1);
    CHECK(c.d == 2);
    CHECK(c.size() == 2);
    CHECK(c.distance(0, 1) == doctest::Approx(std::hypot(1, 0.5)));
    {
        std::ofstream out(file);
        out << "0,0\n1\n";
    }
    CHECK_THROWS_AS(read_point_csv(file), DomainError);
    std::filesystem::remove(file);
}

TEST_CASE("lag integral against a direct two-dimensional quadrature") {
    CHECK(prel_integral_check(0.1, 0.5, 1.0, 0.5, 0.5, 4).lhs == doctest::Approx(1.0942260351207423).epsilon(1e-8));
    CHECK(prel_integral_check(0.3, 0.5, 1.0, 0.5, 0.5, 6).lhs == doctest::Approx(2.6870790855594485).epsilon(1e-8));
    CHECK_THROWS_AS(prel_integral_check(2.0, 0.5, 1.0, 0.5, 0.5, 4), DomainError);
    CHECK_THROWS_AS(prel_integral_check(0.1, 0.5, 4.0, 0.5, 0.5, 4), DomainError);
}

TEST_CASE("lag integral in three regimes") {
    // alpha = H = 1/2: exponents 1 in space, 1/2 in time, critical d = 6
    const std::vector<double> as{1e-3, 3e-3, 1e-2, 3e-2, 1e-1, 0.3, 1.0};
    for (double d : {4.0, 6.0, 8.0}) {
        double lo = INFINITY, hi = 0;
        for (double a : as) {
            const auto p = prel_integral_check(a, 0.5, 1.0, 0.5, 0.5, d);
            CHECK(p.index == doctest::Approx(d - 6));
            CHECK(std::isfinite(p.ratio));
            CHECK(p.ratio > 0);
            lo = std::min(lo, p.ratio);
            hi = std::max(hi, p.ratio);
        }
        CHECK(hi / lo < 25);
    }
    const auto p3 = prel_integral_check(1e-3, 0.5, 1.0, 0.5, 0.5, 6);
    const auto p2 = prel_integral_check(1e-2, 0.5, 1.0, 0.5, 0.5, 6);
    CHECK(std::abs(log_slope(p2, p3, 1e-2, 1e-3) - 2) < 0.2);
    // a different exponent pair: alpha = 0.8, H = 0.3 gives 1.6 and 0.6
    const double dc = 2 / 1.6 + 2 / 0.6;
    const auto q3 = prel_integral_check(1e-3, 1.0, 2.0, 0.8, 0.3, dc);
    const auto q2 = prel_integral_check(1e-2, 1.0, 2.0, 0.8, 0.3, dc);
    CHECK(q3.index == doctest::Approx(0).scale(1));
    CHECK(std::abs(log_slope(q2, q3, 1e-2, 1e-3) - 2) < 0.2);
}
