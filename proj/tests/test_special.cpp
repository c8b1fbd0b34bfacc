#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fracheat/special.hpp"

using namespace fracheat::special;

TEST_CASE("fOU autocovariance at H = 1/2 is exp(-x)/2") {
    for (double x : {1e-6, 0.3, 0.999, 1.5, 39.0, 41.0, 60.0}) {
        CHECK(fou_autocov(0.5, x) == doctest::Approx(0.5 * std::exp(-x)).epsilon(1e-12));
        CHECK(fou_gap(0.5, x) == doctest::Approx(-0.5 * std::expm1(-x)).epsilon(1e-12));
    }
    CHECK(fou_variance(0.5) == doctest::Approx(0.5));
}

TEST_CASE("fOU autocovariance against the spectral representation") {
    // Fourier integral of the spectral density, 30-digit quadrature.
    struct Row { double H, x, c; };
    const Row rows[] = {
        {0.3, 0.5, 0.1537729262137801},  {0.3, 2, -0.002057622296789498},
        {0.3, 7, -0.008353840206366931}, {0.3, 45, -0.0005826518706174297},
        {0.7, 0.5, 0.5050205583130608},  {0.7, 2, 0.2517457560595151},
        {0.7, 7, 0.08965622803936622},   {0.7, 45, 0.0285389063057081},
    };
    for (auto r : rows) {
        CAPTURE(r.H);
        CAPTURE(r.x);
        CHECK(fou_autocov(r.H, r.x) == doctest::Approx(r.c).epsilon(1e-9));
    }
}

TEST_CASE("fOU gap keeps relative accuracy at small lags and across branches") {
    // 40-digit evaluation of the closed form.
    struct Row { double H, x, gap, cov; };
    const Row rows[] = {
        {0.3, 1e-8, 7.9244659622832297e-6, 0.44674975017788285},
        {0.3, 1e-4, 0.0019905336237640531, 0.44476714102008108},
        {0.3, 0.3, 0.22782278872821993, 0.2189348859156252},
        {0.3, 0.999, 0.38490199440118734, 0.061855680242657795},
        {0.3, 1.001, 0.38514635214477944, 0.061611322499065695},
        {0.3, 39.9, 0.44744750707996956, -0.0006898324361244258},
        {0.3, 40.1, 0.44744268047180241, -0.00068500582795728251},
        {0.7, 1e-8, 3.1547556681673537e-12, 0.62108467224899795},
        {0.7, 1e-4, 1.2528377939300875e-6, 0.62108341941435877},
        {0.7, 0.3, 0.065537047337642457, 0.55554762491451025},
        {0.7, 0.999, 0.22641666704760288, 0.39466800520454982},
        {0.7, 1.001, 0.22680220587885051, 0.39428246637330219},
        {0.7, 39.9, 0.59040592199799742, 0.030678750254155282},
        {0.7, 40.1, 0.59049800613575657, 0.030586666116396128},
    };
    for (auto r : rows) {
        CAPTURE(r.H);
        CAPTURE(r.x);
        CHECK(fou_gap(r.H, r.x) == doctest::Approx(r.gap).epsilon(1e-11));
        CHECK(fou_autocov(r.H, r.x) == doctest::Approx(r.cov).epsilon(1e-9));
    }
}

TEST_CASE("Hurwitz tails") {
    CHECK(hurwitz_tail(1.2, 10) == doctest::Approx(3.12386907600566795).epsilon(1e-13));
    CHECK(hurwitz_tail(1.2, 1000) == doctest::Approx(1.25581764655207661).epsilon(1e-13));
    CHECK(hurwitz_tail(2.6, 10) == doctest::Approx(0.0144976222771789898).epsilon(1e-13));
    CHECK(hurwitz_tail(2.6, 1000) == doctest::Approx(9.89766142085394966e-6).epsilon(1e-13));
    CHECK(hurwitz_tail(4.0, 10) == doctest::Approx(0.000286650217381644731).epsilon(1e-13));
    CHECK(hurwitz_tail(4.0, 1000) == doctest::Approx(3.328336666665e-10).epsilon(1e-12));
}

TEST_CASE("cosine power sums match the polylogarithm") {
    struct Row { double p, r, v; };
    const Row rows[] = {
        {1.5, 1e-3, 2.53310890667648097},  {1.5, 0.5, 0.865929522764988241},
        {1.5, 3.0, -0.76133529018598283},  {2, 1e-3, 1.64336352052143154},
        {2, 0.5, 0.922035903450778127},    {2, 3.0, -0.817454913536463421},
        {2.6, 1e-3, 1.30544915898239173},  {2.6, 0.5, 0.9328331461646149},
        {2.6, 3.0, -0.868579124551101246}, {3, 1e-3, 1.20205269928195132},
        {3, 0.5, 0.927696310470230431},    {3, 3.0, -0.894598592123167267},
        {3.00005, 1e-3, 1.20204279403937149}, {3.00005, 0.5, 0.927695423643539417},
        {3.00005, 3.0, -0.89460149747161391}, {4, 1e-3, 1.08232241150588332},
        {4, 0.5, 0.908129315496670233},    {4, 3.0, -0.938796596528845986},
        {4.2, 1e-3, 1.0697507320156362},   {4.2, 0.5, 0.904693288001160157},
        {4.2, 3.0, -0.944913622049835465}, {5, 1e-3, 1.03692715411529298},
        {5, 0.5, 0.893902869510838508},    {5, 3.0, -0.963094096209422958},
        {6.3, 1e-3, 1.01389956532238529},  {6.3, 0.5, 0.88439312761206139},
        {6.3, 3.0, -0.978593218570453829}, {9, 1e-3, 1.00200788865148673},
        {9, 0.5, 0.878639310029329546},    {9, 3.0, -0.988160569641754896},
    };
    for (auto r : rows) {
        CAPTURE(r.p);
        CAPTURE(r.r);
        CHECK(cos_power_sum(r.p, r.r) == doctest::Approx(r.v).epsilon(1e-11));
        CHECK(cos_power_sum(r.p, -r.r + 4 * M_PI) == doctest::Approx(r.v).epsilon(1e-11));
    }
}

TEST_CASE("cosine tails agree with brute force") {
    for (double p : {2.2, 3.0, 4.0, 5.7}) {
        double brute = 0;
        for (long n = 51; n <= 4000000; ++n) brute += std::cos(0.37 * n) * std::pow(double(n), -p);
        CAPTURE(p);
        CHECK(cos_power_tail(p, 0.37, 50) == doctest::Approx(brute).epsilon(1e-6));
    }
}
