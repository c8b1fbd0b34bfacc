#include "fracheat/special.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/zeta.hpp>
#include <cmath>
#include <map>
#include <numbers>
#include <vector>

#include "fracheat/errors.hpp"

namespace fracheat::special {

namespace {

constexpr double kPi = std::numbers::pi;

// e^{-x} int_0^x e^y y^{2H} dy as a positive series.
double damped_moment(double H, double x) {
    const double a = 2.0 * H + 1.0;
    double t = std::exp(-x + a * std::log(x));
    double sum = t / a;
    for (int k = 1; k < 4000; ++k) {
        t *= x / k;
        const double term = t / (a + k);
        sum += term;
        if (k > x && term < 1e-18 * sum) break;
    }
    return sum;
}

double gap_small(double H, double x) {
    const double a = 2.0 * H + 1.0;
    const double ga = std::tgamma(a);
    const double twocosh = std::expm1(x) + std::expm1(-x);
    const double lower = boost::math::tgamma_lower(a, x);
    return 0.5 * std::pow(x, 2 * H) -
           0.25 * (twocosh * ga - std::exp(x) * lower + damped_moment(H, x));
}

double autocov_mid(double H, double x) {
    const double a = 2.0 * H + 1.0;
    const double upper = std::exp(x) * boost::math::tgamma(a, x);
    return 0.25 * (upper + std::exp(-x) * std::tgamma(a) + damped_moment(H, x)) -
           0.5 * std::pow(x, 2 * H);
}

double autocov_asymptotic(double H, double x) {
    const double inv2 = 1.0 / (x * x);
    double f = 1.0;
    double xp = std::pow(x, 2 * H);
    double sum = 0.0, last = INFINITY;
    for (int j = 1; j < 40; ++j) {
        f *= (2 * H - (2 * j - 2)) * (2 * H - (2 * j - 1));
        xp *= inv2;
        const double term = 0.5 * f * xp;
        if (std::abs(term) > std::abs(last)) break;
        sum += term;
        last = term;
        if (std::abs(term) <= 1e-18 * std::abs(sum) || term == 0.0) break;
    }
    return sum;
}

constexpr double kSmall = 1.0;
constexpr double kLarge = 40.0;

double bernoulli_cos(int k, double r) {
    const double x = r / (2 * kPi);
    double b;
    switch (k) {
        case 1: b = x * x - x + 1.0 / 6; break;
        case 2: b = x * x * x * x - 2 * x * x * x + x * x - 1.0 / 30; break;
        default:
            b = std::pow(x, 6) - 3 * std::pow(x, 5) + 2.5 * std::pow(x, 4) - 0.5 * x * x + 1.0 / 42;
            break;
    }
    double fact = 1;
    for (int i = 2; i <= 2 * k; ++i) fact *= i;
    const double sign = (k % 2 == 1) ? 1.0 : -1.0;
    return sign * std::pow(2 * kPi, 2 * k) / (2 * fact) * b;
}

const std::vector<double>& zeta_shifts(double p) {
    thread_local std::map<double, std::vector<double>> cache;
    auto& v = cache[p];
    if (v.empty()) {
        for (int j = 0; j < 60; ++j) {
            const double s = p - 2 * j;
            v.push_back(s == 1.0 ? 0.0 : boost::math::zeta(s));
        }
    }
    return v;
}

double cos_sum_odd(int m, double r) {
    const int q = (m - 1) / 2;
    double harmonic = 0;
    for (int i = 1; i <= 2 * q; ++i) harmonic += 1.0 / i;
    const auto& z = zeta_shifts(m);
    double sum = 0, r2j = 1, fact = 1;
    for (int j = 0; j < 60; ++j) {
        if (j > 0) {
            r2j *= r * r;
            fact *= (2.0 * j - 1) * (2.0 * j);
        }
        const double sign = (j % 2 == 0) ? 1.0 : -1.0;
        double term;
        if (j == q)
            term = sign * r2j / fact * (harmonic - std::log(r));
        else
            term = z[j] * sign * r2j / fact;
        sum += term;
        if (j > q + 2 && std::abs(term) < 1e-19 * std::abs(sum)) break;
    }
    return sum;
}

double cos_sum_general(double p, double r) {
    const auto& z = zeta_shifts(p);
    double sum = std::tgamma(1 - p) * std::sin(kPi * p / 2) * std::pow(r, p - 1);
    double r2j = 1, fact = 1;
    for (int j = 0; j < 60; ++j) {
        if (j > 0) {
            r2j *= r * r;
            fact *= (2.0 * j - 1) * (2.0 * j);
        }
        const double term = ((j % 2 == 0) ? 1.0 : -1.0) * z[j] * r2j / fact;
        sum += term;
        if (j > 2 && std::abs(term) < 1e-19 * std::abs(sum)) break;
    }
    return sum;
}

}  // namespace

double fou_variance(double H) { return H * std::tgamma(2 * H); }

double fou_gap(double H, double x) {
    x = std::abs(x);
    if (x == 0) return 0;
    if (x < kSmall) return gap_small(H, x);
    if (x <= kLarge) return fou_variance(H) - autocov_mid(H, x);
    return fou_variance(H) - autocov_asymptotic(H, x);
}

double fou_autocov(double H, double x) {
    x = std::abs(x);
    if (x < kSmall) return fou_variance(H) - gap_small(H, x);
    if (x <= kLarge) return autocov_mid(H, x);
    return autocov_asymptotic(H, x);
}

double hurwitz_tail(double p, double N) {
    require(p > 1, "hurwitz_tail: exponent must exceed 1");
    const double m = std::floor(N) + 1;
    double sum = 0;
    for (int k = 0; k < 8; ++k) sum += std::pow(m + k, -p);
    const double M = m + 8;
    const double fM = std::pow(M, -p);
    sum += M * fM / (p - 1) + 0.5 * fM;
    static constexpr double b[] = {1.0 / 6, -1.0 / 30, 1.0 / 42, -1.0 / 30};
    double rising = p, pw = fM / M, fact = 2;
    for (int k = 1; k <= 4; ++k) {
        sum += b[k - 1] / fact * rising * pw;
        rising *= (p + 2 * k - 1) * (p + 2 * k);
        pw /= M * M;
        fact *= (2.0 * k + 1) * (2.0 * k + 2);
    }
    return sum;
}

double cos_power_sum(double p, double r) {
    require(p > 1, "cos_power_sum: exponent must exceed 1");
    r = std::fmod(std::abs(r), 2 * kPi);
    if (r > kPi) r = 2 * kPi - r;
    if (r == 0) return boost::math::zeta(p);
    if (p >= 8) {
        double sum = 0;
        for (long n = 1;; ++n) {
            const double t = std::pow(double(n), -p);
            sum += t * std::cos(n * r);
            if (t < 1e-19) break;
        }
        return sum;
    }
    const double pr = std::round(p);
    if (std::abs(p - pr) < 1e-9) {
        const int m = int(pr);
        if (m % 2 == 0) return bernoulli_cos(m / 2, r);
        return cos_sum_odd(m, r);
    }
    if (std::abs(p - pr) < 1e-4 && int(pr) % 2 == 1) {
        // Near odd integers the general expansion cancels; interpolate.
        const double h = 2e-4, u = (p - pr) / h;
        const double f0 = cos_sum_odd(int(pr), r);
        const double fp = cos_sum_general(pr + h, r), fm = cos_sum_general(pr - h, r);
        return f0 + u * (fp - fm) / 2 + u * u * (fp - 2 * f0 + fm) / 2;
    }
    return cos_sum_general(p, r);
}

double cos_power_tail(double p, double r, long N) {
    double head = 0;
    for (long n = 1; n <= N; ++n) head += std::cos(n * r) * std::pow(double(n), -p);
    return cos_power_sum(p, r) - head;
}

}  // namespace fracheat::special
