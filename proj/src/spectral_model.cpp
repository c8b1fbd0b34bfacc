#include "fracheat/spectral_model.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <shared_mutex>

#include "fracheat/errors.hpp"
#include "fracheat/quadrature.hpp"

namespace fracheat {

namespace {

constexpr double kPi = std::numbers::pi;

void check_unit(double v, const char* what) {
    require(v > 0 && v < 1, std::string(what) + " must lie in (0,1), got " + format_double(v));
}

// Cumulative sums c(n) = sum_{k<n} r(k), grown on demand.
class RieszTable {
public:
    explicit RieszTable(double gamma) : gamma_(gamma) { sums_.push_back(0.0); }

    double partial(long n) {
        {
            std::shared_lock lock(mu_);
            if (n < long(sums_.size())) return sums_[n];
        }
        std::unique_lock lock(mu_);
        long have = long(sums_.size());
        const long want = std::max(n + 1, 2 * have);
        sums_.reserve(want);
        for (long k = have - 1; k < want - 1; ++k) sums_.push_back(sums_.back() + riesz_r(gamma_, k));
        return sums_[n];
    }

private:
    double gamma_;
    std::shared_mutex mu_;
    std::vector<double> sums_;
};

RieszTable& riesz_table(double gamma) {
    static std::mutex mu;
    static std::map<double, std::unique_ptr<RieszTable>> tables;
    std::lock_guard lock(mu);
    auto& t = tables[gamma];
    if (!t) t = std::make_unique<RieszTable>(gamma);
    return *t;
}

double family_alpha(const SpectrumModel& m) {
    switch (m.kind) {
        case SpectrumKind::White: return 2 * m.H - 0.5;
        case SpectrumKind::Riesz: return 2 * m.H - m.param / 2;
        case SpectrumKind::FractionalSpace: return 2 * m.H + m.param - 1;
        case SpectrumKind::PowerLaw: return m.param;
    }
    return 0;
}

}  // namespace

std::string format_double(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

SpectrumModel SpectrumModel::white(double H) {
    check_unit(H, "Hurst parameter H");
    return {SpectrumKind::White, 0.0, H, 1.0};
}

SpectrumModel SpectrumModel::riesz(double gamma, double H) {
    check_unit(H, "Hurst parameter H");
    check_unit(gamma, "Riesz exponent gamma");
    return {SpectrumKind::Riesz, gamma, H, 0.0};
}

SpectrumModel SpectrumModel::fractional_space(double K, double H) {
    check_unit(H, "Hurst parameter H");
    check_unit(K, "fractional order K");
    return {SpectrumKind::FractionalSpace, K, H, 0.0};
}

SpectrumModel SpectrumModel::power_law(double alpha, double H) {
    check_unit(H, "Hurst parameter H");
    require(alpha > 0 && alpha <= 1, "power-law alpha must lie in (0,1], got " + format_double(alpha));
    require(alpha != 2 * H, "power-law alpha = 2H is excluded");
    return {SpectrumKind::PowerLaw, alpha, H, 0.0};
}

SpectrumModel SpectrumModel::parse(const std::string& spectrum, double H) {
    const auto colon = spectrum.find(':');
    const std::string name = spectrum.substr(0, colon);
    if (name == "white") {
        require(colon == std::string::npos, "white spectrum takes no parameter");
        return white(H);
    }
    require(colon != std::string::npos, "spectrum '" + spectrum + "' needs a parameter");
    const std::string arg = spectrum.substr(colon + 1);
    double v = 0;
    auto res = std::from_chars(arg.data(), arg.data() + arg.size(), v);
    require(res.ec == std::errc() && res.ptr == arg.data() + arg.size(),
            "bad spectrum parameter '" + arg + "'");
    if (name == "riesz") return riesz(v, H);
    if (name == "fracspace") return fractional_space(v, H);
    if (name == "powerlaw") return power_law(v, H);
    throw DomainError("unknown spectrum family '" + name + "'");
}

std::string SpectrumModel::spec_string() const {
    switch (kind) {
        case SpectrumKind::White: return "white";
        case SpectrumKind::Riesz: return "riesz:" + format_double(param);
        case SpectrumKind::FractionalSpace: return "fracspace:" + format_double(param);
        case SpectrumKind::PowerLaw: return "powerlaw:" + format_double(param);
    }
    return {};
}

double riesz_r(double gamma, long k) {
    quad::Options o;
    o.rel_tol = 1e-13;
    o.abs_tol = 1e-10;
    quad::Result res;
    if (k == 0) {
        const double p = 1.0 / (1.0 - gamma);
        auto f = [&](double u) {
            const double x = std::pow(u, p);
            return x == 0 ? 1.0 : std::sin(x) / x;
        };
        res = quad::gauss_kronrod(f, 0.0, std::pow(kPi, 1.0 - gamma), o);
        res.value *= p;
        res.error *= p;
    } else {
        auto f = [&](double y) { return std::pow(k * kPi + y, -gamma - 1) * std::sin(y); };
        res = quad::gauss_kronrod(f, 0.0, kPi, o);
    }
    if (!(res.error <= o.abs_tol)) quad::check(res, o, "riesz_r");
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    return 2 * gamma * sign * res.value;
}

double riesz_c_infinity(double gamma) {
    return 2 * std::tgamma(1 - gamma) * std::sin(kPi * gamma / 2);
}

double riesz_partial_sum(double gamma, long n) {
    if (n > kRieszCap) return riesz_c_infinity(gamma);
    return riesz_table(gamma).partial(n);
}

double q_coeff(const SpectrumModel& m, long n) {
    require(n >= 1, "q_coeff: n must be >= 1 (q_0 is a model field)");
    const double dn = double(n);
    switch (m.kind) {
        case SpectrumKind::White: return 1.0;
        case SpectrumKind::PowerLaw: return std::pow(dn, 4 * m.H - 2 * m.param - 1);
        case SpectrumKind::FractionalSpace: return std::pow(dn, 1 - 2 * m.param);
        case SpectrumKind::Riesz: return std::pow(dn, m.param - 1) * riesz_partial_sum(m.param, n);
    }
    return 0;
}

Envelope envelope(const SpectrumModel& m) {
    switch (m.kind) {
        case SpectrumKind::White: return {1.0, 0.0, 0.0};
        case SpectrumKind::PowerLaw: return {1.0, 4 * m.H - 2 * m.param - 1, 0.0};
        case SpectrumKind::FractionalSpace: return {1.0, 1 - 2 * m.param, 0.0};
        case SpectrumKind::Riesz: {
            const double g = m.param;
            return {riesz_c_infinity(g), g - 1, 4 * g * std::pow(kPi, -g - 1)};
        }
    }
    return {};
}

ExistenceReport existence_margin(const SpectrumModel& m) {
    ExistenceReport rep;
    rep.summand_exponent = envelope(m).exponent - 4 * m.H;
    rep.convergent = rep.summand_exponent < -1;
    if (!rep.convergent) {
        switch (m.kind) {
            case SpectrumKind::White: rep.reason = "nonexistent: H <= 1/4"; break;
            case SpectrumKind::Riesz: rep.reason = "nonexistent: H <= gamma/4"; break;
            case SpectrumKind::FractionalSpace: rep.reason = "nonexistent: 2H + K <= 1"; break;
            case SpectrumKind::PowerLaw: rep.reason = "nonexistent: alpha <= 0"; break;
        }
    }
    double sum = 0;
    long next = 1;
    for (long n = 1; n <= (1L << 14); ++n) {
        sum += q_coeff(m, n) * std::pow(double(n), -4 * m.H);
        if (n == next) {
            rep.partial_sums.emplace_back(n, sum);
            next *= 2;
        }
    }
    return rep;
}

double beta_of(double alpha, double H) { return 1 / alpha + std::max(2 / alpha, 1 / H); }

ExponentPair exponents(const SpectrumModel& m) {
    const double alpha = family_alpha(m);
    require(alpha > 0, "alpha = " + format_double(alpha) + " <= 0: no Hoelder regularity");
    require(alpha <= 1, "alpha = " + format_double(alpha) + " > 1 is outside the model hypothesis");
    require(alpha != 2 * m.H, "alpha = 2H is excluded by the spectrum hypothesis");
    require(envelope(m).exponent - 4 * m.H < -1, "solution does not exist for this model");
    const double beta = beta_of(alpha, m.H);
    double closed = beta;
    switch (m.kind) {
        case SpectrumKind::White: closed = 6 / (4 * m.H - 1); break;
        case SpectrumKind::Riesz: closed = 6 / (4 * m.H - m.param); break;
        case SpectrumKind::FractionalSpace: closed = 3 / (2 * m.H + m.param - 1); break;
        case SpectrumKind::PowerLaw: break;
    }
    if (std::abs(closed - beta) > 1e-12 * beta)
        throw NumericalError("beta closed form " + format_double(closed) +
                             " disagrees with the general formula " + format_double(beta));
    return {alpha, beta};
}

}  // namespace fracheat
