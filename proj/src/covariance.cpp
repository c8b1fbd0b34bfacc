#include "fracheat/covariance.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "fracheat/errors.hpp"
#include "fracheat/fbm.hpp"
#include "fracheat/mode_moments.hpp"
#include "fracheat/special.hpp"

namespace fracheat {

namespace sp = special;
using std::numbers::pi;

namespace {

// Below these values of n^2 t_min and n^2 |t - s| the large-n expansion
// of the mode moments is not used.
constexpr double kVarOnset = 40.0;
constexpr double kCrossOnset = 50.0;

double pairwise_rec(const double* v, std::size_t n) {
    if (n <= 8) {
        double s = 0;
        for (std::size_t i = 0; i < n; ++i) s += v[i];
        return s;
    }
    const std::size_t h = n / 2;
    return pairwise_rec(v, h) + pairwise_rec(v + h, n - h);
}

long ceil_pow2(long n) {
    long p = 1;
    while (p < n) p *= 2;
    return p;
}

}  // namespace

double pairwise_sum(std::span<const double> v) { return pairwise_rec(v.data(), v.size()); }

double circle_distance(double x, double y) {
    double d = std::fmod(std::abs(x - y), 2 * pi);
    return d > pi ? 2 * pi - d : d;
}

double delta_metric(SpaceTime p, SpaceTime q, double alpha, double H) {
    require(alpha > 0 && alpha <= 1, "delta_metric: alpha must lie in (0,1]");
    const double r = circle_distance(p.x, q.x);
    return std::pow(r, 2 * alpha) + std::pow(std::abs(p.t - q.t), std::min(alpha, 2 * H));
}

double truncation_tail(const SpectrumModel& m, long N) {
    require(N >= 1, "truncation_tail: N must be >= 1");
    const auto env = envelope(m);
    const double A = sp::fou_variance(m.H);
    const double p = 4 * m.H - env.exponent;
    require(p > 1, "truncation_tail: solution does not exist for this model");
    double s = env.kappa * sp::hurwitz_tail(p, double(N));
    if (env.correction > 0) s += env.correction * sp::hurwitz_tail(2 + 4 * m.H, double(N));
    return 2 * A * s;
}

struct CovarianceEngine::PairTable {
    std::vector<double> inc, cross;  // index n - 1
};

CovarianceEngine::CovarianceEngine(SpectrumModel m, SeriesOptions o) : model_(m), opts_(o) {
    const auto rep = existence_margin(m);
    require(rep.convergent, rep.reason);
    if (m.kind == SpectrumKind::Riesz) opts_.n_max = std::min(opts_.n_max, kRieszCap);
    require(opts_.n_start >= 1 && opts_.n_max >= opts_.n_start, "series options: need 1 <= n_start <= n_max");
    const long n_q = std::max(opts_.n_max, opts_.max_modes);
    q_.resize(n_q);
    for (long n = 1; n <= n_q; ++n) q_[n - 1] = q_coeff(m, n);
}

CovarianceEngine::~CovarianceEngine() = default;

double CovarianceEngine::q_at(long n) const { return q_[n - 1]; }

std::shared_ptr<const CovarianceEngine::PairTable> CovarianceEngine::table(double t1, double t2, long N) const {
    const auto key = std::make_pair(std::min(t1, t2), std::max(t1, t2));
    std::shared_ptr<const PairTable> old;
    {
        std::lock_guard lk(mu_);
        auto it = cache_.find(key);
        if (it != cache_.end()) {
            if (long(it->second->inc.size()) >= N) return it->second;
            old = it->second;
        }
    }
    auto t = std::make_shared<PairTable>();
    const long from = old ? long(old->inc.size()) : 0;
    if (old) *t = *old;
    t->inc.resize(N);
    t->cross.resize(N);
    const double H = model_.H, s = key.first, u = key.second;
#pragma omp parallel for schedule(static) if (opts_.parallel)
    for (long i = from; i < N; ++i) {
        const double lambda = double(i + 1) * double(i + 1);
        t->inc[i] = s == u ? 0.0 : ou_increment(H, lambda, s, u);
        t->cross[i] = ou_cross(H, lambda, s, u);
    }
    std::lock_guard lk(mu_);
    auto& slot = cache_[key];
    if (!slot || slot->inc.size() < t->inc.size()) slot = t;
    return slot;
}

SeriesResult CovarianceEngine::eval(double t1, double t2, double theta, Weights w) const {
    const double H = model_.H;
    require(t1 > 0 && t2 > 0, "metric evaluation requires positive times");
    const auto env = envelope(model_);
    const double A = sp::fou_variance(H);
    const double tau = std::abs(t1 - t2), tmin = std::min(t1, t2);
    const double wsum = 2 * std::abs(w.wi) + std::abs(w.wa) + std::abs(w.ws);
    const double p0 = 4 * H - env.exponent;

    auto direct = [&](long N) {
        auto tab = table(t1, t2, N);
        std::vector<double> terms(N);
        for (long n = 1; n <= N; ++n) {
            double c = w.wa;
            if (w.ws != 0 && theta != 0) {
                const double sn = std::sin(0.5 * double(n) * theta);
                c += w.ws * sn * sn;
            }
            terms[n - 1] = q_at(n) * (w.wi * tab->inc[n - 1] + c * tab->cross[n - 1]);
        }
        return pairwise_sum(terms);
    };

    SeriesResult res;
    if (opts_.max_modes > 0) {
        res.n_terms = opts_.max_modes;
        res.value = direct(opts_.max_modes);
        return res;
    }

    long need = long(std::ceil(std::sqrt(kVarOnset / tmin)));
    if (tau > 0) need = std::max(need, long(std::ceil(std::sqrt(kCrossOnset / tau))));
    long N = std::max(opts_.n_start, ceil_pow2(need));
    if (N > opts_.n_max) N = opts_.n_max;

    for (;;) {
        const bool expansion_ok = double(N) * N * tmin >= kVarOnset && (tau == 0 || double(N) * N * tau >= kCrossOnset);
        const double d = direct(N);
        double S0 = env.kappa * sp::hurwitz_tail(p0, double(N));
        const double corr = env.correction > 0 ? env.correction * sp::hurwitz_tail(2 + 4 * H, double(N)) : 0.0;
        res.tail_envelope = wsum * A * (S0 + corr);
        auto sin_part = [&](double p) {
            if (theta == 0 || w.ws == 0) return 0.0;
            return 0.5 * env.kappa * (sp::hurwitz_tail(p, double(N)) - sp::cos_power_tail(p, theta, N));
        };
        double tail = 0, resid = 0;
        if (!expansion_ok) {
            resid = res.tail_envelope;
        } else if (tau == 0) {
            // C_n = V_n = A n^{-4H} up to e^{-n^2 t}; Inc_n = 0
            tail = A * (w.wa * S0 + w.ws * sin_part(p0));
            resid = wsum * A * (corr + 2 * std::exp(-double(N) * N * tmin) * S0);
        } else {
            // C_n ~ (1/2) sum_j f_j tau^{2H-2j} n^{-4j}, f_j = prod_{k<2j} (2H - k)
            tail = 2 * w.wi * A * S0;
            const double wc = w.wa - 2 * w.wi;
            double f = 1, first = 0, last = 0;
            const double xN = double(N) * N * tau;
            for (int j = 1; j < 40; ++j) {
                f *= (2 * H - (2 * j - 2)) * (2 * H - (2 * j - 1));
                if (f == 0) {
                    last = 0;
                    break;
                }
                const double coef = 0.5 * f * std::pow(tau, 2 * H - 2 * j);
                const double size = std::abs(0.5 * f) * std::pow(xN, 2 * H - 2 * j);
                if (j == 1) first = size;
                if (j > 1 && size > last) break;
                last = size;
                const double p = 4.0 * j - env.exponent;
                const double Sj = env.kappa * sp::hurwitz_tail(p, double(N));
                tail += coef * (wc * Sj + w.ws * sin_part(p));
                if (size <= 1e-18 * first) break;
            }
            const double cross_scale = first > 0 ? first * S0 / A : 0.0;
            resid = wsum * A * corr + wsum * (last * S0 + 4 * A * std::exp(-double(N) * N * tmin) * S0) +
                    1e-16 * cross_scale;
        }
        res.value = d + tail;
        res.tail = tail;
        res.n_terms = N;
        res.residual_bound = resid;
        res.converged = resid <= opts_.rel_tol * std::abs(res.value);
        if (res.converged || N >= opts_.n_max) break;
        N = std::min(2 * N, opts_.n_max);
    }
    if (!res.converged && opts_.strict)
        throw NumericalError("series did not reach relative tolerance: residual " + format_double(res.residual_bound) +
                             " at N = " + std::to_string(res.n_terms));
    return res;
}

SeriesResult CovarianceEngine::gamma_sq(SpaceTime p, SpaceTime q) const {
    const double theta = circle_distance(p.x, q.x);
    if (p.t == q.t && theta == 0) return {};
    auto r = eval(p.t, q.t, theta, {1.0, 0.0, 4.0});
    const double head = model_.q0 * std::pow(std::abs(p.t - q.t), 2 * model_.H);
    r.value += head;
    r.converged = r.residual_bound <= opts_.rel_tol * std::abs(r.value);
    return r;
}

SeriesResult CovarianceEngine::delta_t_sq(double t, double r) const {
    return gamma_sq({t, 0.0}, {t, r});
}

SeriesResult CovarianceEngine::delta_x_sq(double s, double t) const {
    return gamma_sq({s, 0.0}, {t, 0.0});
}

SeriesResult CovarianceEngine::covariance_direct(SpaceTime p, SpaceTime q) const {
    const double theta = circle_distance(p.x, q.x);
    auto r = eval(p.t, q.t, theta, {0.0, 1.0, -2.0});
    r.value += model_.q0 * fbm_covariance(model_.H, p.t, q.t);
    r.converged = r.residual_bound <= opts_.rel_tol * std::abs(r.value);
    return r;
}

SeriesResult CovarianceEngine::sigma_sq(double t) const { return covariance_direct({t, 0.0}, {t, 0.0}); }

SeriesResult CovarianceEngine::covariance(SpaceTime p, SpaceTime q) const {
    const auto a = sigma_sq(p.t), b = sigma_sq(q.t), g = gamma_sq(p, q);
    SeriesResult r;
    r.value = 0.5 * (a.value + b.value - g.value);
    r.n_terms = std::max({a.n_terms, b.n_terms, g.n_terms});
    r.tail = 0.5 * (a.tail + b.tail - g.tail);
    r.tail_envelope = 0.5 * (a.tail_envelope + b.tail_envelope + g.tail_envelope);
    r.residual_bound = 0.5 * (a.residual_bound + b.residual_bound + g.residual_bound);
    r.converged = a.converged && b.converged && g.converged;
    return r;
}

std::vector<double> CovarianceEngine::gamma_sq_batch(std::span<const SpaceTime> p, std::span<const SpaceTime> q) const {
    require(p.size() == q.size(), "gamma_sq_batch: size mismatch");
    std::vector<double> out(p.size());
    const long n = long(p.size());
#pragma omp parallel for schedule(dynamic, 16) if (opts_.parallel)
    for (long i = 0; i < n; ++i) out[i] = gamma_sq(p[i], q[i]).value;
    return out;
}

SeriesResult delta_t_sq(const SpectrumModel& m, double t, double r, const SeriesOptions& o) {
    return CovarianceEngine(m, o).delta_t_sq(t, r);
}
SeriesResult delta_x_sq(const SpectrumModel& m, double s, double t, const SeriesOptions& o) {
    return CovarianceEngine(m, o).delta_x_sq(s, t);
}
SeriesResult gamma_sq(const SpectrumModel& m, SpaceTime p, SpaceTime q, const SeriesOptions& o) {
    return CovarianceEngine(m, o).gamma_sq(p, q);
}
SeriesResult sigma_sq(const SpectrumModel& m, double t, const SeriesOptions& o) {
    return CovarianceEngine(m, o).sigma_sq(t);
}

namespace {

struct PairMoments {
    double a, b, c, delta;
};

PairMoments pair_moments(const CovarianceEngine& e, SpaceTime p, SpaceTime q) {
    require(!(p.t == q.t && circle_distance(p.x, q.x) == 0), "bivariate density is degenerate at coincident points");
    const auto& m = e.model();
    const double alpha = exponents(m).alpha;
    const double a = e.sigma_sq(p.t).value, b = e.sigma_sq(q.t).value;
    const double g = e.gamma_sq(p, q).value;
    return {a, b, 0.5 * (a + b - g), delta_metric(p, q, alpha, m.H)};
}

double log_density(const PairMoments& pm, std::span<const double> z1, std::span<const double> z2) {
    require(z1.size() == z2.size() && !z1.empty(), "bivariate density: dimension mismatch");
    const double det = pm.a * pm.b - pm.c * pm.c;
    if (!(det > 0)) throw NumericalError("bivariate covariance is not positive definite");
    double ld = 0;
    for (std::size_t i = 0; i < z1.size(); ++i) {
        const double q = (pm.b * z1[i] * z1[i] - 2 * pm.c * z1[i] * z2[i] + pm.a * z2[i] * z2[i]) / det;
        ld += -std::log(2 * pi) - 0.5 * std::log(det) - 0.5 * q;
    }
    return ld;
}

double dist_sq(std::span<const double> z1, std::span<const double> z2) {
    double s = 0;
    for (std::size_t i = 0; i < z1.size(); ++i) s += (z1[i] - z2[i]) * (z1[i] - z2[i]);
    return s;
}

}  // namespace

BivariateBound bivariate_bound(const CovarianceEngine& e, SpaceTime p, SpaceTime q, std::span<const double> z1,
                               std::span<const double> z2, double c_fit) {
    require(c_fit > 0, "bivariate_bound: c_fit must be positive");
    const auto pm = pair_moments(e, p, q);
    const double d = double(z1.size());
    const double bound = c_fit * std::pow(pm.delta, -0.5 * d) * std::exp(-dist_sq(z1, z2) / (c_fit * pm.delta));
    return {bound, std::exp(log_density(pm, z1, z2)), pm.delta};
}

double bivariate_required_constant(const CovarianceEngine& e, SpaceTime p, SpaceTime q, std::span<const double> z1,
                                   std::span<const double> z2) {
    const auto pm = pair_moments(e, p, q);
    const double d = double(z1.size());
    // log c - k / c is increasing in c; solve log c - k / c = L.
    const double L = log_density(pm, z1, z2) + 0.5 * d * std::log(pm.delta);
    const double k = dist_sq(z1, z2) / pm.delta;
    double lo = -200, hi = 200;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid - k * std::exp(-mid) >= L)
            hi = mid;
        else
            lo = mid;
    }
    return std::exp(hi);
}

void MetricTable::write_csv(const std::string& file) const {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + file);
    out << header << '\n';
    char buf[64];
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", row[i]);
            out << (i ? "," : "") << buf;
        }
        out << '\n';
    }
}

}  // namespace fracheat
