#include "fracheat/mode_moments.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>

#include "fracheat/errors.hpp"
#include "fracheat/special.hpp"

namespace fracheat {

namespace sp = special;

namespace {

constexpr double kSwitch = 40.0;

void check_mode(double H, long n, double t) {
    require(H > 0 && H < 1, "H must lie in (0,1)");
    require(n >= 1, "mode index must be >= 1");
    require(t > 0, "time must be positive");
}

double isometry_variance(double H, double lambda, double t) {
    require(H > 0.5, "isometry route requires H > 1/2");
    const double a = 2 * H - 1;
    const double top = 2 * lambda * t;
    auto f = [&](double y, double, double) {
        const double x = 0.5 * (top - y);
        return std::exp(-y) * boost::math::tgamma_lower(a, x);
    };
    std::vector<double> pts{0.0};
    for (double y = 1; y < std::min(top, 80.0); y *= 2) pts.push_back(y);
    pts.push_back(std::min(top, 80.0));
    quad::Options o{1e-11, 1e-300, 1e4, true};
    auto r = quad::piecewise(f, pts, o);
    quad::check(r, o, "isometry integral");
    return 2 * H * a * std::pow(lambda, 1 - 2 * H) / (2 * lambda) * r.value;
}

}  // namespace

const char* method_name(ModeMethod m) {
    switch (m) {
        case ModeMethod::Stationary: return "stationary";
        case ModeMethod::Kstar: return "kstar";
        case ModeMethod::Isometry: return "isometry";
        case ModeMethod::MonteCarlo: return "mc_oracle";
    }
    return "?";
}

double ou_variance(double H, double lambda, double t) {
    if (lambda == 0) return std::pow(t, 2 * H);
    const double x = lambda * t;
    const double A = sp::fou_variance(H);
    const double e = std::exp(-x);
    const double one_minus = -std::expm1(-x);
    return std::pow(lambda, -2 * H) * (A * one_minus * one_minus + 2 * e * sp::fou_gap(H, x));
}

double ou_cross(double H, double lambda, double ti, double tj) {
    double s = std::min(ti, tj), t = std::max(ti, tj);
    if (s == t) return ou_variance(H, lambda, t);
    if (lambda == 0) return fbm_covariance(H, t, s);
    const double A = sp::fou_variance(H);
    const double xs = lambda * s, xt = lambda * t, xr = lambda * (t - s);
    double v;
    if (xt <= kSwitch) {
        v = A * std::expm1(-xs) * std::expm1(-xt) - sp::fou_gap(H, xr) +
            std::exp(-xs) * sp::fou_gap(H, xt) + std::exp(-xt) * sp::fou_gap(H, xs);
    } else {
        v = sp::fou_autocov(H, xr) - std::exp(-xs) * sp::fou_autocov(H, xt) -
            std::exp(-xt) * sp::fou_autocov(H, xs) + std::exp(-xs - xt) * A;
    }
    return std::pow(lambda, -2 * H) * v;
}

double ou_increment(double H, double lambda, double s, double t) {
    if (t < s) std::swap(s, t);
    if (s == t) return 0.0;
    if (lambda == 0) return std::pow(t - s, 2 * H);
    const double A = sp::fou_variance(H);
    const double xs = lambda * s, xt = lambda * t, xr = lambda * (t - s);
    const double de = std::exp(-xs) * std::expm1(-xr);
    const double dC = sp::fou_gap(H, xs) - sp::fou_gap(H, xt);
    return std::pow(lambda, -2 * H) * (2 * sp::fou_gap(H, xr) - 2 * de * dC + de * de * A);
}

PiecewiseExp truncated_mode_integrand(double lambda, double t) {
    return PiecewiseExp{{ExpPiece{0.0, t, {ExpTerm{1.0, lambda, t}}}}};
}

namespace {

// Integrand of X(ti) seen from horizon max(ti, tj).
PiecewiseExp horizon_integrand(double lambda, double ti, double tj) {
    return ti < tj ? truncated_mode_integrand(lambda, ti) : mode_integrand(lambda, ti);
}

}  // namespace

PiecewiseExp increment_integrand(double lambda, double s, double t) {
    PiecewiseExp p;
    if (s > 0) p.pieces.push_back({0.0, s, {{1.0, lambda, t}, {-1.0, lambda, s}}});
    p.pieces.push_back({s, INFINITY, {{1.0, lambda, t}}});
    return p;
}

double mode_variance(double H, long n, double t, ModeMethod m) {
    check_mode(H, n, t);
    const double lambda = double(n) * double(n);
    switch (m) {
        case ModeMethod::Stationary: return ou_variance(H, lambda, t);
        case ModeMethod::Isometry: return isometry_variance(H, lambda, t);
        case ModeMethod::Kstar: {
            auto phi = mode_integrand(lambda, t);
            return kstar_inner(H, phi, phi, t).value;
        }
        case ModeMethod::MonteCarlo: {
            auto phi = mode_integrand(lambda, t);
            return rs_oracle(H, t, McDefaults::grid_steps, McDefaults::paths, McDefaults::seed,
                             {{phi, phi}})[0]
                .mean;
        }
    }
    return 0;
}

double mode_cross_moment(double H, long n, double ti, double tj, ModeMethod m) {
    check_mode(H, n, std::min(ti, tj));
    const double lambda = double(n) * double(n);
    const double T = std::max(ti, tj);
    switch (m) {
        case ModeMethod::Stationary: return ou_cross(H, lambda, ti, tj);
        case ModeMethod::Kstar: {
            auto f = horizon_integrand(lambda, ti, tj), g = horizon_integrand(lambda, tj, ti);
            return kstar_inner(H, f, g, T).value;
        }
        case ModeMethod::MonteCarlo: {
            auto f = horizon_integrand(lambda, ti, tj), g = horizon_integrand(lambda, tj, ti);
            return rs_oracle(H, T, McDefaults::grid_steps, McDefaults::paths, McDefaults::seed,
                             {{f, g}})[0]
                .mean;
        }
        case ModeMethod::Isometry: break;
    }
    throw DomainError("mode_cross_moment: unsupported method");
}

double mode_increment_moment(double H, long n, double s, double t, ModeMethod m) {
    require(s > 0 && s <= t, "mode_increment_moment requires 0 < s <= t");
    check_mode(H, n, t);
    if (s == t) return 0.0;
    const double lambda = double(n) * double(n);
    switch (m) {
        case ModeMethod::Stationary: return ou_increment(H, lambda, s, t);
        case ModeMethod::Kstar: {
            auto h = increment_integrand(lambda, s, t);
            return kstar_inner(H, h, h, t).value;
        }
        case ModeMethod::MonteCarlo: {
            auto h = increment_integrand(lambda, s, t);
            return rs_oracle(H, t, McDefaults::grid_steps, McDefaults::paths, McDefaults::seed,
                             {{h, h}})[0]
                .mean;
        }
        case ModeMethod::Isometry: break;
    }
    throw DomainError("mode_increment_moment: unsupported method");
}

namespace {

// (1/h) int over each grid cell of phi, exact for exponential pieces.
std::vector<double> cell_averages(const PiecewiseExp& phi, const std::vector<double>& grid) {
    std::vector<double> w(grid.size() - 1, 0.0);
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        const double a = grid[i], b = grid[i + 1];
        double acc = 0;
        for (const auto& pc : phi.pieces) {
            const double lo = std::max(a, pc.lo), hi = std::min(b, pc.hi);
            if (!(hi > lo)) continue;
            for (const auto& t : pc.terms) {
                if (t.rate == 0) {
                    acc += t.coef * (hi - lo);
                } else {
                    acc += t.coef * std::exp(-t.rate * (t.anchor - hi)) * (-std::expm1(-t.rate * (hi - lo))) /
                           t.rate;
                }
            }
        }
        w[i] = acc / (b - a);
    }
    return w;
}

}  // namespace

std::vector<McEstimate> rs_oracle(double H, double T, std::size_t grid_steps, std::size_t n_paths,
                                  std::uint64_t seed, const std::vector<RsPair>& pairs) {
    require(grid_steps >= 2 && n_paths >= 2, "rs_oracle needs at least two steps and paths");
    const auto grid = uniform_grid(T, grid_steps);
    FbmSampler sampler(H, grid);
    const std::size_t k = pairs.size();
    std::vector<std::vector<double>> wf(k), wg(k);
    for (std::size_t j = 0; j < k; ++j) {
        wf[j] = cell_averages(pairs[j].f, grid);
        wg[j] = cell_averages(pairs[j].g, grid);
    }
    // Per-path products are stored so the reduction order is fixed.
    std::vector<double> prod(n_paths * k);
#pragma omp parallel
    {
        std::vector<double> path(grid.size()), inc(grid_steps);
#pragma omp for schedule(static)
        for (std::size_t p = 0; p < n_paths; ++p) {
            RandomStream rng(seed, derive_stream({0x55, p}));
            sampler.sample(rng, path);
            for (std::size_t i = 0; i < grid_steps; ++i) inc[i] = path[i + 1] - path[i];
            for (std::size_t j = 0; j < k; ++j) {
                double a = 0, b = 0;
                for (std::size_t i = 0; i < grid_steps; ++i) {
                    a += wf[j][i] * inc[i];
                    b += wg[j][i] * inc[i];
                }
                prod[p * k + j] = a * b;
            }
        }
    }
    std::vector<double> sum(k, 0.0), sum2(k, 0.0);
    for (std::size_t p = 0; p < n_paths; ++p)
        for (std::size_t j = 0; j < k; ++j) {
            sum[j] += prod[p * k + j];
            sum2[j] += prod[p * k + j] * prod[p * k + j];
        }
    std::vector<McEstimate> out(k);
    const double n = double(n_paths);
    for (std::size_t j = 0; j < k; ++j) {
        out[j].mean = sum[j] / n;
        const double var = std::max(0.0, (sum2[j] / n - out[j].mean * out[j].mean) * n / (n - 1));
        out[j].se = std::sqrt(var / n);
    }
    return out;
}

}  // namespace fracheat
