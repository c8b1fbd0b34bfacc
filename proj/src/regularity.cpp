#include "fracheat/regularity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>

#include "fracheat/covariance.hpp"
#include "fracheat/errors.hpp"

namespace fracheat {

using std::numbers::pi;

const char* axis_name(Axis a) { return a == Axis::Time ? "time" : "space"; }

Axis parse_axis(const std::string& s) {
    if (s == "time") return Axis::Time;
    if (s == "space") return Axis::Space;
    throw DomainError("unknown axis '" + s + "' (expected time or space)");
}

LogLogFit fit_loglog(std::span<const double> x, std::span<const double> y) {
    require(x.size() == y.size(), "fit_loglog: size mismatch");
    std::set<double> distinct(x.begin(), x.end());
    require(distinct.size() >= 3, "degenerate regression: fewer than 3 distinct lags");
    const double k = double(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        require(x[i] > 0 && y[i] > 0, "fit_loglog: values must be positive");
        const double a = std::log(x[i]), b = std::log(y[i]);
        sx += a;
        sy += b;
        sxx += a * a;
        sxy += a * b;
    }
    LogLogFit f;
    f.slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
    f.intercept = (sy - f.slope * sx) / k;
    double ss = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = std::log(y[i]) - f.intercept - f.slope * std::log(x[i]);
        ss += r * r;
    }
    f.residual = std::sqrt(ss / k);
    return f;
}

double expected_exponent(const SpectrumModel& m, Axis axis) {
    const double a = exponents(m).alpha;
    return axis == Axis::Space ? 2 * a : std::min(a, 2 * m.H);
}

namespace {

void finish(HolderFit& f) {
    const auto ll = fit_loglog(f.lags, f.values);
    f.slope = ll.slope;
    f.intercept = ll.intercept;
    f.residual = ll.residual;
    f.verdict = std::isfinite(f.slope) && std::abs(f.slope - f.expected) <= f.tol;
}

}  // namespace

HolderFit fit_holder_exact(const SpectrumModel& m, const HolderSpec& spec) {
    require(spec.n_lags >= 3, "degenerate regression: fewer than 3 lags");
    require(spec.lag_lo > 0 && spec.lag_hi > spec.lag_lo, "lag range must satisfy 0 < lo < hi");
    if (spec.axis == Axis::Time) {
        require(spec.lag_hi <= spec.t0 / 2, "time lags must not exceed t0/2");
        require(spec.at - spec.lag_hi >= spec.t0, "time increments must stay inside [t0, T]");
    } else {
        require(spec.lag_hi <= pi, "space lags must not exceed pi");
    }
    SeriesOptions o;
    o.max_modes = spec.max_modes;
    CovarianceEngine e(m, o);
    HolderFit f;
    f.axis = spec.axis;
    f.tol = spec.tol;
    f.expected = expected_exponent(m, spec.axis);
    for (int i = 0; i < spec.n_lags; ++i) {
        const double lag = spec.lag_lo * std::pow(spec.lag_hi / spec.lag_lo, double(i) / (spec.n_lags - 1));
        f.lags.push_back(lag);
        f.values.push_back(spec.axis == Axis::Space ? e.delta_t_sq(spec.at, lag).value
                                                    : e.delta_x_sq(spec.at - lag, spec.at).value);
    }
    finish(f);
    return f;
}

HolderFit fit_holder_empirical(std::span<const FieldSample> samples, Axis axis, std::span<const long> lag_steps,
                               double expected, double tol) {
    require(!samples.empty(), "no samples");
    const auto& cfg = *samples[0].config;
    const std::size_t nt = cfg.t_grid.size(), nx = std::size_t(cfg.n_x);
    HolderFit f;
    f.axis = axis;
    f.expected = expected;
    f.tol = tol;
    if (samples.size() < 1000)
        f.warning = "only " + std::to_string(samples.size()) + " replicas; variogram variance is not controlled";
    double dt = 0;
    if (axis == Axis::Time) {
        require(nt >= 2, "time variogram needs at least two times");
        dt = cfg.t_grid[1] - cfg.t_grid[0];
        for (std::size_t j = 1; j < nt; ++j)
            require(std::abs(cfg.t_grid[j] - cfg.t_grid[j - 1] - dt) <= 1e-9 * dt, "time variogram needs a uniform t grid");
    }
    for (long L : lag_steps) {
        require(L >= 1, "lag steps must be positive");
        double acc = 0;
        std::size_t count = 0;
        for (const auto& s : samples)
            for (int c = 0; c < cfg.d; ++c) {
                if (axis == Axis::Space) {
                    require(std::size_t(L) <= nx / 2, "space lag exceeds half the circle");
                    const std::size_t j = nt - 1;
                    for (std::size_t k = 0; k < nx; ++k) {
                        const double d = s(c, j, (k + L) % nx) - s(c, j, k);
                        acc += d * d;
                    }
                    count += nx;
                } else {
                    require(std::size_t(L) < nt, "time lag exceeds the grid");
                    for (std::size_t j = 0; j + L < nt; ++j)
                        for (std::size_t k = 0; k < nx; ++k) {
                            const double d = s(c, j + L, k) - s(c, j, k);
                            acc += d * d;
                        }
                    count += (nt - L) * nx;
                }
            }
        f.lags.push_back(axis == Axis::Space ? 2 * pi * double(L) / double(nx) : dt * double(L));
        f.values.push_back(acc / double(count));
    }
    finish(f);
    return f;
}

double modulus_statistic(const FieldSample& s, double alpha, double H, const ModulusWindow& w) {
    const auto& cfg = *s.config;
    require(w.component >= 0 && w.component < cfg.d, "component out of range");
    require(w.t_first <= w.t_last && w.t_last < cfg.t_grid.size(), "time window out of range");
    require(w.x_stride >= 1 && w.t_stride >= 1, "strides must be positive");
    const std::size_t nx = std::size_t(cfg.n_x);
    const auto xs = x_grid(cfg.n_x);
    auto L = [](double r) { return std::sqrt(std::log1p(1 / r)); };
    const double te = std::min(alpha / 2, H);
    // denominators depend on the index lag only (uniform circle grid)
    std::vector<double> inv_den(nx, 0.0);
    for (std::size_t d = w.x_stride; d < nx; d += w.x_stride) {
        const double r = circle_distance(0.0, xs[d]);
        inv_den[d] = 1 / (std::pow(r, alpha) * L(r));
    }
    double sup_x = 0, sup_t = 0;
    for (std::size_t j = w.t_first; j <= w.t_last; j += w.t_stride) {
        const double* u = &s.values[(std::size_t(w.component) * cfg.t_grid.size() + j) * nx];
        for (std::size_t k = 0; k < nx; k += w.x_stride)
            for (std::size_t l = k + w.x_stride; l < nx; l += w.x_stride)
                sup_x = std::max(sup_x, std::abs(u[k] - u[l]) * inv_den[l - k]);
    }
    for (std::size_t j = w.t_first; j <= w.t_last; j += w.t_stride)
        for (std::size_t i = j + w.t_stride; i <= w.t_last; i += w.t_stride) {
            const double r = cfg.t_grid[i] - cfg.t_grid[j];
            const double den = std::pow(r, te) * L(r);
            for (std::size_t k = 0; k < nx; k += w.x_stride)
                sup_t = std::max(sup_t, std::abs(s(w.component, i, k) - s(w.component, j, k)) / den);
        }
    return sup_x + sup_t;
}

void write_holder_csv(const std::vector<HolderFit>& fits, const std::string& file) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + file);
    out << "axis,lag,value,slope,expected,verdict\n";
    char buf[160];
    for (const auto& f : fits)
        for (std::size_t i = 0; i < f.lags.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%.17g,%.17g,%s\n", axis_name(f.axis), f.lags[i],
                          f.values[i], f.slope, f.expected, f.verdict ? "pass" : "fail");
            out << buf;
        }
}

}  // namespace fracheat
