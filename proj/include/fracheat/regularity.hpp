#pragma once
#include <span>
#include <string>
#include <vector>

#include "fracheat/field.hpp"
#include "fracheat/spectral_model.hpp"

namespace fracheat {

enum class Axis { Time, Space };
const char* axis_name(Axis a);
Axis parse_axis(const std::string& s);

struct LogLogFit {
    double slope, intercept, residual;  // residual: RMS of log deviations
};
// OLS of log y on log x; needs at least 3 distinct x.
LogLogFit fit_loglog(std::span<const double> x, std::span<const double> y);

struct HolderFit {
    Axis axis;
    std::vector<double> lags, values;
    double slope = 0, intercept = 0, residual = 0;
    double expected = 0, tol = 0.05;
    bool verdict = false;
    std::string warning;
};

// 2 alpha in space, alpha ^ 2H in time.
double expected_exponent(const SpectrumModel& m, Axis axis);

struct HolderSpec {
    Axis axis = Axis::Space;
    double lag_lo = 1e-3, lag_hi = 1e-1;
    int n_lags = 12;
    double at = 1.0;  // time of the spatial increments / end time of the temporal ones
    double t0 = 0.5;  // time lags must stay below t0 / 2 and at - lag >= t0
    double tol = 0.05;
    long max_modes = 0;  // > 0: metric of the field truncated at this many modes
};

HolderFit fit_holder_exact(const SpectrumModel& m, const HolderSpec& spec);

// Empirical variogram over replicas, components and base points, at grid
// lags lag_steps (multiples of dx in space, of the uniform dt in time).
HolderFit fit_holder_empirical(std::span<const FieldSample> samples, Axis axis, std::span<const long> lag_steps,
                               double expected, double tol = 0.1);

struct ModulusWindow {
    int component = 0;
    std::size_t t_first = 0, t_last = 0;  // inclusive time-index range
    std::size_t x_stride = 1;             // use every x_stride-th x point
    std::size_t t_stride = 1;
};

// sup |u(t,x) - u(t,y)| / (|x-y|^a L(|x-y|)) + sup |u(t,x) - u(s,x)| / (|t-s|^{(a/2)^H} L(|t-s|)),
// L(r) = log^{1/2}(1 + 1/r), suprema over grid pairs inside the window.
double modulus_statistic(const FieldSample& s, double alpha, double H, const ModulusWindow& w);

void write_holder_csv(const std::vector<HolderFit>& fits, const std::string& file);

}  // namespace fracheat
