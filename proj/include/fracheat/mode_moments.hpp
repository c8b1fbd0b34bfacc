#pragma once
#include <cstdint>
#include <vector>

#include "fracheat/fbm.hpp"

namespace fracheat {

// Second moments of X_n(t) = int_0^t e^{-n^2 (t-r)} dB^H(r).
enum class ModeMethod { Stationary, Kstar, Isometry, MonteCarlo };
const char* method_name(ModeMethod m);

double mode_variance(double H, long n, double t, ModeMethod m = ModeMethod::Stationary);
// E[X_n(ti) X_n(tj)]
double mode_cross_moment(double H, long n, double ti, double tj,
                         ModeMethod m = ModeMethod::Stationary);
// E[(X_n(t) - X_n(s))^2], 0 < s <= t
double mode_increment_moment(double H, long n, double s, double t,
                             ModeMethod m = ModeMethod::Stationary);

// Same quantities for a real decay rate lambda >= 0 (lambda = 0 is fBm itself).
double ou_variance(double H, double lambda, double t);
double ou_cross(double H, double lambda, double ti, double tj);
double ou_increment(double H, double lambda, double s, double t);

// Integrands of the three moments in piecewise-exponential form; the
// truncated variant vanishes after t.
PiecewiseExp increment_integrand(double lambda, double s, double t);
PiecewiseExp truncated_mode_integrand(double lambda, double t);

struct McEstimate {
    double mean = 0;
    double se = 0;
};

// Riemann-Stieltjes Monte Carlo: for each pair (f, g) estimates
// E[(int f dB^H)(int g dB^H)] with cell-averaged integrands on a uniform
// grid of [0, T], all pairs sharing the same sampled paths.
struct RsPair {
    PiecewiseExp f, g;
};
std::vector<McEstimate> rs_oracle(double H, double T, std::size_t grid_steps, std::size_t n_paths,
                                  std::uint64_t seed, const std::vector<RsPair>& pairs);

// Defaults of the Monte Carlo route of mode_variance.
struct McDefaults {
    static constexpr std::size_t paths = 20000;
    static constexpr std::size_t grid_steps = 4096;
    static constexpr std::uint64_t seed = 20240611;
};

}  // namespace fracheat
