#pragma once

namespace fracheat::special {

// Stationary autocovariance of the unit-rate fractional Ornstein-Uhlenbeck
// process Y(t) = int_{-inf}^t e^{-(t-r)} dB^H(r):
//   C(x) = E[Y(t) Y(t+x)],  C(0) = H * Gamma(2H).
double fou_variance(double H);
double fou_autocov(double H, double x);
// C(0) - C(x), accurate for small x where the difference cancels.
double fou_gap(double H, double x);

// sum_{n > N} n^{-p}, p > 1.
double hurwitz_tail(double p, double N);
// sum_{n >= 1} cos(n r) n^{-p}, p > 1.
double cos_power_sum(double p, double r);
// sum_{n > N} cos(n r) n^{-p}.
double cos_power_tail(double p, double r, long N);

}  // namespace fracheat::special
