#pragma once
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "fracheat/spectral_model.hpp"

namespace fracheat {

struct SpaceTime {
    double t, x;
};

// Distance on the circle of length 2 pi, in [0, pi].
double circle_distance(double x, double y);

// |x - y|^{2 alpha} + |t - s|^{alpha ^ 2H} with circle distance in space.
double delta_metric(SpaceTime p, SpaceTime q, double alpha, double H);

struct SeriesOptions {
    long n_start = 1024;
    long n_max = 1L << 17;
    double rel_tol = 1e-8;
    // > 0: plain partial sum over n <= max_modes, no tail (truncated fields).
    long max_modes = 0;
    bool parallel = true;
    // Throw NumericalError when rel_tol is not reached by n_max.
    bool strict = false;
};

struct SeriesResult {
    double value = 0;
    long n_terms = 0;
    double tail = 0;            // analytic tail included in value
    double tail_envelope = 0;   // crude bound sum_{n>N} q_n C n^{-4H}
    double residual_bound = 0;  // bound on the error of value
    bool converged = true;
};

// Upper bound on the variance carried by modes n > N:
// 2 A sum_{n>N} q_n n^{-4H}, A = H Gamma(2H) (both the cosine and sine process).
double truncation_tail(const SpectrumModel& m, long N);

// Second moments of the solution field. Each quantity is
//   head(q_0) + sum_n q_n [wi Inc_n + C_n (wa + ws sin^2(n theta / 2))]
// with the mode moments from the stationary identity, summed directly up
// to N and completed by an analytic tail from the large-n expansion.
class CovarianceEngine {
public:
    explicit CovarianceEngine(SpectrumModel m, SeriesOptions o = {});
    ~CovarianceEngine();

    const SpectrumModel& model() const { return model_; }
    const SeriesOptions& options() const { return opts_; }

    SeriesResult gamma_sq(SpaceTime p, SpaceTime q) const;
    SeriesResult delta_t_sq(double t, double r) const;
    SeriesResult delta_x_sq(double s, double t) const;
    SeriesResult sigma_sq(double t) const;
    SeriesResult covariance(SpaceTime p, SpaceTime q) const;
    // Direct series for the covariance without polarization.
    SeriesResult covariance_direct(SpaceTime p, SpaceTime q) const;

    // Batched gamma_sq, parallel over pairs when options().parallel.
    std::vector<double> gamma_sq_batch(std::span<const SpaceTime> p, std::span<const SpaceTime> q) const;

private:
    struct Weights {
        double wi, wa, ws;
    };
    struct PairTable;
    SeriesResult eval(double t1, double t2, double theta, Weights w) const;
    std::shared_ptr<const PairTable> table(double t1, double t2, long N) const;
    double q_at(long n) const;

    SpectrumModel model_;
    SeriesOptions opts_;
    std::vector<double> q_;  // q_1 .. q_{n_max}
    mutable std::mutex mu_;
    mutable std::map<std::pair<double, double>, std::shared_ptr<const PairTable>> cache_;
};

// Free-function forms with a throwaway engine.
SeriesResult delta_t_sq(const SpectrumModel& m, double t, double r, const SeriesOptions& o = {});
SeriesResult delta_x_sq(const SpectrumModel& m, double s, double t, const SeriesOptions& o = {});
SeriesResult gamma_sq(const SpectrumModel& m, SpaceTime p, SpaceTime q, const SeriesOptions& o = {});
SeriesResult sigma_sq(const SpectrumModel& m, double t, const SeriesOptions& o = {});

struct BivariateBound {
    double bound;
    double exact_density;
    double delta;
};

// Gaussian pair density of (u(p), u(q)) at (z1, z2) against
// c Delta^{-d/2} exp(-|z1 - z2|^2 / (c Delta)).
BivariateBound bivariate_bound(const CovarianceEngine& e, SpaceTime p, SpaceTime q,
                               std::span<const double> z1, std::span<const double> z2, double c_fit);
// Smallest c making the bound hold at one probe.
double bivariate_required_constant(const CovarianceEngine& e, SpaceTime p, SpaceTime q,
                                   std::span<const double> z1, std::span<const double> z2);

// Rows of a metric table, written as CSV with the given header.
struct MetricTable {
    std::string header;
    std::vector<std::vector<double>> rows;
    void write_csv(const std::string& file) const;
};

// Sum in pairs; reproducible regardless of how the terms were produced.
double pairwise_sum(std::span<const double> v);

}  // namespace fracheat
