#pragma once
#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fracheat/covariance.hpp"
#include "fracheat/spectral_model.hpp"

namespace fracheat {

enum class ModeSampler { ExactGaussian, Pathwise };
const char* sampler_name(ModeSampler s);
ModeSampler parse_sampler(const std::string& s);  // "exact" | "pathwise"

struct SimConfig {
    SpectrumModel model;
    int d = 1;
    long n_modes = 32;
    std::vector<double> t_grid;  // increasing, positive
    long n_x = 65;               // x_k = 2 pi k / n_x
    std::uint64_t seed = 1;
    ModeSampler sampler = ModeSampler::ExactGaussian;
    int refine = 16;  // pathwise: fine steps per coarse step, at least
};

std::vector<double> x_grid(long n_x);

// values laid out component-major, then time, then space.
struct FieldSample {
    std::shared_ptr<const SimConfig> config;
    std::uint64_t replica = 0;
    std::vector<double> values;

    double operator()(int comp, std::size_t j, std::size_t k) const {
        return values[(std::size_t(comp) * config->t_grid.size() + j) * config->n_x + k];
    }
};

// E[X_n(t_i) X_n(t_j)] over the grid; n = 0 gives the fBm covariance.
Eigen::MatrixXd mode_process_cross_cov(double H, long n, const std::vector<double>& t_grid);

// Mode coefficients of one component at one time: u(x) = a_0 + sum_n a_n cos(nx) + b_n sin(nx).
double assemble_naive(std::span<const double> a, std::span<const double> b, double x);
// Same on the uniform grid of n_x points via a real inverse FFT.
std::vector<double> assemble_fft(std::span<const double> a, std::span<const double> b, long n_x);

class FieldSimulator {
public:
    explicit FieldSimulator(SimConfig c);
    ~FieldSimulator();
    FieldSimulator(const FieldSimulator&) = delete;
    FieldSimulator& operator=(const FieldSimulator&) = delete;

    const SimConfig& config() const { return *cfg_; }
    // Replica r; independent of thread count and of other replicas.
    FieldSample sample(std::uint64_t replica) const;
    // Mode coefficients a[c][j][n], b[c][j][n] of replica r (n = 0..N).
    void coefficients(std::uint64_t replica, std::vector<double>& a, std::vector<double>& b) const;
    // Fine-grid size used by the pathwise sampler.
    std::size_t pathwise_steps() const { return fine_steps_; }

private:
    struct Impl;
    std::shared_ptr<const SimConfig> cfg_;
    std::unique_ptr<Impl> impl_;
    std::size_t fine_steps_ = 0;
};

std::vector<FieldSample> simulate(const SimConfig& c, std::size_t n_replicas, std::uint64_t first = 0);

// Exact variance of the truncated field at time t.
double truncated_variance(const SpectrumModel& m, long n_modes, double t);

void write_field_csv(const FieldSample& s, const std::string& file);

}  // namespace fracheat
