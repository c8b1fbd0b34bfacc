#pragma once
#include <Eigen/Dense>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace fracheat {

constexpr double kInfinite = std::numeric_limits<double>::infinity();

struct PointCloud {
    int d = 1;
    std::vector<double> coords;  // row-major, d per point
    double h = 0.0;              // each point stands for a ball of radius h

    std::size_t size() const { return coords.size() / std::size_t(d); }
    std::span<const double> point(std::size_t i) const { return {coords.data() + i * d, std::size_t(d)}; }
    double distance(std::size_t i, std::size_t j) const;
    double diameter() const;
};

PointCloud read_point_csv(const std::string& file, double h = 0.0);
// Uniform discretization of [lo, hi] with n points at cell centres, h = half cell.
PointCloud segment_cloud(double lo, double hi, std::size_t n);

struct EnergyKernel {
    double beta = 0.0;
    double N0 = 1.0;  // log kernel scale, above every distance in play
};

// r^{-beta}, log(N0 / r), or 1; +inf at r = 0 when beta >= 0.
double k_beta(const EnergyKernel& k, double r);

// N0 = e * max(N, diam).
double default_N0(double N, double diameter);

// Mean kernel between two independent uniform points of one d-ball of radius h.
double self_energy(const EnergyKernel& k, int d, double h);

struct DiscreteMeasure {
    std::vector<double> weights;
};

Eigen::MatrixXd energy_matrix(const PointCloud& c, const EnergyKernel& k);
// +inf when an atom of positive weight has infinite self-energy.
double energy(const PointCloud& c, const DiscreteMeasure& mu, const EnergyKernel& k);

struct SolverOptions {
    double gap_tol = 1e-8;
    long max_iter = 200000;
};

struct CapacityResult {
    double cap = 0;
    double energy = kInfinite;
    DiscreteMeasure minimizer;
    long iterations = 0;
    double gap = 0;
    double min_eigenvalue = 0;  // of the energy matrix
    std::string method;         // "trivial", "frank-wolfe", "projected-gradient"
};

// Cap = 1 / inf_mu I(mu) over probability measures on the cloud.
CapacityResult capacity(const PointCloud& c, const EnergyKernel& k, const SolverOptions& o = {});

// Greedy farthest-point covers with radius <= eps; sum of (2 r_i)^beta
// per eps. beta < 0 gives +inf.
std::vector<double> hausdorff_estimate(const PointCloud& c, double beta, std::span<const double> eps_schedule);

struct PrelCheck {
    double lhs = 0, rhs_kernel = 0, ratio = 0;
    double index = 0;          // d - (1/alpha + 2/(alpha ^ 2H))
    double normalization = 0;  // coefficient of 2 ln(1/a) in lhs at the critical d
};

// int_I int_I int_J int_J Delta^{-d/2} exp(-a^2 / Delta), reduced to a 2-D
// integral over the lags, against K_{index}(a) with N0 = e N.
PrelCheck prel_integral_check(double a, double I_len, double J_len, double alpha, double H, double d, double N = 1.0);

}  // namespace fracheat
