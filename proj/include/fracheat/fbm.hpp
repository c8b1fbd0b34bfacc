#pragma once
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fracheat/quadrature.hpp"
#include "fracheat/rng.hpp"

namespace fracheat {

double fbm_covariance(double H, double t, double s);

enum class FbmMethod { Auto, Circulant, Cholesky };
const char* method_name(FbmMethod m);

struct FbmPath {
    double H = 0.5;
    std::vector<double> grid;
    std::vector<double> values;
    std::uint64_t seed = 0;
    std::uint64_t index = 0;
    FbmMethod method = FbmMethod::Auto;
};

// Reusable exact sampler for fBm on a fixed grid starting at 0. Uniform grids
// with at least 64 points use circulant embedding of fractional Gaussian
// noise; small, non-uniform, or non-embeddable grids use dense Cholesky.
class FbmSampler {
public:
    FbmSampler(double H, std::vector<double> grid, FbmMethod method = FbmMethod::Auto);
    ~FbmSampler();
    FbmSampler(const FbmSampler&) = delete;
    FbmSampler& operator=(const FbmSampler&) = delete;

    void sample(RandomStream& rng, std::span<double> out) const;
    FbmMethod method() const { return method_; }
    const std::vector<double>& grid() const { return grid_; }
    // Smallest circulant eigenvalue relative to the largest (diagnostic).
    double embedding_margin() const { return margin_; }

private:
    struct Circulant;
    void build_cholesky();

    double H_;
    std::vector<double> grid_;
    FbmMethod method_;
    double margin_ = 0.0;
    std::unique_ptr<Circulant> circ_;
    std::vector<double> chol_;  // packed lower triangle
};

bool is_uniform_grid(std::span<const double> grid, double rel_tol = 1e-12);
std::vector<double> uniform_grid(double T, std::size_t n_steps);

// Path p is drawn from substream (seed, p), independent of thread count.
std::vector<FbmPath> sample_fbm(double H, const std::vector<double>& grid, std::size_t n_paths,
                                std::uint64_t seed, FbmMethod method = FbmMethod::Auto);
void write_path_csv(const FbmPath& path, const std::string& file);

// Volterra kernel of fBm over Brownian motion.
double kernel_cH(double H);
double kernel_K(double H, double t, double s);
double kernel_dK(double H, double t, double s);

// Deterministic integrand built from exponential pieces: on [lo, hi) the
// value is sum_j coef_j * exp(-rate_j * (anchor_j - r)); zero elsewhere.
struct ExpTerm {
    double coef, rate, anchor;
};
struct ExpPiece {
    double lo, hi;
    std::vector<ExpTerm> terms;
};
struct PiecewiseExp {
    std::vector<ExpPiece> pieces;

    double operator()(double r) const;
    // phi(s + v) - phi(s), free of cancellation inside a piece.
    double diff(double s, double v) const;
    std::vector<double> anchors() const;
    double scale() const;  // shortest feature length
};
// e^{-lambda (t - r)} for r >= 0. The operator K*_t only reads [0, t], so
// the open-ended support avoids a spurious jump at the horizon.
PiecewiseExp mode_integrand(double lambda, double t);

// General integrand: callable plus the points and length scale where it varies.
struct FunctionIntegrand {
    std::function<double(double)> f;
    std::vector<double> anchor_points;
    double length_scale = 1.0;

    double operator()(double r) const { return f(r); }
    double diff(double s, double v) const { return f(s + v) - f(s); }
    std::vector<double> anchors() const { return anchor_points; }
    double scale() const { return length_scale; }
};

struct KstarOptions {
    quad::Options quad{1e-9, 1e-15, 1e4, true};
};

// (K*_t phi)(s) for 0 < s < t; L = t - s passed separately for precision.
quad::Result kstar_apply(double H, const PiecewiseExp& phi, double t, double s,
                         const KstarOptions& o = {});
quad::Result kstar_apply(double H, const FunctionIntegrand& phi, double t, double s,
                         const KstarOptions& o = {});
quad::Result kstar_apply_gap(double H, const PiecewiseExp& phi, double t, double s, double L,
                             const KstarOptions& o = {});

// int_0^t (K*_t f)(s) (K*_t g)(s) ds, the covariance of the Wiener integrals.
quad::Result kstar_inner(double H, const PiecewiseExp& f, const PiecewiseExp& g, double t,
                         const KstarOptions& o = {});
quad::Result kstar_inner(double H, const FunctionIntegrand& f, const FunctionIntegrand& g,
                         double t, const KstarOptions& o = {});

}  // namespace fracheat
