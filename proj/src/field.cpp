#include "fracheat/field.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <numbers>

#include "fracheat/errors.hpp"
#include "fracheat/fbm.hpp"
#include "fracheat/fft.hpp"
#include "fracheat/mode_moments.hpp"
#include "fracheat/rng.hpp"

namespace fracheat {

using std::numbers::pi;

namespace {

constexpr std::uint64_t kFieldTag = 0xf1e1d;
// The pathwise fine step keeps lambda_max * h at or below this value.
constexpr double kMaxRateStep = 0.1;
constexpr std::size_t kMaxFineSteps = std::size_t(1) << 20;

Eigen::MatrixXd cholesky_with_jitter(const Eigen::MatrixXd& S, const char* what) {
    const double scale = S.diagonal().cwiseAbs().maxCoeff();
    for (double jitter : {0.0, 1e-14, 1e-13, 1e-12, 1e-11, 1e-10}) {
        Eigen::MatrixXd M = S;
        M.diagonal().array() += jitter * scale;
        Eigen::LLT<Eigen::MatrixXd> llt(M);
        if (llt.info() == Eigen::Success) return llt.matrixL();
    }
    throw NumericalError(std::string(what) + ": covariance is not positive definite even with jitter 1e-10");
}

}  // namespace

const char* sampler_name(ModeSampler s) { return s == ModeSampler::Pathwise ? "pathwise" : "exact"; }

ModeSampler parse_sampler(const std::string& s) {
    if (s == "exact" || s == "exact_gaussian") return ModeSampler::ExactGaussian;
    if (s == "pathwise") return ModeSampler::Pathwise;
    throw DomainError("unknown mode sampler '" + s + "' (expected exact or pathwise)");
}

std::vector<double> x_grid(long n_x) {
    std::vector<double> x(n_x);
    for (long k = 0; k < n_x; ++k) x[k] = 2 * pi * double(k) / double(n_x);
    return x;
}

Eigen::MatrixXd mode_process_cross_cov(double H, long n, const std::vector<double>& t_grid) {
    require(n >= 0, "mode index must be >= 0");
    const std::size_t m = t_grid.size();
    for (std::size_t i = 0; i < m; ++i)
        require(t_grid[i] > 0 && (i == 0 || t_grid[i] > t_grid[i - 1]), "t grid must be positive and increasing");
    Eigen::MatrixXd S(m, m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            const double v = n == 0 ? fbm_covariance(H, t_grid[i], t_grid[j])
                                    : mode_cross_moment(H, n, t_grid[i], t_grid[j]);
            S(i, j) = S(j, i) = v;
        }
    if (!S.isApprox(S.transpose(), 1e-12)) throw NumericalError("mode covariance is not symmetric");
    return S;
}

double assemble_naive(std::span<const double> a, std::span<const double> b, double x) {
    double u = a[0];
    for (std::size_t n = 1; n < a.size(); ++n) u += a[n] * std::cos(double(n) * x) + b[n] * std::sin(double(n) * x);
    return u;
}

namespace {

struct C2R {
    long n;
    fftw_plan plan = nullptr;
    explicit C2R(long n_x) : n(n_x) {
        auto* in = fftw_alloc_complex(n / 2 + 1);
        auto* out = fftw_alloc_real(n);
        {
            std::lock_guard lk(fftw_planner_mutex());
            plan = fftw_plan_dft_c2r_1d(int(n), in, out, FFTW_ESTIMATE);
        }
        fftw_free(in);
        fftw_free(out);
    }
    ~C2R() {
        std::lock_guard lk(fftw_planner_mutex());
        fftw_destroy_plan(plan);
    }
    // out[k] = a_0 + sum_n a_n cos(n x_k) + b_n sin(n x_k)
    void run(std::span<const double> a, std::span<const double> b, double* out) const {
        const std::size_t h = n / 2 + 1;
        auto* in = fftw_alloc_complex(h);
        auto* tmp = fftw_alloc_real(n);
        for (std::size_t m = 0; m < h; ++m) in[m][0] = in[m][1] = 0.0;
        in[0][0] = a[0];
        for (std::size_t m = 1; m < a.size(); ++m) {
            in[m][0] = 0.5 * a[m];
            in[m][1] = -0.5 * b[m];
        }
        fftw_execute_dft_c2r(plan, in, tmp);
        std::copy(tmp, tmp + n, out);
        fftw_free(in);
        fftw_free(tmp);
    }
};

}  // namespace

std::vector<double> assemble_fft(std::span<const double> a, std::span<const double> b, long n_x) {
    require(a.size() == b.size() && !a.empty(), "assemble_fft: coefficient size mismatch");
    require(n_x >= 2 * long(a.size() - 1) + 1, "assemble_fft: x grid below the Nyquist size 2N + 1");
    C2R plan(n_x);
    std::vector<double> out(n_x);
    plan.run(a, b, out.data());
    return out;
}

struct FieldSimulator::Impl {
    std::vector<Eigen::MatrixXd> chol;  // exact sampler, n = 0..N
    std::vector<double> sqrt_q;         // n = 0..N
    std::unique_ptr<FbmSampler> fbm;    // pathwise sampler
    std::vector<std::size_t> fine_index;
    std::vector<double> fine_grid;
    std::unique_ptr<C2R> c2r;
};

FieldSimulator::FieldSimulator(SimConfig c)
    : cfg_(std::make_shared<const SimConfig>(std::move(c))), impl_(std::make_unique<Impl>()) {
    const auto& cfg = *cfg_;
    const auto rep = existence_margin(cfg.model);
    require(rep.convergent, rep.reason);
    require(cfg.d >= 1, "component count d must be >= 1");
    require(cfg.n_modes >= 1, "N_modes must be >= 1");
    require(!cfg.t_grid.empty(), "t grid is empty");
    require(cfg.n_x >= 2 * cfg.n_modes + 1, "x grid of " + std::to_string(cfg.n_x) +
                                                " points violates the Nyquist size 2 N_modes + 1 = " +
                                                std::to_string(2 * cfg.n_modes + 1));
    for (std::size_t i = 0; i < cfg.t_grid.size(); ++i)
        require(cfg.t_grid[i] > 0 && (i == 0 || cfg.t_grid[i] > cfg.t_grid[i - 1]),
                "t grid must be positive and strictly increasing");
    const double H = cfg.model.H;
    const long N = cfg.n_modes;
    impl_->sqrt_q.resize(N + 1);
    impl_->sqrt_q[0] = std::sqrt(cfg.model.q0);
    for (long n = 1; n <= N; ++n) impl_->sqrt_q[n] = std::sqrt(q_coeff(cfg.model, n));

    if (cfg.sampler == ModeSampler::ExactGaussian) {
        impl_->chol.resize(N + 1);
        for (long n = 0; n <= N; ++n) {
            if (impl_->sqrt_q[n] == 0) continue;
            impl_->chol[n] = cholesky_with_jitter(mode_process_cross_cov(H, n, cfg.t_grid), "mode process");
        }
    } else {
        require(cfg.refine >= 1, "refine factor must be >= 1");
        double step = cfg.t_grid[0];
        for (std::size_t i = 1; i < cfg.t_grid.size(); ++i) step = std::min(step, cfg.t_grid[i] - cfg.t_grid[i - 1]);
        const double T = cfg.t_grid.back();
        std::size_t M = std::size_t(cfg.refine) * std::size_t(std::ceil(T / step - 1e-9));
        const double lmax = double(N) * double(N);
        while (lmax * T / double(M) > kMaxRateStep && M < kMaxFineSteps) M *= 2;
        const double h = T / double(M);
        for (double t : cfg.t_grid) {
            const double k = std::round(t / h);
            require(std::abs(k * h - t) <= 1e-9 * T,
                    "pathwise sampler needs every grid time on the lattice of step " + format_double(h));
            impl_->fine_index.push_back(std::size_t(k));
        }
        impl_->fine_grid = uniform_grid(T, M);
        impl_->fbm = std::make_unique<FbmSampler>(H, impl_->fine_grid);
        fine_steps_ = M;
    }
    impl_->c2r = std::make_unique<C2R>(cfg.n_x);
}

FieldSimulator::~FieldSimulator() = default;

void FieldSimulator::coefficients(std::uint64_t replica, std::vector<double>& a, std::vector<double>& b) const {
    const auto& cfg = *cfg_;
    const long N = cfg.n_modes;
    const std::size_t nt = cfg.t_grid.size();
    const std::size_t stride = std::size_t(N) + 1;
    a.assign(std::size_t(cfg.d) * nt * stride, 0.0);
    b.assign(a.size(), 0.0);
    auto at = [&](int c, std::size_t j, long n) { return (std::size_t(c) * nt + j) * stride + std::size_t(n); };
    std::vector<double> xi(nt), path;
    Eigen::VectorXd z(nt);
    for (int c = 0; c < cfg.d; ++c) {
        for (long n = 0; n <= N; ++n) {
            const double sq = impl_->sqrt_q[n];
            if (sq == 0) continue;
            for (int part = 0; part < (n == 0 ? 1 : 2); ++part) {
                RandomStream rng(cfg.seed, derive_stream({kFieldTag, replica, std::uint64_t(c), std::uint64_t(n),
                                                          std::uint64_t(part)}));
                auto& dst = part == 0 ? a : b;
                if (cfg.sampler == ModeSampler::ExactGaussian) {
                    for (std::size_t j = 0; j < nt; ++j) z[j] = rng.normal();
                    const Eigen::VectorXd x = impl_->chol[n].triangularView<Eigen::Lower>() * z;
                    for (std::size_t j = 0; j < nt; ++j) dst[at(c, j, n)] = sq * x[j];
                } else {
                    path.resize(impl_->fine_grid.size());
                    impl_->fbm->sample(rng, path);
                    const double lambda = double(n) * double(n);
                    const double h = impl_->fine_grid[1] - impl_->fine_grid[0];
                    // X(t+h) = e^{-lambda h} X(t) + (dB / h)(1 - e^{-lambda h}) / lambda,
                    // exact for the linear interpolant of the path
                    const double decay = std::exp(-lambda * h);
                    const double gain = lambda == 0 ? 1.0 : -std::expm1(-lambda * h) / (lambda * h);
                    double X = 0;
                    std::size_t next = 0;
                    for (std::size_t k = 0; k + 1 < path.size() && next < nt; ++k) {
                        X = decay * X + gain * (path[k + 1] - path[k]);
                        while (next < nt && impl_->fine_index[next] == k + 1) dst[at(c, next++, n)] = sq * X;
                    }
                }
            }
        }
    }
}

FieldSample FieldSimulator::sample(std::uint64_t replica) const {
    const auto& cfg = *cfg_;
    const std::size_t nt = cfg.t_grid.size(), stride = std::size_t(cfg.n_modes) + 1;
    std::vector<double> a, b;
    coefficients(replica, a, b);
    FieldSample s;
    s.config = cfg_;
    s.replica = replica;
    s.values.resize(std::size_t(cfg.d) * nt * std::size_t(cfg.n_x));
    for (int c = 0; c < cfg.d; ++c)
        for (std::size_t j = 0; j < nt; ++j) {
            const std::size_t off = std::size_t(c) * nt + j;
            impl_->c2r->run(std::span(a).subspan(off * stride, stride), std::span(b).subspan(off * stride, stride),
                            s.values.data() + off * std::size_t(cfg.n_x));
        }
    return s;
}

std::vector<FieldSample> simulate(const SimConfig& c, std::size_t n_replicas, std::uint64_t first) {
    FieldSimulator sim(c);
    std::vector<FieldSample> out(n_replicas);
#pragma omp parallel for schedule(dynamic)
    for (long r = 0; r < long(n_replicas); ++r) out[r] = sim.sample(first + std::uint64_t(r));
    return out;
}

double truncated_variance(const SpectrumModel& m, long n_modes, double t) {
    SeriesOptions o;
    o.max_modes = n_modes;
    return CovarianceEngine(m, o).sigma_sq(t).value;
}

void write_field_csv(const FieldSample& s, const std::string& file) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + file);
    const auto& cfg = *s.config;
    out << "t,x";
    for (int c = 1; c <= cfg.d; ++c) out << ",u_" << c;
    out << '\n';
    const auto xs = x_grid(cfg.n_x);
    char buf[64];
    for (std::size_t j = 0; j < cfg.t_grid.size(); ++j)
        for (long k = 0; k < cfg.n_x; ++k) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g", cfg.t_grid[j], xs[k]);
            out << buf;
            for (int c = 0; c < cfg.d; ++c) {
                std::snprintf(buf, sizeof buf, ",%.17g", s(c, j, std::size_t(k)));
                out << buf;
            }
            out << '\n';
        }
}

}  // namespace fracheat
