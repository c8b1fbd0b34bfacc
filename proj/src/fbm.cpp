#include "fracheat/fbm.hpp"

#include <fftw3.h>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>

#include "fracheat/errors.hpp"
#include "fracheat/fft.hpp"

namespace fracheat {

std::mutex& fftw_planner_mutex() {
    static std::mutex mu;
    return mu;
}

double fbm_covariance(double H, double t, double s) {
    require(t >= 0 && s >= 0, "fbm_covariance: times must be nonnegative");
    return 0.5 * (std::pow(t, 2 * H) + std::pow(s, 2 * H) - std::pow(std::abs(t - s), 2 * H));
}

const char* method_name(FbmMethod m) {
    switch (m) {
        case FbmMethod::Auto: return "auto";
        case FbmMethod::Circulant: return "circulant";
        case FbmMethod::Cholesky: return "cholesky";
    }
    return "?";
}

bool is_uniform_grid(std::span<const double> grid, double rel_tol) {
    if (grid.size() < 2) return false;
    const double dt = grid[1] - grid[0];
    if (!(dt > 0)) return false;
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (std::abs(grid[i] - grid[0] - double(i) * dt) > rel_tol * std::max(1.0, grid.back()))
            return false;
    return true;
}

std::vector<double> uniform_grid(double T, std::size_t n_steps) {
    std::vector<double> g(n_steps + 1);
    for (std::size_t i = 0; i <= n_steps; ++i) g[i] = T * double(i) / double(n_steps);
    return g;
}

struct FbmSampler::Circulant {
    std::size_t n = 0, m = 0;
    std::vector<double> root;  // sqrt(eigenvalue / m)
    fftw_plan plan = nullptr;

    ~Circulant() {
        if (plan) {
            std::lock_guard lock(fftw_planner_mutex());
            fftw_destroy_plan(plan);
        }
    }
};

FbmSampler::FbmSampler(double H, std::vector<double> grid, FbmMethod method)
    : H_(H), grid_(std::move(grid)), method_(method) {
    require(H > 0 && H < 1, "fBm: H must lie in (0,1)");
    require(grid_.size() >= 2 && grid_[0] == 0.0, "fBm grid must start at 0 and have a step");
    for (std::size_t i = 1; i < grid_.size(); ++i)
        require(grid_[i] > grid_[i - 1], "fBm grid must be strictly increasing");
    const bool uniform = is_uniform_grid(grid_);
    if (method_ == FbmMethod::Circulant)
        require(uniform, "circulant embedding needs a uniform grid");
    if (method_ == FbmMethod::Auto)
        method_ = (uniform && grid_.size() >= 64) ? FbmMethod::Circulant : FbmMethod::Cholesky;
    if (method_ == FbmMethod::Cholesky) {
        build_cholesky();
        return;
    }

    auto c = std::make_unique<Circulant>();
    c->n = grid_.size() - 1;
    std::size_t g = 1;
    while (g < c->n) g *= 2;
    c->m = 2 * g;
    const double dt = grid_[1];
    const double scale = 0.5 * std::pow(dt, 2 * H);
    auto acov = [&](double k) {
        return scale * (std::pow(k + 1, 2 * H) - 2 * std::pow(k, 2 * H) + std::pow(std::abs(k - 1), 2 * H));
    };
    auto* buf = fftw_alloc_complex(c->m);
    {
        std::lock_guard lock(fftw_planner_mutex());
        c->plan = fftw_plan_dft_1d(int(c->m), buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
    }
    for (std::size_t k = 0; k < c->m; ++k) {
        const std::size_t j = k <= g ? k : c->m - k;
        buf[k][0] = acov(double(j));
        buf[k][1] = 0.0;
    }
    fftw_execute_dft(c->plan, buf, buf);
    double lmax = 0, lmin = INFINITY;
    for (std::size_t k = 0; k < c->m; ++k) {
        lmax = std::max(lmax, buf[k][0]);
        lmin = std::min(lmin, buf[k][0]);
    }
    margin_ = lmin / lmax;
    if (lmin < -1e-10 * lmax) {
        fftw_free(buf);
        if (method == FbmMethod::Circulant)
            throw NumericalError("circulant embedding has negative eigenvalues (min/max = " +
                                 std::to_string(margin_) + ")");
        method_ = FbmMethod::Cholesky;
        build_cholesky();
        return;
    }
    c->root.resize(c->m);
    for (std::size_t k = 0; k < c->m; ++k)
        c->root[k] = std::sqrt(std::max(buf[k][0], 0.0) / double(c->m));
    fftw_free(buf);
    circ_ = std::move(c);
}

FbmSampler::~FbmSampler() = default;

void FbmSampler::build_cholesky() {
    const std::size_t n = grid_.size() - 1;
    Eigen::MatrixXd C(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j)
            C(i, j) = C(j, i) = fbm_covariance(H_, grid_[i + 1], grid_[j + 1]);
    const double dmax = C.diagonal().maxCoeff();
    Eigen::LLT<Eigen::MatrixXd> llt(C);
    for (double jitter = 1e-14; llt.info() != Eigen::Success; jitter *= 10) {
        if (jitter > 1e-10) throw NumericalError("fBm covariance is not positive definite");
        llt.compute(C + jitter * dmax * Eigen::MatrixXd::Identity(n, n));
    }
    Eigen::MatrixXd L = llt.matrixL();
    chol_.assign(n * (n + 1) / 2, 0.0);
    for (std::size_t i = 0, k = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j) chol_[k++] = L(i, j);
}

void FbmSampler::sample(RandomStream& rng, std::span<double> out) const {
    require(out.size() == grid_.size(), "fBm sample buffer has the wrong size");
    out[0] = 0.0;
    if (method_ == FbmMethod::Cholesky) {
        const std::size_t n = grid_.size() - 1;
        std::vector<double> z(n);
        for (auto& v : z) v = rng.normal();
        for (std::size_t i = 0, k = 0; i < n; ++i) {
            double acc = 0;
            for (std::size_t j = 0; j <= i; ++j) acc += chol_[k++] * z[j];
            out[i + 1] = acc;
        }
        return;
    }
    const auto& c = *circ_;
    auto* buf = fftw_alloc_complex(c.m);
    for (std::size_t k = 0; k < c.m; ++k) {
        const double a = rng.normal(), b = rng.normal();
        buf[k][0] = c.root[k] * a;
        buf[k][1] = c.root[k] * b;
    }
    fftw_execute_dft(c.plan, buf, buf);
    double acc = 0;
    for (std::size_t j = 0; j < c.n; ++j) {
        acc += buf[j][0];
        out[j + 1] = acc;
    }
    fftw_free(buf);
}

std::vector<FbmPath> sample_fbm(double H, const std::vector<double>& grid, std::size_t n_paths,
                                std::uint64_t seed, FbmMethod method) {
    FbmSampler sampler(H, grid, method);
    std::vector<FbmPath> paths(n_paths);
#pragma omp parallel for schedule(static)
    for (std::size_t p = 0; p < n_paths; ++p) {
        auto& path = paths[p];
        path.H = H;
        path.grid = grid;
        path.values.resize(grid.size());
        path.seed = seed;
        path.index = p;
        path.method = sampler.method();
        RandomStream rng(seed, derive_stream({0xfb, p}));
        sampler.sample(rng, path.values);
    }
    return paths;
}

void write_path_csv(const FbmPath& path, const std::string& file) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write " + file);
    out << "t,value\n";
    char line[96];
    for (std::size_t i = 0; i < path.grid.size(); ++i) {
        std::snprintf(line, sizeof line, "%.17g,%.17g\n", path.grid[i], path.values[i]);
        out << line;
    }
}

// ---- kernel ----------------------------------------------------------------

namespace {

// (1/2 - H) int_0^{zm1} r^{H-3/2} (1 - (1+r)^{H-1/2}) dr
double F_tilde(double H, double zm1) {
    if (H == 0.5 || zm1 <= 0) return 0.0;
    const double e = H - 0.5;
    quad::Options o{1e-12, 1e-300, 1e6, true};
    auto g = [e](double r) { return -std::expm1(e * std::log1p(r)); };
    const double p = 1.0 / (H + 0.5);
    const double head_end = std::min(zm1, 1.0);
    auto head = [&](double w, double, double) {
        const double r = std::pow(w, p);
        return r == 0 ? -e * p : p * g(r) / r;
    };
    auto res = quad::tanh_sinh(head, 0.0, std::pow(head_end, 1.0 / p), o);
    double total = res.value;
    if (zm1 > 1.0) {
        auto tail = [&](double y, double, double) {
            const double r = std::exp(y);
            return std::exp(y * e) * g(r);
        };
        total += quad::tanh_sinh(tail, 0.0, std::log(zm1), o).value;
    }
    return -e * total;
}

double K_unnormalized_gap(double H, double s, double L) {
    // Beyond z - 1 = 1e250 the remaining part of F is below double resolution.
    return std::pow(L, H - 0.5) + std::pow(s, H - 0.5) * F_tilde(H, std::min(L / s, 1e250));
}

double K_gap(double H, double s, double L) { return kernel_cH(H) * K_unnormalized_gap(H, s, L); }

double dK_gap(double H, double s, double v, double cH) {
    return cH * (H - 0.5) * std::pow(v, H - 1.5) * std::pow(s / (s + v), 0.5 - H);
}

// phi_diff * dK with the v^{H-3/2} factor split so tiny v cannot overflow.
double dK_times(double H, double s, double v, double phi_diff, double cH) {
    return cH * (H - 0.5) * (phi_diff / v) * std::pow(v, H - 0.5) *
           std::pow(s / (s + v), 0.5 - H);
}

}  // namespace

double kernel_cH(double H) {
    require(H > 0 && H < 1, "kernel: H must lie in (0,1)");
    if (H == 0.5) return 1.0;
    static std::mutex mu;
    static std::map<double, double> cache;
    {
        std::lock_guard lock(mu);
        auto it = cache.find(H);
        if (it != cache.end()) return it->second;
    }
    auto f = [H](double, double s, double L) {
        const double k = K_unnormalized_gap(H, s, L);
        return k * k;
    };
    quad::Options o{1e-12, 1e-300, 1e4, true};
    auto r = quad::tanh_sinh(f, 0.0, 1.0, o);
    quad::check(r, o, "kernel normalisation");
    const double c = 1.0 / std::sqrt(r.value);
    std::lock_guard lock(mu);
    cache[H] = c;
    return c;
}

double kernel_K(double H, double t, double s) {
    require(s > 0 && s < t, "kernel_K requires 0 < s < t");
    return K_gap(H, s, t - s);
}

double kernel_dK(double H, double t, double s) {
    require(s > 0 && s < t, "kernel_dK requires 0 < s < t");
    return dK_gap(H, s, t - s, kernel_cH(H));
}

// ---- integrands ------------------------------------------------------------

namespace {

const ExpPiece* find_piece(const PiecewiseExp& p, double r) {
    for (std::size_t i = 0; i < p.pieces.size(); ++i) {
        const auto& pc = p.pieces[i];
        const bool last = i + 1 == p.pieces.size();
        if (r >= pc.lo && (r < pc.hi || (last && r == pc.hi))) return &pc;
    }
    return nullptr;
}

double piece_value(const ExpPiece& pc, double r) {
    double v = 0;
    for (const auto& t : pc.terms) v += t.coef * std::exp(-t.rate * (t.anchor - r));
    return v;
}

}  // namespace

double PiecewiseExp::operator()(double r) const {
    const auto* pc = find_piece(*this, r);
    return pc ? piece_value(*pc, r) : 0.0;
}

double PiecewiseExp::diff(double s, double v) const {
    // Locate s + v through offsets from s so points just past a jump are
    // classified correctly even when s + v itself would round across it.
    const auto* a = find_piece(*this, s);
    const ExpPiece* b = nullptr;
    for (std::size_t i = 0; i < pieces.size(); ++i) {
        const auto& pc = pieces[i];
        const bool last = i + 1 == pieces.size();
        const double lo = pc.lo - s, hi = pc.hi - s;
        if (v >= lo && (v < hi || (last && v == hi))) {
            b = &pc;
            break;
        }
    }
    if (a && a == b) {
        double d = 0;
        for (const auto& t : a->terms) d += t.coef * std::exp(-t.rate * (t.anchor - s)) * std::expm1(t.rate * v);
        return d;
    }
    double vb = 0;
    if (b)
        for (const auto& t : b->terms) vb += t.coef * std::exp(-t.rate * ((t.anchor - s) - v));
    return vb - (a ? piece_value(*a, s) : 0.0);
}

std::vector<double> PiecewiseExp::anchors() const {
    std::vector<double> out;
    for (const auto& pc : pieces) {
        out.push_back(pc.lo);
        out.push_back(pc.hi);
        for (const auto& t : pc.terms) out.push_back(t.anchor);
    }
    return out;
}

double PiecewiseExp::scale() const {
    double rate = 0;
    for (const auto& pc : pieces)
        for (const auto& t : pc.terms) rate = std::max(rate, std::abs(t.rate));
    double width = INFINITY;
    for (const auto& pc : pieces) width = std::min(width, pc.hi - pc.lo);
    return rate > 0 ? std::min(1.0 / rate, width) : width;
}

PiecewiseExp mode_integrand(double lambda, double t) {
    return PiecewiseExp{{ExpPiece{0.0, INFINITY, {ExpTerm{1.0, lambda, t}}}}};
}

// ---- K* operator -----------------------------------------------------------

namespace {

template <class Phi>
std::vector<double> inner_points(const Phi& phi, double s, double L) {
    std::vector<double> anchors{0.0, L};
    for (double a : phi.anchors())
        if (a > s && a < s + L) anchors.push_back(a - s);
    const double h = std::min(phi.scale(), L);
    auto pts = quad::graded_points(0.0, L, anchors, h);
    // The factor (s/(s+v))^{1/2-H} turns over at v ~ s.
    const double first = pts.size() > 1 ? pts[1] : L;
    for (double v = s; v < first; v *= 4) pts.push_back(v);
    // Past a jump of phi at v = c the kernel still varies on the scale c.
    for (std::size_t i = 2; i < anchors.size(); ++i) {
        const double c = anchors[i];
        for (double d = c; d < h && c + d < L; d *= 4) pts.push_back(c + d);
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

template <class Phi>
quad::Result kstar_impl(double H, const Phi& phi, double s, double L, const KstarOptions& o) {
    quad::Result res;
    if (H == 0.5) {
        res.value = phi(s);
        return res;
    }
    const auto pts = inner_points(phi, s, L);
    // On the first piece v = w^q removes the v^{H-3/2} (H > 1/2) or
    // v^{H-1/2} (H < 1/2, after differencing) endpoint singularity.
    const double q = H > 0.5 ? 1.0 / (H - 0.5) : 1.0 / (H + 0.5);
    auto run = [&](auto&& smooth, auto&& raw) {
        quad::Result acc;
        if (pts.size() < 2) return acc;
        auto f0 = [&](double, double w, double) {
            const double v = std::pow(w, q);
            return v == 0 ? 0.0 : q * smooth(v);
        };
        acc += quad::tanh_sinh(f0, 0.0, std::pow(pts[1], 1.0 / q), o.quad);
        for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
            auto f = [&](double x, double, double) { return raw(x); };
            acc += quad::tanh_sinh(f, pts[i], pts[i + 1], o.quad);
        }
        return acc;
    };
    const double cH = kernel_cH(H);
    auto shape = [&](double v) { return cH * (H - 0.5) * std::pow(s / (s + v), 0.5 - H); };
    if (H > 0.5) {
        res = run([&](double v) { return phi(s + v) * shape(v); },
                  [&](double v) { return phi(s + v) * dK_gap(H, s, v, cH); });
    } else {
        res = run([&](double v) { return phi.diff(s, v) / v * shape(v); },
                  [&](double v) { return dK_times(H, s, v, phi.diff(s, v), cH); });
        res.value += K_gap(H, s, L) * phi(s);
    }
    quad::check(res, o.quad, "K* inner integral");
    return res;
}

template <class Phi>
quad::Result inner_impl(double H, const Phi& f, const Phi& g, double t, const KstarOptions& o) {
    std::vector<double> anchors{t};
    for (double a : f.anchors()) anchors.push_back(a);
    for (double a : g.anchors()) anchors.push_back(a);
    const double h = std::min({f.scale(), g.scale(), t});
    const auto pts = quad::graded_points(0.0, t, anchors, h);
    quad::Result total;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const double a = pts[i], b = pts[i + 1];
        const bool at_end = (i + 2 == pts.size());
        auto integrand = [&](double x, double da, double db) {
            const double s = (a == 0.0) ? da : x;
            const double L = at_end ? db : t - x;
            if (!(s > 0) || !(L > 0)) return 0.0;
            // Abscissas that round onto a breakpoint lose which side of a
            // jump they sit on; their weight is below the tolerance.
            if (a > 0.0 && (x == a || x == b)) return 0.0;
            const double kf = kstar_impl(H, f, s, L, o).value;
            const double kg = (&f == &g) ? kf : kstar_impl(H, g, s, L, o).value;
            return kf * kg;
        };
        total += quad::tanh_sinh(integrand, a, b, o.quad);
    }
    quad::check(total, o.quad, "K* outer integral");
    return total;
}

}  // namespace

quad::Result kstar_apply(double H, const PiecewiseExp& phi, double t, double s, const KstarOptions& o) {
    require(s > 0 && s < t, "kstar_apply requires 0 < s < t");
    return kstar_impl(H, phi, s, t - s, o);
}

quad::Result kstar_apply(double H, const FunctionIntegrand& phi, double t, double s,
                         const KstarOptions& o) {
    require(s > 0 && s < t, "kstar_apply requires 0 < s < t");
    return kstar_impl(H, phi, s, t - s, o);
}

quad::Result kstar_apply_gap(double H, const PiecewiseExp& phi, double, double s, double L,
                             const KstarOptions& o) {
    require(s > 0 && L > 0, "kstar_apply requires 0 < s < t");
    return kstar_impl(H, phi, s, L, o);
}

quad::Result kstar_inner(double H, const PiecewiseExp& f, const PiecewiseExp& g, double t,
                         const KstarOptions& o) {
    return inner_impl(H, f, g, t, o);
}

quad::Result kstar_inner(double H, const FunctionIntegrand& f, const FunctionIntegrand& g, double t,
                         const KstarOptions& o) {
    return inner_impl(H, f, g, t, o);
}

}  // namespace fracheat
