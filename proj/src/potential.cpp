#include "fracheat/potential.hpp"

#include <boost/math/special_functions/beta.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "fracheat/errors.hpp"
#include "fracheat/quadrature.hpp"
#include "fracheat/spectral_model.hpp"

namespace fracheat {

double PointCloud::distance(std::size_t i, std::size_t j) const {
    double s = 0;
    for (int k = 0; k < d; ++k) {
        const double t = coords[i * d + k] - coords[j * d + k];
        s += t * t;
    }
    return std::sqrt(s);
}

double PointCloud::diameter() const {
    double m = 0;
    for (std::size_t i = 0; i < size(); ++i)
        for (std::size_t j = i + 1; j < size(); ++j) m = std::max(m, distance(i, j));
    return m;
}

PointCloud read_point_csv(const std::string& file, double h) {
    std::ifstream in(file);
    if (!in) throw DomainError("cannot read point file " + file);
    PointCloud c;
    c.h = h;
    c.d = 0;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        bool numeric = true;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t pos = 0;
                row.push_back(std::stod(cell, &pos));
            } catch (const std::exception&) {
                numeric = false;
                break;
            }
        }
        if (!numeric) {
            if (c.coords.empty() && c.d == 0) continue;  // header
            throw DomainError(file + ":" + std::to_string(lineno) + ": non-numeric coordinate");
        }
        if (c.d == 0) c.d = int(row.size());
        if (int(row.size()) != c.d)
            throw DomainError(file + ":" + std::to_string(lineno) + ": expected " + std::to_string(c.d) + " columns");
        c.coords.insert(c.coords.end(), row.begin(), row.end());
    }
    require(c.d > 0 && !c.coords.empty(), "point file " + file + " has no points");
    return c;
}

PointCloud segment_cloud(double lo, double hi, std::size_t n) {
    require(hi > lo && n >= 1, "segment_cloud: need lo < hi and n >= 1");
    PointCloud c;
    c.d = 1;
    const double w = (hi - lo) / double(n);
    for (std::size_t i = 0; i < n; ++i) c.coords.push_back(lo + (double(i) + 0.5) * w);
    c.h = 0.5 * w;
    return c;
}

double k_beta(const EnergyKernel& k, double r) {
    require(r >= 0, "k_beta: distance must be nonnegative");
    if (k.beta < 0) return 1.0;
    if (r == 0) return kInfinite;
    if (k.beta == 0) return std::log(k.N0 / r);
    return std::pow(r, -k.beta);
}

double default_N0(double N, double diameter) { return std::numbers::e * std::max(N, diameter); }

double self_energy(const EnergyKernel& k, int d, double h) {
    require(d >= 1, "dimension must be >= 1");
    if (k.beta < 0) return 1.0;
    if (h == 0 || k.beta >= d) return kInfinite;
    // distance s * 2h of two uniform points in a d-ball has density
    // d 2^d s^{d-1} I_{1-s^2}((d+1)/2, 1/2) on [0, 1]
    const double a = 0.5 * (d + 1);
    auto f = [&](double s, double, double sc) {
        if (!(s > 0)) return 0.0;
        const double x = sc * (2 - sc);  // 1 - s^2 without cancellation near s = 1
        const double c = d * std::pow(2.0, d) * boost::math::ibeta(a, 0.5, x);
        if (k.beta == 0) return c * std::pow(s, d - 1) * (std::log(k.N0 / (2 * h)) - std::log(s));
        return c * std::pow(2 * h, -k.beta) * std::pow(s, d - 1 - k.beta);
    };
    quad::Options o{1e-12, 1e-300, 1e4, true};
    auto r = quad::tanh_sinh(f, 0.0, 1.0, o);
    quad::check(r, o, "self energy");
    return r.value;
}

Eigen::MatrixXd energy_matrix(const PointCloud& c, const EnergyKernel& k) {
    const std::size_t n = c.size();
    Eigen::MatrixXd K(n, n);
    const double self = self_energy(k, c.d, c.h);
#pragma omp parallel for schedule(static)
    for (long i = 0; i < long(n); ++i) {
        K(i, i) = self;
        for (std::size_t j = 0; j < n; ++j)
            if (j != std::size_t(i)) K(i, j) = k_beta(k, c.distance(i, j));
    }
    return K;
}

double energy(const PointCloud& c, const DiscreteMeasure& mu, const EnergyKernel& k) {
    require(mu.weights.size() == c.size(), "measure and cloud sizes differ");
    double total = 0;
    for (double w : mu.weights) {
        require(w >= 0, "weights must be nonnegative");
        total += w;
    }
    require(std::abs(total - 1) <= 1e-12, "weights must sum to 1");
    if (k.beta < 0) return total * total;
    const double self = self_energy(k, c.d, c.h);
    if (std::isinf(self))
        for (double w : mu.weights)
            if (w > 0) return kInfinite;
    const auto K = energy_matrix(c, k);
    Eigen::Map<const Eigen::VectorXd> w(mu.weights.data(), long(mu.weights.size()));
    return w.dot(K * w);
}

namespace {

// Euclidean projection onto the probability simplex.
Eigen::VectorXd project_simplex(const Eigen::VectorXd& y) {
    std::vector<double> u(y.data(), y.data() + y.size());
    std::sort(u.begin(), u.end(), std::greater<>());
    double css = 0, theta = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        css += u[i];
        const double t = (css - 1) / double(i + 1);
        if (u[i] - t > 0) theta = t;
    }
    return (y.array() - theta).max(0.0).matrix();
}

void frank_wolfe(const Eigen::MatrixXd& K, const SolverOptions& o, CapacityResult& res) {
    const long n = K.rows();
    Eigen::VectorXd w = Eigen::VectorXd::Constant(n, 1.0 / double(n));
    Eigen::VectorXd Kw = K * w;
    long it = 0;
    double gap = INFINITY;
    for (; it < o.max_iter; ++it) {
        const double f = w.dot(Kw);
        long s = 0, v = -1;
        for (long i = 1; i < n; ++i)
            if (Kw[i] < Kw[s]) s = i;
        for (long i = 0; i < n; ++i)
            if (w[i] > 0 && (v < 0 || Kw[i] > Kw[v])) v = i;
        // gradient is 2 Kw; the gaps below are halved consistently
        gap = 2 * (f - Kw[s]);
        if (gap <= o.gap_tol) break;
        const double away_gap = 2 * (Kw[v] - f);
        if (gap >= away_gap || w[v] >= 1.0) {
            // d = e_s - w
            const double dKw = Kw[s] - f;
            const double dKd = K(s, s) - 2 * Kw[s] + f;
            double g = dKd > 0 ? -dKw / dKd : 1.0;
            g = std::clamp(g, 0.0, 1.0);
            w *= (1 - g);
            w[s] += g;
            Kw = (1 - g) * Kw + g * K.col(s);
        } else {
            // d = w - e_v
            const double gmax = w[v] / (1 - w[v]);
            const double dKw = f - Kw[v];
            const double dKd = f - 2 * Kw[v] + K(v, v);
            double g = dKd > 0 ? -dKw / dKd : gmax;
            g = std::clamp(g, 0.0, gmax);
            w *= (1 + g);
            w[v] -= g;
            if (g == gmax) w[v] = 0;
            Kw = (1 + g) * Kw - g * K.col(v);
        }
        if (it % 64 == 63) Kw = K * w;  // limit drift of the running product
    }
    Kw = K * w;
    long s = 0;
    for (long i = 1; i < n; ++i)
        if (Kw[i] < Kw[s]) s = i;
    res.energy = w.dot(Kw);
    res.gap = 2 * (res.energy - Kw[s]);
    res.iterations = it;
    res.minimizer.weights.assign(w.data(), w.data() + n);
    res.method = "frank-wolfe";
}

void projected_gradient(const Eigen::MatrixXd& K, const SolverOptions& o, CapacityResult& res) {
    const long n = K.rows();
    Eigen::VectorXd w = Eigen::VectorXd::Constant(n, 1.0 / double(n));
    double step = 1.0 / std::max(1e-300, K.cwiseAbs().rowwise().sum().maxCoeff());
    long it = 0;
    double f = w.dot(K * w);
    for (; it < o.max_iter; ++it) {
        const Eigen::VectorXd g = 2 * K * w;
        Eigen::VectorXd trial;
        double ft;
        for (;;) {
            trial = project_simplex(w - step * g);
            ft = trial.dot(K * trial);
            if (ft <= f - 0.5 / step * (trial - w).squaredNorm() * 1e-4 || step < 1e-300) break;
            step *= 0.5;
        }
        const double change = (trial - w).lpNorm<Eigen::Infinity>();
        w = trial;
        f = ft;
        step *= 1.5;
        if (change < 1e-14) break;
    }
    const Eigen::VectorXd Kw = K * w;
    res.energy = w.dot(Kw);
    res.gap = 2 * (res.energy - Kw.minCoeff());
    res.iterations = it;
    res.minimizer.weights.assign(w.data(), w.data() + n);
    res.method = "projected-gradient";
}

}  // namespace

CapacityResult capacity(const PointCloud& c, const EnergyKernel& k, const SolverOptions& o) {
    require(c.size() >= 1, "capacity of an empty cloud");
    CapacityResult res;
    const std::size_t n = c.size();
    if (k.beta < 0) {
        res.cap = 1;
        res.energy = 1;
        res.minimizer.weights.assign(n, 1.0 / double(n));
        res.method = "trivial";
        return res;
    }
    if (std::isinf(self_energy(k, c.d, c.h))) {
        res.cap = 0;
        res.energy = kInfinite;
        res.minimizer.weights.assign(n, 1.0 / double(n));
        res.method = "trivial";
        return res;
    }
    const auto K = energy_matrix(c, k);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K, Eigen::EigenvaluesOnly);
    res.min_eigenvalue = es.eigenvalues().minCoeff();
    const double scale = es.eigenvalues().cwiseAbs().maxCoeff();
    if (res.min_eigenvalue >= -1e-12 * scale)
        frank_wolfe(K, o, res);
    else
        projected_gradient(K, o, res);
    res.cap = 1 / res.energy;
    return res;
}

std::vector<double> hausdorff_estimate(const PointCloud& c, double beta, std::span<const double> eps) {
    for (std::size_t i = 1; i < eps.size(); ++i) require(eps[i] < eps[i - 1], "eps schedule must be strictly decreasing");
    for (double e : eps) require(e > 0, "eps must be positive");
    std::vector<double> out;
    if (beta < 0) {
        out.assign(eps.size(), kInfinite);
        return out;
    }
    const std::size_t n = c.size();
    require(n >= 1, "empty cloud");
    std::vector<double> dist(n, INFINITY);
    std::vector<std::size_t> owner(n, 0), centers;
    auto add_center = [&](std::size_t k) {
        const std::size_t id = centers.size();
        centers.push_back(k);
        for (std::size_t i = 0; i < n; ++i) {
            const double dd = c.distance(i, k);
            if (dd < dist[i]) {
                dist[i] = dd;
                owner[i] = id;
            }
        }
    };
    add_center(0);
    for (double e : eps) {
        if (e <= c.h) {
            // each atom-ball needs ceil(h / e)^d balls of radius e
            const double per = std::pow(std::ceil(c.h / e), c.d) * std::pow(2 * e, beta);
            out.push_back(double(n) * per);
            continue;
        }
        for (;;) {
            const auto far = std::size_t(std::max_element(dist.begin(), dist.end()) - dist.begin());
            if (dist[far] + c.h <= e) break;
            add_center(far);
        }
        // Each Voronoi cluster keeps the smaller of two enclosing balls: the
        // one around its traversal centre and the one around its bounding-box
        // midpoint.
        const std::size_t m = centers.size();
        const int d = c.d;
        std::vector<double> radius(m, 0.0), lo(m * d, INFINITY), hi(m * d, -INFINITY), mid(m * d), alt(m, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            radius[owner[i]] = std::max(radius[owner[i]], dist[i]);
            for (int k = 0; k < d; ++k) {
                lo[owner[i] * d + k] = std::min(lo[owner[i] * d + k], c.coords[i * d + k]);
                hi[owner[i] * d + k] = std::max(hi[owner[i] * d + k], c.coords[i * d + k]);
            }
        }
        for (std::size_t j = 0; j < m * d; ++j) mid[j] = 0.5 * (lo[j] + hi[j]);
        for (std::size_t i = 0; i < n; ++i) {
            double s2 = 0;
            for (int k = 0; k < d; ++k) s2 += std::pow(c.coords[i * d + k] - mid[owner[i] * d + k], 2);
            alt[owner[i]] = std::max(alt[owner[i]], std::sqrt(s2));
        }
        for (std::size_t j = 0; j < m; ++j) radius[j] = std::min(radius[j], alt[j]);
        double sum = 0;
        for (double r : radius) sum += std::pow(2 * (r + c.h), beta);
        out.push_back(sum);
    }
    return out;
}

PrelCheck prel_integral_check(double a, double I_len, double J_len, double alpha, double H, double d, double N) {
    require(a > 0 && a <= N, "a must lie in (0, N]");
    require(I_len > 0 && J_len > 0, "intervals must be nontrivial");
    require(J_len <= std::numbers::pi, "space interval longer than pi leaves the circle chart");
    require(alpha > 0 && alpha <= 1 && H > 0 && H < 1 && d > 0, "invalid exponents");
    const double as = 2 * alpha, at = std::min(alpha, 2 * H);
    const double a2 = a * a;
    // Both lag integrals run in log variables on unit pieces from 25
    // e-folds below the scale where Delta reaches a^2.
    auto log_integral = [](auto&& g, double anchor, double hi, const quad::Options& o) {
        const double top = std::log(hi);
        double y = std::min(std::log(anchor), top) - 25;
        quad::Result r;
        auto h = [&](double s) {
            const double x = std::exp(s);
            return x * g(x);
        };
        while (y < top) {
            const double next = std::min(top, y + 1);
            r += quad::gauss_kronrod(h, y, next, o, 4);
            y = next;
        }
        return r;
    };
    quad::Options oi{1e-11, 1e-300, 1e6, false}, oo{1e-10, 1e-300, 1e6, false};
    const double ustar = std::pow(a2, 1 / at), vstar = std::pow(a2, 1 / as);
    auto inner = [&](double u) {
        const double tu = std::pow(u, at);
        const double vu = std::pow(std::max(a2, tu), 1 / as);
        auto g = [&](double v) {
            const double D = std::pow(v, as) + tu;
            if (!(D > 0)) return 0.0;
            return (J_len - v) * std::pow(D, -0.5 * d) * std::exp(-a2 / D);
        };
        return log_integral(g, std::min(vstar, vu), J_len, oi).value;
    };
    const auto outer = log_integral([&](double u) { return (I_len - u) * inner(u); }, ustar, I_len, oo);
    PrelCheck pc;
    pc.lhs = 4 * outer.value;
    pc.index = d - (1 / alpha + 2 / at);
    EnergyKernel k{pc.index, std::numbers::e * N};
    pc.rhs_kernel = k_beta(k, a);
    pc.ratio = pc.lhs / pc.rhs_kernel;
    pc.normalization = 4 * I_len * J_len * boost::math::beta(1 / at, 1 / as) / (at * as);
    return pc;
}

}  // namespace fracheat
