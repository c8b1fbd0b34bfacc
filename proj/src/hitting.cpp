#include "fracheat/hitting.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <unordered_set>

#include "fracheat/errors.hpp"
#include "fracheat/regularity.hpp"

namespace fracheat {

namespace {

std::vector<double> parse_vector(const std::string& s, const std::string& what) {
    std::vector<double> v;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        try {
            std::size_t pos = 0;
            v.push_back(std::stod(cell, &pos));
            if (pos != cell.size()) throw std::invalid_argument(cell);
        } catch (const std::exception&) {
            throw DomainError("target " + what + ": bad number '" + cell + "'");
        }
    }
    return v;
}

std::string join(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
    return s;
}

}  // namespace

TargetSet TargetSet::parse(const std::vector<std::string>& specs, int d, double M) {
    require(d >= 1, "dimension must be >= 1");
    TargetSet t;
    t.d = d;
    t.M = M;
    for (const auto& s : specs) {
        const auto p1 = s.find(':'), p2 = s.rfind(':');
        require(p1 != std::string::npos && p2 != p1, "target '" + s + "': expected kind:<a>:<b>");
        const auto kind = s.substr(0, p1);
        TargetPart part;
        part.a = parse_vector(s.substr(p1 + 1, p2 - p1 - 1), s);
        require(int(part.a.size()) == d, "target '" + s + "': expected " + std::to_string(d) + " coordinates");
        if (kind == "ball") {
            part.kind = TargetPart::Kind::Ball;
            const auto r = parse_vector(s.substr(p2 + 1), s);
            require(r.size() == 1 && r[0] > 0, "target '" + s + "': radius must be positive");
            part.radius = r[0];
            for (double x : part.a) require(std::abs(x) + part.radius <= M, "target '" + s + "' leaves [-M, M]^d");
        } else if (kind == "box") {
            part.kind = TargetPart::Kind::Box;
            part.b = parse_vector(s.substr(p2 + 1), s);
            require(int(part.b.size()) == d, "target '" + s + "': expected " + std::to_string(d) + " upper corners");
            for (int k = 0; k < d; ++k) {
                require(part.a[k] < part.b[k], "target '" + s + "': need lo < hi");
                require(part.a[k] >= -M && part.b[k] <= M, "target '" + s + "' leaves [-M, M]^d");
            }
        } else {
            throw DomainError("target '" + s + "': kind must be ball or box");
        }
        t.parts.push_back(std::move(part));
    }
    return t;
}

TargetSet TargetSet::ball(std::vector<double> centre, double radius, double M) {
    std::string s = "ball:" + join(centre) + ":" + format_double(radius);
    return parse({s}, int(centre.size()), M);
}

std::string TargetSet::spec() const {
    if (parts.empty()) return "empty";
    std::string s;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        const auto& p = parts[i];
        s += i ? ";" : "";
        if (p.kind == TargetPart::Kind::Ball)
            s += "ball:" + join(p.a) + ":" + format_double(p.radius);
        else
            s += "box:" + join(p.a) + ":" + join(p.b);
    }
    return s;
}

double TargetSet::distance(std::span<const double> z) const {
    double best = INFINITY;
    for (const auto& p : parts) {
        double s2 = 0;
        if (p.kind == TargetPart::Kind::Ball) {
            for (int k = 0; k < d; ++k) s2 += (z[k] - p.a[k]) * (z[k] - p.a[k]);
            best = std::min(best, std::max(0.0, std::sqrt(s2) - p.radius));
        } else {
            for (int k = 0; k < d; ++k) {
                const double e = std::max({p.a[k] - z[k], 0.0, z[k] - p.b[k]});
                s2 += e * e;
            }
            best = std::min(best, std::sqrt(s2));
        }
        if (best == 0) break;
    }
    return best;
}

bool TargetSet::meets_interval(double lo, double hi) const {
    require(d == 1, "meets_interval needs d = 1");
    for (const auto& p : parts) {
        const double a = p.kind == TargetPart::Kind::Ball ? p.a[0] - p.radius : p.a[0];
        const double b = p.kind == TargetPart::Kind::Ball ? p.a[0] + p.radius : p.b[0];
        if (lo <= b && hi >= a) return true;
    }
    return false;
}

double TargetSet::feature_size() const {
    double f = INFINITY;
    for (const auto& p : parts) {
        if (p.kind == TargetPart::Kind::Ball)
            f = std::min(f, p.radius);
        else
            for (int k = 0; k < d; ++k) f = std::min(f, 0.5 * (p.b[k] - p.a[k]));
    }
    return f;
}

PointCloud TargetSet::discretize(double spacing) const {
    require(spacing > 0, "spacing must be positive");
    PointCloud c;
    c.d = d;
    c.h = 0.5 * spacing;
    std::vector<double> lo(d, INFINITY), hi(d, -INFINITY);
    for (const auto& p : parts)
        for (int k = 0; k < d; ++k) {
            lo[k] = std::min(lo[k], p.kind == TargetPart::Kind::Ball ? p.a[k] - p.radius : p.a[k]);
            hi[k] = std::max(hi[k], p.kind == TargetPart::Kind::Ball ? p.a[k] + p.radius : p.b[k]);
        }
    if (parts.empty()) return c;
    std::vector<long> n(d), idx(d, 0);
    for (int k = 0; k < d; ++k) n[k] = std::max(1L, long(std::ceil((hi[k] - lo[k]) / spacing)));
    std::vector<double> z(d);
    for (;;) {
        for (int k = 0; k < d; ++k) z[k] = lo[k] + (double(idx[k]) + 0.5) * (hi[k] - lo[k]) / double(n[k]);
        if (distance(z) == 0) c.coords.insert(c.coords.end(), z.begin(), z.end());
        int k = 0;
        while (k < d && ++idx[k] == n[k]) idx[k++] = 0;
        if (k == d) break;
    }
    if (c.coords.empty())
        for (const auto& p : parts) {
            // features below the spacing keep one atom at their centre
            for (int k = 0; k < d; ++k)
                c.coords.push_back(p.kind == TargetPart::Kind::Ball ? p.a[k] : 0.5 * (p.a[k] + p.b[k]));
        }
    return c;
}

double TargetSet::diameter() const {
    double lo_hi = 0;
    std::vector<double> lo(d, INFINITY), hi(d, -INFINITY);
    for (const auto& p : parts)
        for (int k = 0; k < d; ++k) {
            lo[k] = std::min(lo[k], p.kind == TargetPart::Kind::Ball ? p.a[k] - p.radius : p.a[k]);
            hi[k] = std::max(hi[k], p.kind == TargetPart::Kind::Ball ? p.a[k] + p.radius : p.b[k]);
        }
    for (int k = 0; k < d && !parts.empty(); ++k) lo_hi += (hi[k] - lo[k]) * (hi[k] - lo[k]);
    return std::sqrt(lo_hi);
}

Wilson wilson_interval(std::size_t k, std::size_t n, double z) {
    require(n > 0 && k <= n, "Wilson interval needs 0 <= k <= n, n > 0");
    const double p = double(k) / double(n), nn = double(n), z2 = z * z;
    const double centre = (p + z2 / (2 * nn)) / (1 + z2 / nn);
    const double half = z / (1 + z2 / nn) * std::sqrt(p * (1 - p) / nn + z2 / (4 * nn * nn));
    return {k == 0 ? 0.0 : std::max(0.0, centre - half), k == n ? 1.0 : std::min(1.0, centre + half)};
}

std::vector<HitExperiment> hit_probability_mc(const SimConfig& c, Interval I, Interval J,
                                              const std::vector<TargetSet>& targets, std::size_t n_replicas,
                                              const HitOptions& o) {
    require(n_replicas > 0, "need at least one replica");
    require(I.lo > 0 && I.lo <= I.hi, "I must lie in (0, T]");
    require(J.lo >= 0 && J.lo <= J.hi && J.hi < 2 * std::numbers::pi, "J must lie in [0, 2 pi)");
    for (const auto& t : targets) require(t.d == c.d, "target dimension differs from the field dimension");
    FieldSimulator sim(c);
    const auto xs = x_grid(c.n_x);
    std::vector<std::size_t> ti, xi;
    for (std::size_t j = 0; j < c.t_grid.size(); ++j)
        if (I.contains(c.t_grid[j])) ti.push_back(j);
    for (std::size_t k = 0; k < xs.size(); ++k)
        if (J.contains(xs[k])) xi.push_back(k);
    require(!ti.empty() && !xi.empty(), "no grid points inside I x J");

    const auto ex = exponents(c.model);
    const double H = c.model.H, alpha = ex.alpha, at = std::min(alpha, 2 * H);
    auto L = [](double r) { return std::sqrt(std::log1p(1 / r)); };
    double ht = 0;
    for (std::size_t m = 0; m + 1 < ti.size(); ++m) ht = std::max(ht, 0.5 * (c.t_grid[ti[m + 1]] - c.t_grid[ti[m]]));
    const double hx = std::numbers::pi / double(c.n_x);
    const double unit_slack = std::pow(hx, alpha) * L(hx) + (ht > 0 ? std::pow(ht, at / 2) * L(ht) : 0.0);

    const std::size_t nT = targets.size();
    std::vector<unsigned char> lo_hit(n_replicas * nT, 0), hi_hit(n_replicas * nT, 0);
    std::vector<double> slack(n_replicas, 0.0);
#pragma omp parallel for schedule(dynamic)
    for (long r = 0; r < long(n_replicas); ++r) {
        const auto s = sim.sample(o.first_replica + std::size_t(r));
        double rho = 0;
        if (o.dilate) {
            double chat = 0;
            for (int comp = 0; comp < c.d; ++comp) {
                ModulusWindow w;
                w.component = comp;
                w.t_first = ti.front();
                w.t_last = ti.back();
                chat = std::max(chat, modulus_statistic(s, alpha, H, w));
            }
            rho = std::sqrt(double(c.d)) * chat * unit_slack;
        }
        slack[r] = rho;
        std::vector<double> z(c.d);
        auto value = [&](std::size_t j, std::size_t k, int comp) { return s(comp, j, k); };
        for (std::size_t t = 0; t < nT; ++t) {
            const auto& tg = targets[t];
            if (tg.empty()) continue;
            double best = INFINITY;
            bool crossed = false;
            for (std::size_t j : ti)
                for (std::size_t k : xi) {
                    for (int comp = 0; comp < c.d; ++comp) z[comp] = value(j, k, comp);
                    best = std::min(best, tg.distance(z));
                }
            if (c.d == 1 && best > 0) {
                // continuity along grid edges: a change across the target is a hit
                for (std::size_t m = 0; m < ti.size() && !crossed; ++m)
                    for (std::size_t q = 0; q < xi.size() && !crossed; ++q) {
                        const double u = value(ti[m], xi[q], 0);
                        if (m + 1 < ti.size()) {
                            const double v = value(ti[m + 1], xi[q], 0);
                            crossed = tg.meets_interval(std::min(u, v), std::max(u, v));
                        }
                        if (!crossed && q + 1 < xi.size()) {
                            const double v = value(ti[m], xi[q + 1], 0);
                            crossed = tg.meets_interval(std::min(u, v), std::max(u, v));
                        }
                    }
            }
            const bool lo = best <= 0 || crossed;
            lo_hit[r * nT + t] = lo;
            hi_hit[r * nT + t] = lo || best <= rho;
        }
    }

    double mean_slack = 0;
    for (double v : slack) mean_slack += v / double(n_replicas);
    std::vector<HitExperiment> out;
    for (std::size_t t = 0; t < nT; ++t) {
        const auto& tg = targets[t];
        HitExperiment e;
        e.target_id = tg.spec();
        e.eps = tg.empty() ? 0.0 : tg.feature_size();
        e.n_replicas = n_replicas;
        for (std::size_t r = 0; r < n_replicas; ++r) {
            e.hits_lo += lo_hit[r * nT + t];
            e.hits_hi += hi_hit[r * nT + t];
        }
        e.p_lo = double(e.hits_lo) / double(n_replicas);
        e.p_hi = double(e.hits_hi) / double(n_replicas);
        e.ci_lo = wilson_interval(e.hits_lo, n_replicas).lo;
        e.ci_hi = wilson_interval(e.hits_hi, n_replicas).hi;
        e.index = double(c.d) - ex.beta;
        e.mean_slack = mean_slack;
        e.resolution_ok = tg.empty() || !o.dilate || mean_slack < 0.5 * e.eps;
        if (tg.empty()) {
            e.cap = 0;
            e.hausdorff_sum = 0;
        } else if (e.index < 0) {
            e.cap = 1;
            e.hausdorff_sum = kInfinite;
        } else {
            const double vol_scale = std::max(tg.diameter(), 2 * e.eps);
            double spacing = std::min(e.eps / 2, vol_scale / 8);
            auto cloud = tg.discretize(spacing);
            while (cloud.size() > o.max_cloud) {
                spacing *= 1.25;
                cloud = tg.discretize(spacing);
            }
            const EnergyKernel k{e.index, default_N0(1.0, 2 * tg.M * std::sqrt(double(c.d)))};
            e.cap = capacity(cloud, k).cap;
            std::vector<double> eps;
            for (double v = e.eps; v > 2 * cloud.h; v /= 2) eps.push_back(v);
            if (eps.empty()) eps.push_back(e.eps);
            e.hausdorff_sum = hausdorff_estimate(cloud, e.index, eps).back();
        }
        if (!e.resolution_ok && o.enforce_resolution)
            throw NumericalError("resolution: mean continuity slack " + format_double(mean_slack) +
                                 " exceeds half the feature size of " + e.target_id);
        out.push_back(std::move(e));
    }
    return out;
}

SandwichFit fit_sandwich(const std::vector<HitExperiment>& rows) {
    SandwichFit f;
    for (const auto& e : rows) {
        if (e.cap > 0) f.c_lower = std::max(f.c_lower, e.p_lo > 0 ? e.cap / e.p_lo : INFINITY);
        if (e.p_hi > 0) f.c_upper = std::max(f.c_upper, e.hausdorff_sum > 0 ? e.p_hi / e.hausdorff_sum : INFINITY);
    }
    f.c = std::max({1.0, f.c_lower, f.c_upper});
    f.finite = std::isfinite(f.c);
    return f;
}

void write_hit_csv(const std::vector<HitExperiment>& rows, const std::string& file) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + file);
    out << "target_id,eps,p_hat_lo,p_hat_hi,ci_lo,ci_hi,cap,hausdorff_sum\n";
    char buf[256];
    for (const auto& e : rows) {
        std::snprintf(buf, sizeof buf, ",%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", e.eps, e.p_lo, e.p_hi, e.ci_lo,
                      e.ci_hi, e.cap, e.hausdorff_sum);
        out << '"' << e.target_id << '"' << buf;
    }
}

Cell CellPartition::cell(long k, long l) const {
    require(k >= k_lo && k < k_hi && l >= l_lo && l < l_hi, "cell index out of range");
    return {{double(k) * t_step, double(k + 1) * t_step}, {double(l) * x_step, double(l + 1) * x_step}};
}

CellPartition cell_partition(Interval I, Interval J, int n, double alpha, double H) {
    require(n >= 1, "level n must be >= 1");
    require(alpha > 0 && alpha <= 1 && H > 0 && H < 1, "invalid exponents");
    require(I.lo <= I.hi && J.lo <= J.hi, "intervals must be ordered");
    CellPartition p;
    p.t_step = std::exp2(-n / alpha);
    p.x_step = std::exp2(-std::max(2 * n / alpha, n / H));
    if (I.length() > 0 && J.length() > 0) {
        p.k_lo = long(std::floor(I.lo / p.t_step));
        p.k_hi = long(std::ceil(I.hi / p.t_step));
        p.l_lo = long(std::floor(J.lo / p.x_step));
        p.l_hi = long(std::ceil(J.hi / p.x_step));
    }
    return p;
}

SmallBallFit small_ball_curve(const SimConfig& c, Interval I, Interval J, std::span<const double> z,
                              std::span<const double> radii, std::size_t n_replicas, int m_t, int m_x,
                              std::size_t min_hits) {
    require(int(z.size()) == c.d, "point dimension differs from the field dimension");
    require(!radii.empty(), "need radii");
    for (std::size_t i = 1; i < radii.size(); ++i) require(radii[i] > radii[i - 1], "radii must increase");
    require(radii[0] > 0, "radii must be positive");
    require(I.lo > 0 && I.hi > I.lo && J.hi > J.lo, "cell must have positive size");
    require(m_t >= 1 && m_x >= 1 && n_replicas > 0, "lattice and replica counts must be positive");
    SimConfig cc = c;
    cc.t_grid.clear();
    for (int j = 0; j < m_t; ++j) cc.t_grid.push_back(m_t == 1 ? I.hi : I.lo + I.length() * j / (m_t - 1));
    cc.n_x = 2 * cc.n_modes + 1;
    FieldSimulator sim(cc);
    std::vector<double> xs;
    for (int k = 0; k < m_x; ++k) xs.push_back(m_x == 1 ? J.lo : J.lo + J.length() * k / (m_x - 1));
    const long N = cc.n_modes;
    // cos(n x_k), sin(n x_k) tables
    std::vector<double> cs((N + 1) * m_x), sn((N + 1) * m_x);
    for (long n = 0; n <= N; ++n)
        for (int k = 0; k < m_x; ++k) {
            cs[n * m_x + k] = std::cos(double(n) * xs[k]);
            sn[n * m_x + k] = std::sin(double(n) * xs[k]);
        }
    std::vector<double> dmin(n_replicas);
#pragma omp parallel for schedule(dynamic)
    for (long r = 0; r < long(n_replicas); ++r) {
        std::vector<double> a, b;
        sim.coefficients(std::size_t(r), a, b);
        std::vector<double> d2(std::size_t(m_t) * m_x, 0.0);
        for (int comp = 0; comp < c.d; ++comp)
            for (int j = 0; j < m_t; ++j) {
                const double* aa = &a[(std::size_t(comp) * m_t + j) * (N + 1)];
                const double* bb = &b[(std::size_t(comp) * m_t + j) * (N + 1)];
                for (int k = 0; k < m_x; ++k) {
                    double u = 0;
                    for (long n = 0; n <= N; ++n) u += aa[n] * cs[n * m_x + k] + bb[n] * sn[n * m_x + k];
                    d2[j * m_x + k] += (u - z[comp]) * (u - z[comp]);
                }
            }
        dmin[r] = std::sqrt(*std::min_element(d2.begin(), d2.end()));
    }
    SmallBallFit f;
    f.d = c.d;
    std::vector<double> fe, fp;
    for (double e : radii) {
        SmallBallPoint p;
        p.eps = e;
        p.hits = std::size_t(std::count_if(dmin.begin(), dmin.end(), [&](double v) { return v <= e; }));
        p.p = double(p.hits) / double(n_replicas);
        const auto w = wilson_interval(p.hits, n_replicas);
        p.ci_lo = w.lo;
        p.ci_hi = w.hi;
        p.saturated = p.p > 0.5;
        p.censored = p.hits < min_hits;
        if (!p.saturated && !p.censored) {
            fe.push_back(e);
            fp.push_back(p.p);
        }
        f.points.push_back(p);
    }
    f.n_fit = fe.size();
    if (fe.size() >= 3) {
        const auto fit = fit_loglog(fe, fp);
        f.slope = fit.slope;
        f.intercept = fit.intercept;
        f.verdict = std::abs(f.slope - c.d) <= 0.5;
    }
    return f;
}

namespace {

struct KeyHash {
    std::size_t operator()(const std::vector<long>& v) const {
        std::size_t h = 1469598103934665603ull;
        for (long x : v) h = (h ^ std::size_t(x)) * 1099511628211ull;
        return h;
    }
};

}  // namespace

RangeDimension range_dimension_estimate(std::span<const FieldSample> samples, int min_scales) {
    require(!samples.empty(), "need samples");
    RangeDimension out;
    double total = 0;
    for (std::size_t si = 0; si < samples.size(); ++si) {
        const auto& s = samples[si];
        const auto& cfg = *s.config;
        const int d = cfg.d;
        const std::size_t npts = cfg.t_grid.size() * std::size_t(cfg.n_x);
        std::vector<double> lo(d, INFINITY), hi(d, -INFINITY);
        for (int comp = 0; comp < d; ++comp)
            for (std::size_t p = 0; p < npts; ++p) {
                const double v = s.values[comp * npts + p];
                lo[comp] = std::min(lo[comp], v);
                hi[comp] = std::max(hi[comp], v);
            }
        double extent = 0;
        for (int comp = 0; comp < d; ++comp) extent = std::max(extent, hi[comp] - lo[comp]);
        if (extent == 0) continue;  // a single point: dimension 0
        std::vector<double> sides, inv, counts;
        std::vector<long> key(d);
        for (double side = extent / 2;; side /= 2) {
            std::unordered_set<std::vector<long>, KeyHash> boxes;
            for (std::size_t p = 0; p < npts; ++p) {
                for (int comp = 0; comp < d; ++comp)
                    key[comp] = long(std::floor((s.values[comp * npts + p] - lo[comp]) / side));
                boxes.insert(key);
            }
            if (double(boxes.size()) * 4 > double(npts)) break;
            sides.push_back(side);
            inv.push_back(1 / side);
            counts.push_back(double(boxes.size()));
            if (sides.size() > 40) break;
        }
        require(int(sides.size()) >= min_scales,
                "range too coarsely sampled: " + std::to_string(sides.size()) + " usable box scales");
        total += fit_loglog(inv, counts).slope;
        if (si == 0) {
            out.sides = sides;
            out.counts = counts;
        }
    }
    out.estimate = total / double(samples.size());
    return out;
}

}  // namespace fracheat
