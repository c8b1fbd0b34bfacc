#include <omp.h>

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "fracheat/acceptance.hpp"
#include "fracheat/config.hpp"
#include "fracheat/covariance.hpp"
#include "fracheat/errors.hpp"
#include "fracheat/hitting.hpp"
#include "fracheat/manifest.hpp"
#include "fracheat/potential.hpp"
#include "fracheat/regularity.hpp"

namespace fs = std::filesystem;
using namespace fracheat;

namespace {

struct Run {
    RunConfig cfg;
    std::string out;
    RunManifest manifest;

    std::string path(const std::string& name) const { return (fs::path(out) / name).string(); }
    void emitted(const std::string& name) { manifest.add_file(out, name); }
};

Interval interval(const RunConfig& c, const std::string& key, Interval fallback) {
    const auto v = c.get_list(key, {fallback.lo, fallback.hi});
    require(v.size() == 2 && v[0] <= v[1], "field '" + key + "': expected lo,hi with lo <= hi");
    return {v[0], v[1]};
}

PointCloud cloud(const RunConfig& c) {
    if (c.has("points")) return read_point_csv(c.get("points", ""), c.get_double("h", 0.0));
    const auto s = c.get_list("segment", {0, 1, 64});
    require(s.size() == 3 && s[2] >= 1, "field 'segment': expected lo,hi,count");
    return segment_cloud(s[0], s[1], std::size_t(s[2]));
}

int spectrum(Run& r) {
    const auto m = r.cfg.model();
    const auto rep = existence_margin(m);
    r.manifest.extra["spectrum"] = m.spec_string();
    r.manifest.extra["summand_exponent"] = rep.summand_exponent;
    if (!rep.convergent) throw DomainError(rep.reason);
    const auto e = exponents(m);
    r.manifest.extra["alpha"] = e.alpha;
    r.manifest.extra["beta"] = e.beta;
    MetricTable t{"n,q_n,partial_sum", {}};
    for (const auto& [n, s] : rep.partial_sums) t.rows.push_back({double(n), q_coeff(m, n), s});
    t.write_csv(r.path("spectrum.csv"));
    r.emitted("spectrum.csv");
    std::printf("%s H=%s: exists, alpha=%s beta=%s\n", m.spec_string().c_str(), format_double(m.H).c_str(),
                format_double(e.alpha).c_str(), format_double(e.beta).c_str());
    return 0;
}

int simulate_cmd(Run& r) {
    const auto c = r.cfg.sim_config();
    const auto n = r.cfg.get_u64("replicas", 1);
    const auto fields = simulate(c, n);
    for (const auto& f : fields) {
        const auto name = "field_" + std::to_string(f.replica) + ".csv";
        write_field_csv(f, r.path(name));
        r.emitted(name);
    }
    r.manifest.extra["replicas"] = n;
    std::printf("wrote %zu replicas\n", fields.size());
    return 0;
}

int metric(Run& r) {
    const auto m = r.cfg.model();
    const double alpha = exponents(m).alpha;
    const double t0 = r.cfg.get_double("t0", 0.5), T = r.cfg.get_double("T", 1.0);
    const long nt = r.cfg.get_long("metric_nt", 9), nx = r.cfg.get_long("metric_nx", 9);
    require(nt >= 2 && nx >= 2 && 0 < t0 && t0 < T, "metric grid needs metric_nt, metric_nx >= 2 and 0 < t0 < T");
    const SpaceTime base{T, 0.0};
    std::vector<SpaceTime> ps, qs;
    for (long i = 0; i < nt; ++i)
        for (long k = 0; k < nx; ++k) {
            const SpaceTime q{t0 + (T - t0) * double(i) / double(nt - 1), std::numbers::pi * double(k) / double(nx - 1)};
            if (q.t == base.t && q.x == base.x) continue;
            ps.push_back(base);
            qs.push_back(q);
        }
    CovarianceEngine e(m);
    const auto g = e.gamma_sq_batch(ps, qs);
    MetricTable t{"t1,x1,t2,x2,gamma_sq,delta,ratio", {}};
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double dl = delta_metric(ps[i], qs[i], alpha, m.H);
        t.rows.push_back({ps[i].t, ps[i].x, qs[i].t, qs[i].x, g[i], dl, g[i] / dl});
    }
    t.write_csv(r.path("metric.csv"));
    r.emitted("metric.csv");
    std::printf("wrote %zu metric rows\n", t.rows.size());
    return 0;
}

int holder(Run& r) {
    const auto m = r.cfg.model();
    std::vector<HolderFit> fits;
    const auto axis = r.cfg.get("axis", "both");
    for (Axis a : {Axis::Space, Axis::Time}) {
        if (axis != "both" && parse_axis(axis) != a) continue;
        HolderSpec s;
        s.axis = a;
        s.t0 = r.cfg.get_double("t0", s.t0);
        s.at = r.cfg.get_double("T", s.at);
        s.tol = r.cfg.get_double("tol", s.tol);
        fits.push_back(fit_holder_exact(m, s));
    }
    const auto reps = r.cfg.get_u64("empirical_replicas", 0);
    if (reps > 0) {
        auto c = r.cfg.sim_config();
        const auto samples = simulate(c, reps);
        const std::vector<long> lags{1, 2, 4, 8};
        for (Axis a : {Axis::Space, Axis::Time}) {
            if (axis != "both" && parse_axis(axis) != a) continue;
            fits.push_back(fit_holder_empirical(samples, a, lags, expected_exponent(m, a)));
        }
    }
    write_holder_csv(fits, r.path("holder.csv"));
    r.emitted("holder.csv");
    bool ok = true;
    for (const auto& f : fits) {
        r.manifest.verdicts.push_back({std::string(axis_name(f.axis)) + " exponent", f.verdict,
                                       "slope " + format_double(f.slope) + ", expected " + format_double(f.expected)});
        std::printf("%s %s slope %.4f expected %.4f\n", f.verdict ? "PASS" : "FAIL", axis_name(f.axis), f.slope,
                    f.expected);
        ok = ok && f.verdict;
    }
    return ok ? 0 : 1;
}

int capacity_cmd(Run& r) {
    const auto pc = cloud(r.cfg);
    const double beta = r.cfg.get_double("beta", 0.0);
    const EnergyKernel k{beta, r.cfg.get_double("N0", default_N0(1.0, pc.diameter()))};
    const auto res = capacity(pc, k);
    MetricTable t{"index,weight", {}};
    for (std::size_t i = 0; i < res.minimizer.weights.size(); ++i) t.rows.push_back({double(i), res.minimizer.weights[i]});
    t.write_csv(r.path("capacity_weights.csv"));
    r.emitted("capacity_weights.csv");
    r.manifest.extra["capacity"] = {{"beta", beta}, {"N0", k.N0},       {"energy", res.energy},
                                    {"cap", res.cap}, {"gap", res.gap}, {"method", res.method}};
    std::printf("cap %.10g energy %.10g gap %.2e (%s)\n", res.cap, res.energy, res.gap, res.method.c_str());
    return 0;
}

int hausdorff_cmd(Run& r) {
    const auto pc = cloud(r.cfg);
    const double beta = r.cfg.get_double("beta", 1.0);
    std::vector<double> eps = r.cfg.get_list("eps", {});
    if (eps.empty())
        for (int k = 1; k <= 10; ++k) eps.push_back(std::ldexp(1.0, -k));
    const auto s = hausdorff_estimate(pc, beta, eps);
    MetricTable t{"eps,cover_sum", {}};
    for (std::size_t i = 0; i < eps.size(); ++i) t.rows.push_back({eps[i], s[i]});
    t.write_csv(r.path("hausdorff.csv"));
    r.emitted("hausdorff.csv");
    std::printf("cover sum at eps=%g: %.6g\n", eps.back(), s.back());
    return 0;
}

int hit(Run& r) {
    const auto c = r.cfg.sim_config();
    require(!r.cfg.targets().empty(), "at least one 'target' line is required");
    std::vector<TargetSet> ts;
    for (const auto& spec : r.cfg.targets()) ts.push_back(TargetSet::parse({spec}, c.d, r.cfg.get_double("M", 10)));
    HitOptions o;
    o.enforce_resolution = r.cfg.get_long("enforce_resolution", 1) != 0;
    const Interval I = interval(r.cfg, "I", {c.t_grid.front(), c.t_grid.back()});
    const Interval J = interval(r.cfg, "J", {0.0, 2 * std::numbers::pi * double(c.n_x - 1) / double(c.n_x)});
    const auto rows = hit_probability_mc(c, I, J, ts, r.cfg.get_u64("replicas", 1000), o);
    write_hit_csv(rows, r.path("hits.csv"));
    r.emitted("hits.csv");
    const auto f = fit_sandwich(rows);
    r.manifest.extra["sandwich"] = {{"c", f.c}, {"finite", f.finite}};
    for (const auto& e : rows)
        std::printf("%s p in [%.4f, %.4f] cap %.4g cover %.4g\n", e.target_id.c_str(), e.p_lo, e.p_hi, e.cap,
                    e.hausdorff_sum);
    return 0;
}

int verify_all(Run& r, std::uint64_t seed) {
    AcceptanceOptions o;
    o.seed = seed;
    for (double v : r.cfg.get_list("criteria", {})) o.only.insert(int(v));
    bool ok = true;
    r.manifest.verdicts = run_acceptance(o, [&](const Verdict& v) {
        std::printf("%s  %s: %s\n", v.pass ? "PASS" : "FAIL", v.check.c_str(), v.detail.c_str());
        std::fflush(stdout);
        ok = ok && v.pass;
    });
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fracheat: simulation, regularity and hitting experiments"};
    std::string config_file, out = "fracheat_out";
    std::uint64_t seed = 0;
    int threads = 0;
    app.add_option("--config", config_file, "key = value config file")->envname("FRACHEAT_CONFIG");
    auto* seed_opt = app.add_option("--seed", seed, "overrides the config seed")->envname("FRACHEAT_SEED");
    app.add_option("--threads", threads, "worker threads")->envname("FRACHEAT_THREADS")->check(CLI::PositiveNumber);
    app.add_option("--out", out, "output directory")->envname("FRACHEAT_OUT");
    app.require_subcommand(1, 1);
    app.fallthrough();
    for (const char* s : {"spectrum", "simulate", "metric", "holder", "capacity", "hausdorff", "hit", "verify-all"})
        app.add_subcommand(s);
    CLI11_PARSE(app, argc, argv);
    const std::string cmd = app.get_subcommands().front()->get_name();

    Run r;
    r.out = out;
    r.manifest.subcommand = cmd;
    r.manifest.started = utc_now();
    int code = 0;
    try {
        if (config_file.empty()) {
            if (cmd != "verify-all") throw DomainError("--config is required for " + cmd);
        } else {
            r.cfg = RunConfig::load(config_file);
        }
        if (*seed_opt) r.cfg.set("seed", std::to_string(seed));
        if (threads > 0) omp_set_num_threads(threads);
        r.manifest.seed = r.cfg.get_u64("seed", cmd == "verify-all" ? AcceptanceOptions{}.seed : 1);
        r.manifest.threads = omp_get_max_threads();
        r.manifest.config_hash = r.cfg.hash();
        fs::create_directories(out);
        write_atomic(r.path("config.txt"), r.cfg.serialize());
        r.emitted("config.txt");

        if (cmd == "spectrum") code = spectrum(r);
        else if (cmd == "simulate") code = simulate_cmd(r);
        else if (cmd == "metric") code = metric(r);
        else if (cmd == "holder") code = holder(r);
        else if (cmd == "capacity") code = capacity_cmd(r);
        else if (cmd == "hausdorff") code = hausdorff_cmd(r);
        else if (cmd == "hit") code = hit(r);
        else code = verify_all(r, r.manifest.seed);
    } catch (const DomainError& e) {
        std::cerr << cmd << ": " << e.what() << "\n";
        std::cout << e.what() << "\n";
        code = 2;
    } catch (const NumericalError& e) {
        std::cerr << cmd << ": numerical failure: " << e.what() << "\n";
        code = 1;
    } catch (const std::exception& e) {
        std::cerr << cmd << ": " << e.what() << "\n";
        code = 1;
    }
    r.manifest.exit_code = code;
    r.manifest.finished = utc_now();
    try {
        fs::create_directories(out);
        r.manifest.write(r.path("manifest.json"));
    } catch (const std::exception& e) {
        std::cerr << "cannot write manifest: " << e.what() << "\n";
        if (code == 0) code = 1;
    }
    return code;
}
