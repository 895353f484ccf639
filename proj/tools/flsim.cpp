// Command-line driver: deterministic simulation and analysis runs configured
// by key=value files.  Exit codes: 0 success, 2 configuration/validation
// failure, 3 numerical failure.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "flsim/config.hpp"
#include "flsim/errors.hpp"
#include "flsim/experiments.hpp"
#include "flsim/fft.hpp"
#include "flsim/grid.hpp"
#include "flsim/mollifier.hpp"
#include "flsim/noise.hpp"
#include "flsim/ou.hpp"
#include "flsim/rate.hpp"
#include "flsim/schedule.hpp"
#include "flsim/skeleton.hpp"
#include "flsim/snapshot.hpp"
#include "flsim/spde.hpp"
#include "flsim/ssep.hpp"
#include "flsim/stats.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::ofstream open_out(const fs::path& p) {
    fs::create_directories(p.parent_path().empty() ? "." : p.parent_path());
    std::ofstream os(p);
    if (!os) throw flsim::ConfigError("cannot open " + p.string() + " for writing");
    os << std::setprecision(17);
    return os;
}

void write_sidecar(const fs::path& out_dir, const flsim::Config& cfg, std::uint64_t seed) {
    json j;
    j["config_hash"] = cfg.hash();
    j["seed"] = seed;
    json entries = json::object();
    for (const auto& [k, v] : cfg.entries()) entries[k] = v;
    j["config"] = entries;
    auto os = open_out(out_dir / "run.json");
    os << j.dump(2) << "\n";
}

// rho0 = constant:<c> | snapshot:<file> | modes:<mean>;k1 [k2]:<sin>:<cos>;...
flsim::ScalarField parse_rho0(const std::string& spec, const flsim::TorusGrid& grid) {
    using namespace flsim;
    if (spec.rfind("constant:", 0) == 0) {
        const double c = std::stod(spec.substr(9));
        return ScalarField(grid, c);
    }
    if (spec.rfind("snapshot:", 0) == 0) {
        ScalarField f = snapshot::read_field(spec.substr(9));
        if (f.grid != grid) throw ConfigError("rho0 snapshot grid does not match d/n");
        return f;
    }
    if (spec.rfind("modes:", 0) == 0) {
        std::istringstream is(spec.substr(6));
        std::string tok;
        if (!std::getline(is, tok, ';')) throw ConfigError("rho0 modes: missing mean");
        ScalarField f(grid, std::stod(tok));
        while (std::getline(is, tok, ';')) {
            const auto c1 = tok.find(':');
            const auto c2 = tok.find(':', c1 + 1);
            if (c1 == std::string::npos || c2 == std::string::npos)
                throw ConfigError("rho0 modes: expected k:<sin>:<cos>");
            std::istringstream ks(tok.substr(0, c1));
            std::vector<int> k;
            int ki;
            while (ks >> ki) k.push_back(ki);
            if (static_cast<int>(k.size()) != grid.d)
                throw ConfigError("rho0 modes: wave vector dimension mismatch");
            const double sa = std::stod(tok.substr(c1 + 1, c2 - c1 - 1));
            const double ca = std::stod(tok.substr(c2 + 1));
            WaveIndex w(k);
            for (std::size_t i = 0; i < f.size(); ++i) {
                const auto x = grid.point(i);
                f[i] += sa * scalar_basis_eval(w, BasisKind::Sin, x) +
                        ca * scalar_basis_eval(w, BasisKind::Cos, x);
            }
        }
        return f;
    }
    throw ConfigError("rho0: expected constant:/snapshot:/modes: prefix");
}

flsim::TorusGrid grid_from(const flsim::Config& cfg) {
    return flsim::TorusGrid(static_cast<int>(cfg.get_long("d")), static_cast<int>(cfg.get_long("n")));
}

void path_series_csv(const fs::path& file, const flsim::DensityPath& path,
                     flsim::SpectralTransform& ws) {
    auto os = open_out(file);
    os << "t,mass,min,max,l2,h1\n";
    for (std::size_t f = 0; f < path.frames.size(); ++f) {
        const auto& fr = path.frames[f];
        const double t = f * path.frame_dt;
        const auto [mn, mx] = std::minmax_element(fr.values.begin(), fr.values.end());
        flsim::VectorField grad;
        ws.gradient(fr, grad);
        double h1 = 0.0;
        for (int a = 0; a < fr.grid.d; ++a) h1 += flsim::l2_norm_sq(grad.comp[a]);
        os << t << ',' << flsim::mean(fr) << ',' << *mn << ',' << *mx << ','
           << flsim::l2_norm(fr) << ',' << std::sqrt(h1) << "\n";
    }
}

int cmd_solve_skeleton(const flsim::Config& cfg, const fs::path& out_dir) {
    using namespace flsim;
    TorusGrid grid = grid_from(cfg);
    SpectralTransform ws(grid);
    ScalarField rho0 = parse_rho0(cfg.get_string("rho0"), grid);
    SkeletonOptions opts;
    opts.stride = static_cast<int>(cfg.get_long("stride", 1));
    ControlFn control;
    ControlPath gpath;
    // control = none | <directory with comp0/, comp1/, ... snapshot paths>
    const std::string ctl = cfg.get_string("control", "none");
    if (ctl != "none") {
        const fs::path cd = ctl;
        for (int a = 0; a < grid.d; ++a) {
            DensityPath comp = snapshot::read_path(cd / ("comp" + std::to_string(a)));
            gpath.frame_dt = comp.frame_dt;
            if (gpath.frames.empty()) gpath.frames.resize(comp.frames.size(), VectorField(grid));
            for (std::size_t f = 0; f < comp.frames.size(); ++f)
                gpath.frames[f].comp[a] = comp.frames[f];
        }
        control = control_from_path(gpath);
    }
    DensityPath path = solve_skeleton(ws, rho0, control, cfg.get_double("T"),
                                      cfg.get_double("dt"), opts);
    snapshot::write_path(out_dir / "frames", path);
    path_series_csv(out_dir / "series.csv", path, ws);
    write_sidecar(out_dir, cfg, 0);
    return 0;
}

flsim::ScalingParams params_from(const flsim::Config& cfg) {
    flsim::ScalingParams p;
    p.epsilon = cfg.get_double("epsilon");
    p.eta = cfg.get_double("eta");
    p.K = static_cast<int>(cfg.get_long("K"));
    p.M = static_cast<int>(cfg.get_long("M", cfg.get_long("n") / 2 - 1));
    return p;
}

int cmd_simulate_spde(const flsim::Config& cfg, const fs::path& out_dir, std::uint64_t seed,
                      int replicas) {
    using namespace flsim;
    TorusGrid grid = grid_from(cfg);
    ScalarField rho0 = parse_rho0(cfg.get_string("rho0"), grid);
    ScalingParams p = params_from(cfg);
    p.validate(grid);
    const double T = cfg.get_double("T"), dt = cfg.get_double("dt");
    const int stride = static_cast<int>(cfg.get_long("stride", 1));

    std::vector<SpdeRunRecord> recs(replicas);
    parallel_for(static_cast<std::size_t>(replicas), [&](std::size_t r) {
        SpectralTransform ws(grid);
        MollifiedSqrt moll(p.eta);
        SpdeSystem sys(ws, p, moll);
        SpdeOptions opts;
        opts.stride = stride;
        recs[r] = sys.run(rho0, nullptr, T, dt, mix_seed(seed, r), opts);
    });

    auto os = open_out(out_dir / "diagnostics.csv");
    os << "replica,t,mass,l2,h1\n";
    for (int r = 0; r < replicas; ++r)
        for (const auto& dgn : recs[r].diag)
            os << r << ',' << dgn.t << ',' << dgn.mass << ',' << dgn.l2 << ',' << dgn.h1 << "\n";
    snapshot::write_path(out_dir / "replica0_frames", recs[0].path);
    write_sidecar(out_dir, cfg, seed);
    return 0;
}

int cmd_simulate_ssep(const flsim::Config& cfg, const fs::path& out_dir, std::uint64_t seed) {
    using namespace flsim;
    const int d = static_cast<int>(cfg.get_long("d", 1));
    const int N = static_cast<int>(cfg.get_long("N"));
    const int n = static_cast<int>(cfg.get_long("n"));
    const int replicas = static_cast<int>(cfg.get_long("replicas", 100));
    const double T = cfg.get_double("T");
    const int kmax = static_cast<int>(cfg.get_long("kmax", 3));
    TorusGrid grid(d, n);
    ScalarField rho0 = parse_rho0(cfg.get_string("rho0"), grid);
    auto mean_sites = discrete_heat_mean(rho0, d, N, T);

    std::vector<std::vector<double>> records(replicas);
    ScalarField mean_density(grid);
    std::mutex agg;
    parallel_for(static_cast<std::size_t>(replicas), [&](std::size_t r) {
        SpectralTransform ws(grid);
        ModeMap map(grid, kmax);
        Rng rng = make_rng(seed, r);
        SsepConfiguration c = init_bernoulli(rho0, N, rng);
        advance(c, T, rng);
        ScalarField dens = empirical_density(c, grid);
        ScalarField fluct = fluctuation_field(c, mean_sites, grid);
        SpectralCoeffs modes = transform(ws, fluct, map, kmax);
        records[r].insert(records[r].end(), modes.sin_c.begin(), modes.sin_c.end());
        records[r].insert(records[r].end(), modes.cos_c.begin(), modes.cos_c.end());
        std::lock_guard<std::mutex> lk(agg);
        for (std::size_t i = 0; i < dens.size(); ++i) mean_density[i] += dens[i];
    }, 1);  // single worker keeps the density accumulation deterministic
    for (double& v : mean_density.values) v /= replicas;

    fs::create_directories(out_dir);
    snapshot::write_field(out_dir / "mean_density.fls", mean_density);
    auto stats = ensemble_stats(records);
    const auto modes = enumerate_half_lattice(d, kmax);
    auto os = open_out(out_dir / "mode_stats.csv");
    os << "k,kind,variance,variance_se\n";
    for (std::size_t m = 0; m < modes.size(); ++m) {
        if (modes[m].is_zero()) continue;
        std::string ks;
        for (int c : modes[m].k) ks += (ks.empty() ? "" : " ") + std::to_string(c);
        os << ks << ",sin," << stats[m].variance << ',' << stats[m].variance_se << "\n";
        os << ks << ",cos," << stats[modes.size() + m].variance << ','
           << stats[modes.size() + m].variance_se << "\n";
    }
    write_sidecar(out_dir, cfg, seed);
    return 0;
}

int cmd_simulate_ou(const flsim::Config& cfg, const fs::path& out_dir, std::uint64_t seed) {
    using namespace flsim;
    TorusGrid grid = grid_from(cfg);
    const int m_sim = static_cast<int>(cfg.get_long("m_sim"));
    const int K_noise = static_cast<int>(cfg.get_long("K_noise", 4 * m_sim));
    const double T = cfg.get_double("T"), dt = cfg.get_double("dt");
    const int replicas = static_cast<int>(cfg.get_long("replicas", 1000));
    ScalarField rho0 = parse_rho0(cfg.get_string("rho0"), grid);
    const double rho_star = mean(rho0);

    DensityPath rho_bar;
    {
        SpectralTransform ws(grid);
        SkeletonOptions o;
        o.stride = std::max(1L, static_cast<long>(std::llround(T / dt)) / 64);
        rho_bar = solve_heat(ws, rho0, T, dt, o);
    }

    std::vector<std::vector<double>> records(replicas);
    parallel_for(static_cast<std::size_t>(replicas), [&](std::size_t r) {
        SpectralTransform ws(grid);
        Rng rng = make_rng(seed, r);
        OuOptions o;
        o.stride = 1 << 20;
        auto path = simulate_ou(ws, rho_bar, m_sim, K_noise, T, dt, rng, o);
        const auto& last = path.back().coeffs;
        records[r].insert(records[r].end(), last.sin_c.begin(), last.sin_c.end());
        records[r].insert(records[r].end(), last.cos_c.begin(), last.cos_c.end());
    });

    auto stats = ensemble_stats(records);
    const auto modes = enumerate_half_lattice(grid.d, m_sim);
    auto os = open_out(out_dir / "mode_variance.csv");
    os << "k,kind,variance,variance_se,analytic_constant_profile\n";
    for (std::size_t m = 0; m < modes.size(); ++m) {
        if (modes[m].is_zero()) continue;
        std::string ks;
        for (int c : modes[m].k) ks += (ks.empty() ? "" : " ") + std::to_string(c);
        const double ana = analytic_mode_variance(rho_star, modes[m], T);
        os << ks << ",sin," << stats[m].variance << ',' << stats[m].variance_se << ',' << ana
           << "\n";
        os << ks << ",cos," << stats[modes.size() + m].variance << ','
           << stats[modes.size() + m].variance_se << ',' << ana << "\n";
    }
    write_sidecar(out_dir, cfg, seed);
    return 0;
}

int cmd_rate(const fs::path& path_dir, const fs::path& out_file) {
    using namespace flsim;
    DensityPath path = snapshot::read_path(path_dir);
    SpectralTransform ws(path.grid);
    RateResult res = minimal_control(ws, path);
    json j;
    j["value"] = res.value;
    j["infinite"] = res.infinite;
    j["kappa_contribution"] = res.kappa_contribution;
    j["max_residual"] = res.max_residual;
    auto os = open_out(out_file);
    os << j.dump(2) << "\n";
    return 0;
}

int cmd_schedule(const flsim::Config& cfg, const fs::path& out_dir) {
    using namespace flsim;
    auto eps = cfg.get_double_list("eps_list");
    ScheduleReport rep = build_schedule(eps, cfg.get_double("a"), cfg.get_double("b"),
                                        static_cast<int>(cfg.get_long("d")));
    auto os = open_out(out_dir / "schedule.csv");
    os << "epsilon,eta,K,n_corr,sup_deriv,diag_uv,diag_moll,diag_clt\n";
    for (const auto& e : rep.entries)
        os << e.epsilon << ',' << e.eta << ',' << e.K << ',' << e.n_corr << ',' << e.sup_deriv
           << ',' << e.diag_uv << ',' << e.diag_moll << ',' << e.diag_clt << "\n";
    os << "# ldp_flag=" << (rep.ldp_flag ? 1 : 0) << " clt_flag=" << (rep.clt_flag ? 1 : 0)
       << "\n";
    write_sidecar(out_dir, cfg, 0);
    return 0;
}

std::vector<flsim::ScalingParams> schedule_from(const flsim::Config& cfg) {
    std::vector<flsim::ScalingParams> sched;
    if (cfg.has("eps_list")) {
        auto eps = cfg.get_double_list("eps_list");
        auto rep = flsim::build_schedule(eps, cfg.get_double("a"), cfg.get_double("b"),
                                         static_cast<int>(cfg.get_long("d")));
        for (const auto& e : rep.entries) {
            flsim::ScalingParams p;
            p.epsilon = e.epsilon;
            p.eta = e.eta;
            p.K = e.K;
            p.M = static_cast<int>(cfg.get_long("M", cfg.get_long("n") / 2 - 1));
            sched.push_back(p);
        }
    } else {
        sched.push_back(params_from(cfg));
    }
    return sched;
}

int cmd_clt(const flsim::Config& cfg, const fs::path& out_dir, std::uint64_t seed) {
    using namespace flsim;
    TorusGrid grid = grid_from(cfg);
    auto sched = schedule_from(cfg);
    CltResult res = clt_experiment(grid, cfg.get_double("rho", 0.5), sched, cfg.get_double("T"),
                                   cfg.get_double("dt"),
                                   static_cast<int>(cfg.get_long("replicas")), seed,
                                   static_cast<int>(cfg.get_long("kmax", 4)),
                                   cfg.get_double("delta", 1.0));
    auto os = open_out(out_dir / "clt.csv");
    os << "epsilon,K,eta,k,kind,variance,variance_se,analytic,z,h_dist,h_dist_se\n";
    for (const auto& e : res.entries)
        for (const auto& row : e.rows) {
            std::string ks;
            for (int c : row.k.k) ks += (ks.empty() ? "" : " ") + std::to_string(c);
            os << e.params.epsilon << ',' << e.params.K << ',' << e.params.eta << ',' << ks << ','
               << (row.is_sin ? "sin" : "cos") << ',' << row.variance << ',' << row.se << ','
               << row.reference << ',' << row.z << ',' << e.h_dist << ',' << e.h_dist_se << "\n";
        }
    write_sidecar(out_dir, cfg, seed);
    return 0;
}

int cmd_ssep_vs_spde(const flsim::Config& cfg, const fs::path& out_dir, std::uint64_t seed) {
    using namespace flsim;
    const int N = static_cast<int>(cfg.get_long("N"));
    ScalingParams p;
    p.epsilon = cfg.get_double("epsilon", 1.0 / N);
    p.eta = cfg.get_double("eta");
    p.K = static_cast<int>(cfg.get_long("K"));
    p.M = static_cast<int>(cfg.get_long("M", cfg.get_long("n") / 2 - 1));
    ThreeWayResult res = ssep_vs_spde_experiment(
        N, static_cast<int>(cfg.get_long("n")), cfg.get_double("rho", 0.5), p,
        cfg.get_double("T"), cfg.get_double("dt"),
        static_cast<int>(cfg.get_long("ssep_replicas")),
        static_cast<int>(cfg.get_long("spde_replicas")), seed,
        static_cast<int>(cfg.get_long("kmax", 3)));
    auto os = open_out(out_dir / "three_way.csv");
    os << "k,kind,ssep_var,ssep_se,spde_var,spde_se,ou_var,z_ssep_spde,z_ssep_ou,z_spde_ou\n";
    for (const auto& r : res.rows) {
        std::string ks;
        for (int c : r.k.k) ks += (ks.empty() ? "" : " ") + std::to_string(c);
        os << ks << ',' << (r.is_sin ? "sin" : "cos") << ',' << r.ssep_var << ',' << r.ssep_se
           << ',' << r.spde_var << ',' << r.spde_se << ',' << r.ou_var << ',' << r.z_ssep_spde
           << ',' << r.z_ssep_ou << ',' << r.z_spde_ou << "\n";
    }
    write_sidecar(out_dir, cfg, seed);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"conservative-SPDE / exclusion-process simulation toolkit"};
    app.require_subcommand(1);

    std::string config_path, out = "out", rate_path;
    std::uint64_t seed = 0;
    int replicas = 1;

    auto add_common = [&](CLI::App* sub, bool needs_config = true) {
        if (needs_config) sub->add_option("--config", config_path, "key=value config file")->required();
        sub->add_option("--seed", seed, "master seed");
        sub->add_option("--out", out, "output directory");
    };

    auto* sk = app.add_subcommand("solve-skeleton", "deterministic controlled drift-diffusion solve");
    add_common(sk);
    auto* sp = app.add_subcommand("simulate-spde", "stochastic conservative SPDE replicas");
    add_common(sp);
    sp->add_option("--replicas", replicas, "replica count");
    auto* ss = app.add_subcommand("simulate-ssep", "exclusion-process simulation");
    add_common(ss);
    auto* ou = app.add_subcommand("simulate-ou", "fluctuation OU process ensemble");
    add_common(ou);
    auto* rt = app.add_subcommand("rate", "action functional of a stored density path");
    rt->add_option("--path", rate_path, "snapshot directory of the density path")->required();
    rt->add_option("--out", out, "output JSON file");
    auto* sc = app.add_subcommand("schedule", "scaling-schedule diagnostics");
    add_common(sc);
    auto* cl = app.add_subcommand("clt-experiment", "fluctuation-variance comparison vs analytic OU");
    add_common(cl);
    auto* tv = app.add_subcommand("ssep-vs-spde", "three-way fluctuation comparison");
    add_common(tv);

    CLI11_PARSE(app, argc, argv);

    try {
        if (sk->parsed()) return cmd_solve_skeleton(flsim::Config::parse_file(config_path), out);
        if (sp->parsed())
            return cmd_simulate_spde(flsim::Config::parse_file(config_path), out, seed, replicas);
        if (ss->parsed()) return cmd_simulate_ssep(flsim::Config::parse_file(config_path), out, seed);
        if (ou->parsed()) return cmd_simulate_ou(flsim::Config::parse_file(config_path), out, seed);
        if (rt->parsed()) return cmd_rate(rate_path, out == "out" ? "result.json" : out);
        if (sc->parsed()) return cmd_schedule(flsim::Config::parse_file(config_path), out);
        if (cl->parsed()) return cmd_clt(flsim::Config::parse_file(config_path), out, seed);
        if (tv->parsed()) return cmd_ssep_vs_spde(flsim::Config::parse_file(config_path), out, seed);
    } catch (const flsim::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const flsim::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
