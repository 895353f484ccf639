#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <vector>

#include "flsim/errors.hpp"
#include "flsim/fft.hpp"
#include "flsim/grid.hpp"
#include "flsim/mollifier.hpp"
#include "flsim/ou.hpp"
#include "flsim/parallel.hpp"
#include "flsim/rng.hpp"
#include "flsim/schedule.hpp"
#include "flsim/spde.hpp"
#include "flsim/ssep.hpp"
#include "flsim/stats.hpp"

namespace flsim {

// Per-component statistics of an ensemble of records (records x components).
inline std::vector<ScalarStats> ensemble_stats(const std::vector<std::vector<double>>& records) {
    if (records.size() < 2) throw ConfigError("ensemble_stats: need at least 2 records");
    const std::size_t m = records.front().size();
    for (const auto& r : records)
        if (r.size() != m) throw ConfigError("ensemble_stats: ragged records");
    std::vector<ScalarStats> out(m);
    std::vector<double> col(records.size());
    for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t r = 0; r < records.size(); ++r) col[r] = records[r][j];
        out[j] = scalar_stats(col);
    }
    return out;
}

struct ModeVarianceRow {
    WaveIndex k;
    bool is_sin = false;
    double variance = 0.0;
    double se = 0.0;
    double reference = 0.0;  // analytic or partner-ensemble value
    double z = 0.0;
};

struct CltEntryResult {
    ScalingParams params;
    std::vector<ModeVarianceRow> rows;
    double h_dist = 0.0;     // covariance-gap proxy for the H^{-(d+delta)/2} distance
    double h_dist_se = 0.0;
    int failures = 0;
};

struct CltResult {
    std::vector<CltEntryResult> entries;
};

namespace detail {

inline SpectralCoeffs field_modes(SpectralTransform& ws, const ScalarField& f,
                                  const ModeMap& map, int kmax) {
    return transform(ws, f, map, kmax);
}

}  // namespace detail

// CLT experiment: for each schedule entry run SPDE replicas from the constant
// profile rho_star, form v^eps = eps^{-1/2} (rho(T) - rho_star), and compare
// per-mode variances against the analytic OU values.  The reported distance is
// the H^{-(d+delta)/2}-weighted covariance gap
//   ( sum_k |Var_hat - Var_OU| / |k|^{d+delta} )^{1/2},
// a proxy for the theorem's strong-norm distance that is estimable without
// coupling the two processes.
inline CltResult clt_experiment(const TorusGrid& grid, double rho_star,
                                const std::vector<ScalingParams>& schedule, double T, double dt,
                                int replicas, std::uint64_t master_seed, int kmax, double delta,
                                unsigned threads = 0) {
    if (schedule.empty()) throw ConfigError("clt_experiment: empty schedule");
    if (replicas < 3) throw ConfigError("clt_experiment: need at least 3 replicas");
    if (rho_star <= 0.0 || rho_star >= 1.0)
        throw ConfigError("clt_experiment: rho* must be in (0,1)");

    ScalarField rho0(grid);
    for (double& v : rho0.values) v = rho_star;
    const auto modes = enumerate_half_lattice(grid.d, kmax);

    CltResult result;
    for (std::size_t e = 0; e < schedule.size(); ++e) {
        const ScalingParams& p = schedule[e];
        p.validate(grid);
        if (p.eta <= 0.0) throw ConfigError("clt_experiment: eta must be positive");
        if (p.epsilon <= 0.0) throw ConfigError("clt_experiment: epsilon must be positive");

        // one record per replica: [sin_k..., cos_k...]
        std::vector<std::vector<double>> records(replicas);
        std::vector<char> failed(replicas, 0);
        parallel_for(static_cast<std::size_t>(replicas), [&](std::size_t r) {
            SpectralTransform ws(grid);
            MollifiedSqrt moll(p.eta);
            SpdeSystem sys(ws, p, moll);
            SpdeOptions opts;
            opts.stride = 1 << 20;  // final frame only
            const std::uint64_t seed =
                mix_seed(master_seed, static_cast<std::uint64_t>(e) * 7000027ull + r);
            try {
                SpdeRunRecord rec = sys.run(rho0, nullptr, T, dt, seed, opts);
                const ScalarField& rhoT = rec.path.frames.back();
                ScalarField v(grid);
                const double sc = 1.0 / std::sqrt(p.epsilon);
                for (std::size_t i = 0; i < v.size(); ++i) v[i] = sc * (rhoT[i] - rho_star);
                ModeMap map(grid, kmax);
                SpectralCoeffs c = detail::field_modes(ws, v, map, kmax);
                records[r].reserve(2 * c.modes.size());
                for (double x : c.sin_c) records[r].push_back(x);
                for (double x : c.cos_c) records[r].push_back(x);
            } catch (const NumericalError&) {
                failed[r] = 1;
            }
        }, threads);

        CltEntryResult entry;
        entry.params = p;
        std::vector<std::vector<double>> ok;
        for (int r = 0; r < replicas; ++r) {
            if (failed[r]) ++entry.failures;
            else ok.push_back(std::move(records[r]));
        }
        if (entry.failures * 100 > replicas)
            throw NumericalError("clt_experiment: more than 1% of replicas blew up");
        auto stats = ensemble_stats(ok);

        double h2 = 0.0, h2_var = 0.0;
        const std::size_t nm = modes.size();
        for (std::size_t m = 0; m < nm; ++m) {
            if (modes[m].is_zero()) continue;
            const double ref = analytic_mode_variance(rho_star, modes[m], T);
            const double w =
                std::pow(static_cast<double>(modes[m].norm_sq()), 0.5 * (grid.d + delta));
            for (int half = 0; half < 2; ++half) {
                const ScalarStats& s = stats[half * nm + m];
                ModeVarianceRow row;
                row.k = modes[m];
                row.is_sin = half == 0;
                row.variance = s.variance;
                row.se = s.variance_se;
                row.reference = ref;
                row.z = s.variance_se > 0.0 ? (s.variance - ref) / s.variance_se : 0.0;
                entry.rows.push_back(row);
                h2 += std::abs(s.variance - ref) / w;
                h2_var += (s.variance_se / w) * (s.variance_se / w);
            }
        }
        entry.h_dist = std::sqrt(h2);
        entry.h_dist_se = entry.h_dist > 0.0 ? 0.5 * std::sqrt(h2_var) / entry.h_dist
                                             : std::sqrt(std::sqrt(h2_var));
        result.entries.push_back(std::move(entry));
    }
    return result;
}

struct ThreeWayRow {
    WaveIndex k;
    bool is_sin = false;
    double ssep_var = 0.0, ssep_se = 0.0;
    double spde_var = 0.0, spde_se = 0.0;
    double ou_var = 0.0;  // analytic, no error
    double z_ssep_spde = 0.0, z_ssep_ou = 0.0, z_spde_ou = 0.0;
};

struct ThreeWayResult {
    std::vector<ThreeWayRow> rows;
    int ssep_replicas = 0, spde_replicas = 0;
};

// Three-way fluctuation comparison at equilibrium density rho_star.
//
// SSEP side: the dynamically generated fluctuation  m^N(T) - P_T m^N(0)
// (discrete heat propagator P_T applied mode-wise) has mode variance
// sigma (1 - e^{-2 lambda T}) with sigma = rho(1-rho); the OU target is
// sigma (1 - e^{-2 lambda T})/2, so the SSEP modes are scaled by 1/sqrt(2).
// The factor traces to the orthonormal sin/cos convention for the OU noise;
// it is fixed here once and validated against both other columns.
//
// SPDE side: v^eps = eps^{-1/2}(rho(T) - rho_star) with matched eps = 1/N.
inline ThreeWayResult ssep_vs_spde_experiment(int N, int n_coarse, double rho_star,
                                              const ScalingParams& spde_params, double T,
                                              double dt, int ssep_replicas, int spde_replicas,
                                              std::uint64_t master_seed, int kmax,
                                              unsigned threads = 0) {
    if (N % n_coarse != 0)
        throw ConfigError("ssep_vs_spde: coarse grid must divide the lattice size");
    if (rho_star <= 0.0 || rho_star >= 1.0)
        throw ConfigError("ssep_vs_spde: rho* must be in (0,1)");
    const int d = 1;
    TorusGrid grid(d, n_coarse);
    const auto modes = enumerate_half_lattice(d, kmax);
    const std::size_t nm = modes.size();

    ScalarField flat(grid);
    for (double& v : flat.values) v = rho_star;

    // constant-profile discrete heat mean is constant for all t
    std::vector<double> mean_sites(ssep_detail::total_sites(d, N), rho_star);

    // discrete heat propagator per mode over [0, T]
    std::vector<double> disc_decay(nm, 1.0);
    for (std::size_t m = 0; m < nm; ++m) {
        if (modes[m].is_zero()) continue;
        const double lam = static_cast<double>(N) * N * 2.0 *
                           (1.0 - std::cos(2.0 * std::numbers::pi * modes[m].k[0] / N));
        disc_decay[m] = std::exp(-lam * T);
    }

    std::vector<std::vector<double>> ssep_records(ssep_replicas);
    parallel_for(static_cast<std::size_t>(ssep_replicas), [&](std::size_t r) {
        SpectralTransform ws(grid);
        ModeMap map(grid, kmax);
        Rng rng = make_rng(mix_seed(master_seed, 0x55e9'0000ull + r));
        SsepConfiguration cfg = init_bernoulli(flat, N, rng);
        ScalarField f0 = fluctuation_field(cfg, mean_sites, grid);
        SpectralCoeffs c0 = detail::field_modes(ws, f0, map, kmax);
        advance(cfg, T, rng);
        ScalarField fT = fluctuation_field(cfg, mean_sites, grid);
        SpectralCoeffs cT = detail::field_modes(ws, fT, map, kmax);
        const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
        ssep_records[r].reserve(2 * nm);
        for (std::size_t m = 0; m < nm; ++m)
            ssep_records[r].push_back(inv_sqrt2 * (cT.sin_c[m] - disc_decay[m] * c0.sin_c[m]));
        for (std::size_t m = 0; m < nm; ++m)
            ssep_records[r].push_back(inv_sqrt2 * (cT.cos_c[m] - disc_decay[m] * c0.cos_c[m]));
    }, threads);

    std::vector<std::vector<double>> spde_records(spde_replicas);
    parallel_for(static_cast<std::size_t>(spde_replicas), [&](std::size_t r) {
        SpectralTransform ws(grid);
        MollifiedSqrt moll(spde_params.eta);
        SpdeSystem sys(ws, spde_params, moll);
        SpdeOptions opts;
        opts.stride = 1 << 20;
        SpdeRunRecord rec =
            sys.run(flat, nullptr, T, dt, mix_seed(master_seed, 0x5bde'0000ull + r), opts);
        const ScalarField& rhoT = rec.path.frames.back();
        ScalarField v(grid);
        const double sc = 1.0 / std::sqrt(spde_params.epsilon);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = sc * (rhoT[i] - rho_star);
        ModeMap map(grid, kmax);
        SpectralCoeffs c = detail::field_modes(ws, v, map, kmax);
        spde_records[r].reserve(2 * nm);
        for (double x : c.sin_c) spde_records[r].push_back(x);
        for (double x : c.cos_c) spde_records[r].push_back(x);
    }, threads);

    auto sstats = ensemble_stats(ssep_records);
    auto pstats = ensemble_stats(spde_records);

    ThreeWayResult out;
    out.ssep_replicas = ssep_replicas;
    out.spde_replicas = spde_replicas;
    for (std::size_t m = 0; m < nm; ++m) {
        if (modes[m].is_zero()) continue;
        const double ou = analytic_mode_variance(rho_star, modes[m], T);
        for (int half = 0; half < 2; ++half) {
            const ScalarStats& ss = sstats[half * nm + m];
            const ScalarStats& ps = pstats[half * nm + m];
            ThreeWayRow row;
            row.k = modes[m];
            row.is_sin = half == 0;
            row.ssep_var = ss.variance;
            row.ssep_se = ss.variance_se;
            row.spde_var = ps.variance;
            row.spde_se = ps.variance_se;
            row.ou_var = ou;
            const double se_pair = std::sqrt(ss.variance_se * ss.variance_se +
                                             ps.variance_se * ps.variance_se);
            row.z_ssep_spde = se_pair > 0.0 ? (ss.variance - ps.variance) / se_pair : 0.0;
            row.z_ssep_ou = ss.variance_se > 0.0 ? (ss.variance - ou) / ss.variance_se : 0.0;
            row.z_spde_ou = ps.variance_se > 0.0 ? (ps.variance - ou) / ps.variance_se : 0.0;
            out.rows.push_back(row);
        }
    }
    return out;
}

}  // namespace flsim
