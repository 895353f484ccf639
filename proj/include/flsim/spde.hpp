#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <vector>

#include "flsim/errors.hpp"
#include "flsim/fft.hpp"
#include "flsim/grid.hpp"
#include "flsim/mollifier.hpp"
#include "flsim/noise.hpp"
#include "flsim/parallel.hpp"
#include "flsim/rng.hpp"
#include "flsim/skeleton.hpp"
#include "flsim/stats.hpp"

namespace flsim {

struct SpdeOptions {
    int stride = 1;
    double blowup_tol = 1e6;   // abort when any coefficient magnitude exceeds this
    double mass_tol = 1e-12;   // per-step zero-mode drift check
    bool validate_dt = true;   // enforce the explicit-correction stability rule
};

struct SpdeDiagnostic {
    double t = 0.0, mass = 0.0, l2 = 0.0, h1 = 0.0;
};

struct SpdeRunRecord {
    DensityPath path;
    std::vector<SpdeDiagnostic> diag;
    std::uint64_t seed = 0;
    ScalingParams params;
};

// Explicit-correction stability rule: the Ito correction is a diffusion with
// coefficient D = eps*N_K*sup|(s^eta)'|^2/2 treated explicitly, so we require
// D*dt*lambda_max <= 1/4 with lambda_max the largest retained eigenvalue.
inline void validate_spde_dt(const TorusGrid& grid, const ScalingParams& p, double dt,
                             double sup_sprime) {
    if (dt <= 0.0) throw ConfigError("spde: dt must be positive");
    if (p.epsilon == 0.0) return;
    const double D = 0.5 * p.epsilon * static_cast<double>(correction_constant(grid.d, p.K)) *
                     sup_sprime * sup_sprime;
    const double lam_max = 4.0 * std::numbers::pi * std::numbers::pi *
                           static_cast<double>(p.M) * static_cast<double>(p.M) *
                           static_cast<double>(grid.d);
    if (D * dt * lam_max > 0.25)
        throw ConfigError("spde: dt violates the explicit-correction stability rule (reduce dt or eta)");
}

// Semi-implicit Euler-Maruyama integrator for
//   d rho = Lap(rho) dt - sqrt(eps) div(s(rho) dxi^K) - div(s(rho) P_K g) dt
//           + (eps N_K / 2) div(s'(rho)^2 grad rho) dt
// in Ito form.  The heat part is integrated exactly in coefficient space; the
// remaining terms are explicit.  The per-mode noise damping factor
// sqrt((1 - e^{-2 lambda dt}) / (2 lambda dt)) makes the frozen-coefficient
// mode variance exact, so the linearized oracle holds without dt bias.
class SpdeSystem {
public:
    SpdeSystem(SpectralTransform& ws, const ScalingParams& params,
               std::function<double(double)> s, std::function<double(double)> sprime,
               double sup_sprime)
        : ws_(ws), params_(params), s_(std::move(s)), sprime_(std::move(sprime)),
          sup_sprime_(sup_sprime), map_(ws.grid(), params.K),
          n_corr_(static_cast<double>(correction_constant(ws.grid().d, params.K))) {
        params_.validate(ws.grid());
        build_projection_mask();
    }

    SpdeSystem(SpectralTransform& ws, const ScalingParams& params, const MollifiedSqrt& moll)
        : SpdeSystem(ws, params, [&moll](double x) { return moll(x); },
                     [&moll](double x) { return moll.prime(x); }, moll.sup_deriv()) {}

    const ScalingParams& params() const { return params_; }

    // Magnitude of the Ito-correction drift for the current state; used by the
    // constant-coefficient consistency check (it must vanish when s' == 0).
    double correction_l2(const ScalarField& rho) {
        ScalarField corr(ws_.grid());
        correction_drift(rho, corr);
        return l2_norm(corr);
    }

    SpdeRunRecord run(const ScalarField& rho0, const ControlPath* g, double T, double dt,
                      std::uint64_t seed, const SpdeOptions& opts = {}) {
        const TorusGrid& grid = ws_.grid();
        if (rho0.grid != grid) throw ConfigError("spde: initial condition grid mismatch");
        if (opts.validate_dt) validate_spde_dt(grid, params_, dt, sup_sprime_);
        const auto n_steps = static_cast<long>(std::llround(T / dt));

        EtdTables etd(ws_, dt);
        const auto& lam = ws_.laplacian_symbol();
        std::vector<double> noise_amp(lam.size());
        for (std::size_t i = 0; i < lam.size(); ++i) {
            noise_amp[i] = lam[i] > 0.0
                               ? std::sqrt((1.0 - etd.decay[i] * etd.decay[i]) / (2.0 * lam[i] * dt))
                               : 1.0;
        }

        Rng rng = make_rng(seed);
        SpdeRunRecord rec;
        rec.seed = seed;
        rec.params = params_;
        rec.path.grid = grid;
        rec.path.frame_dt = dt * opts.stride;

        ScalarField rho = rho0;
        std::vector<std::complex<double>> crho, cwork;
        ws_.forward(rho.values, crho);
        const std::complex<double> mass0 = crho[0];
        project_state(crho);
        crho[0] = mass0;
        ws_.inverse(crho, rho.values);
        rec.path.frames.push_back(rho);
        record_diag(rec, rho, 0.0);

        ScalarField drift(grid), noise_drift(grid);
        VectorField vec(grid), gproj(grid);
        const bool has_control = g != nullptr && !g->frames.empty();
        const double sqeps = std::sqrt(params_.epsilon);

        for (long step = 0; step < n_steps; ++step) {
            const double t = step * dt;

            // deterministic drift per unit time (control flux + Ito correction)
            correction_drift(rho, drift);
            if (has_control) {
                const std::size_t fi =
                    g->frame_dt > 0.0
                        ? std::min<std::size_t>(static_cast<std::size_t>(t / g->frame_dt),
                                                g->frames.size() - 1)
                        : 0;
                for (int a = 0; a < grid.d; ++a) {
                    gproj.comp[a] = g->frames[fi].comp[a];
                    ws_.project(gproj.comp[a], params_.K);
                    for (std::size_t i = 0; i < rho.size(); ++i)
                        vec.comp[a].values[i] = s_(rho[i]) * gproj.comp[a][i];
                }
                ScalarField ctrl(grid);
                ws_.divergence(vec, ctrl);
                for (std::size_t i = 0; i < rho.size(); ++i) drift[i] -= ctrl[i];
            }
            ws_.forward(drift.values, cwork);
            for (std::size_t i = 0; i < crho.size(); ++i)
                crho[i] = etd.decay[i] * crho[i] + etd.phi[i] * cwork[i];

            if (params_.epsilon > 0.0) {
                NoiseIncrement inc = sample_increment(rng, grid.d, params_.K, dt);
                VectorField W = noise_field(ws_, inc, map_);
                for (int a = 0; a < grid.d; ++a)
                    for (std::size_t i = 0; i < rho.size(); ++i)
                        W.comp[a].values[i] *= s_(rho[i]);
                ws_.divergence(W, noise_drift);
                ws_.forward(noise_drift.values, cwork);
                for (std::size_t i = 0; i < crho.size(); ++i)
                    crho[i] -= sqeps * noise_amp[i] * cwork[i];
            }

            project_state(crho);
            if (std::abs(crho[0] - mass0) > opts.mass_tol)
                throw NumericalError("spde: zero-mode drift at t=" + std::to_string(t));
            crho[0] = mass0;
            for (const auto& c : crho)
                if (!std::isfinite(c.real()) || !std::isfinite(c.imag()) ||
                    std::abs(c) > opts.blowup_tol)
                    throw NumericalError("spde: coefficient blow-up at t=" + std::to_string(t));
            ws_.inverse(crho, rho.values);

            if ((step + 1) % opts.stride == 0 || step + 1 == n_steps) {
                rec.path.frames.push_back(rho);
                record_diag(rec, rho, (step + 1) * dt);
            }
        }
        return rec;
    }

private:
    void build_projection_mask() {
        const auto& lam = ws_.laplacian_symbol();
        mask_.assign(lam.size(), true);
        std::vector<int> m(ws_.grid().d);
        const long K2 = static_cast<long>(params_.M) * params_.M;
        for (std::size_t i = 0; i < lam.size(); ++i) {
            ws_.frequency(i, m);
            long r2 = 0;
            for (int v : m) r2 += static_cast<long>(v) * v;
            mask_[i] = r2 <= K2;
        }
    }

    void project_state(std::vector<std::complex<double>>& c) const {
        for (std::size_t i = 0; i < c.size(); ++i)
            if (!mask_[i]) c[i] = 0.0;
    }

    // +(eps N/2) div(s'(rho)^2 grad rho), per unit time
    void correction_drift(const ScalarField& rho, ScalarField& out) {
        const TorusGrid& grid = ws_.grid();
        if (params_.epsilon == 0.0) {
            out = ScalarField(grid);
            return;
        }
        VectorField grad;
        ws_.gradient(rho, grad);
        const double coef = 0.5 * params_.epsilon * n_corr_;
        for (int a = 0; a < grid.d; ++a)
            for (std::size_t i = 0; i < rho.size(); ++i) {
                const double sp = sprime_(rho[i]);
                grad.comp[a].values[i] *= coef * sp * sp;
            }
        ws_.divergence(grad, out);
    }

    void record_diag(SpdeRunRecord& rec, const ScalarField& rho, double t) {
        SpdeDiagnostic d;
        d.t = t;
        d.mass = mean(rho);
        d.l2 = l2_norm(rho);
        VectorField grad;
        ws_.gradient(rho, grad);
        double h1 = 0.0;
        for (int a = 0; a < rho.grid.d; ++a) h1 += l2_norm_sq(grad.comp[a]);
        d.h1 = std::sqrt(h1);
        rec.diag.push_back(d);
    }

    SpectralTransform& ws_;
    ScalingParams params_;
    std::function<double(double)> s_, sprime_;
    double sup_sprime_;
    ModeMap map_;
    double n_corr_;
    std::vector<bool> mask_;
};

struct CollapseEntry {
    ScalingParams params;
    double mean_distance = 0.0;
    double se = 0.0;
    int replicas = 0;
    int failures = 0;
};

struct CollapseResult {
    std::vector<CollapseEntry> entries;
};

// Prop.-style collapse experiment: mean L2([0,T];L2) distance between SPDE
// replicas and the deterministic skeleton solution, per schedule entry.
// Blown-up replicas are recorded and excluded; the run fails if more than 1%
// of replicas blow up.
inline CollapseResult collapse_experiment(const TorusGrid& grid, const ScalarField& rho0,
                                          const ControlPath* g,
                                          const std::vector<ScalingParams>& schedule, double T,
                                          double dt, int replicas, std::uint64_t master_seed,
                                          int stride = 1, unsigned threads = 0) {
    if (schedule.empty()) throw ConfigError("collapse_experiment: empty schedule");
    if (replicas < 1) throw ConfigError("collapse_experiment: need at least one replica");

    CollapseResult result;
    for (std::size_t e = 0; e < schedule.size(); ++e) {
        const ScalingParams& p = schedule[e];
        p.validate(grid);

        DensityPath ref;
        {
            SpectralTransform ws(grid);
            SkeletonOptions sopts;
            sopts.stride = stride;
            ControlFn fn = g ? control_from_path(*g) : ControlFn{};
            ref = solve_skeleton(ws, rho0, fn, T, dt, sopts);
        }

        std::vector<double> dist(replicas, 0.0);
        std::vector<char> failed(replicas, 0);
        parallel_for(static_cast<std::size_t>(replicas), [&](std::size_t r) {
            SpectralTransform ws(grid);
            std::unique_ptr<MollifiedSqrt> moll;
            if (p.eta > 0.0) moll = std::make_unique<MollifiedSqrt>(p.eta);
            else if (p.epsilon > 0.0)
                throw ConfigError("collapse_experiment: eta = 0 requires eps = 0 (exact sqrt has unbounded derivative)");
            SpdeSystem sys = p.eta > 0.0
                                 ? SpdeSystem(ws, p, *moll)
                                 : SpdeSystem(ws, p, [](double x) { return sqrt_nonlinearity(x); },
                                              [](double) { return 0.0; }, 0.0);
            SpdeOptions opts;
            opts.stride = stride;
            const std::uint64_t seed =
                mix_seed(master_seed, static_cast<std::uint64_t>(e) * 1000003ull + r);
            try {
                SpdeRunRecord rec = sys.run(rho0, g, T, dt, seed, opts);
                dist[r] = l2l2_distance(rec.path, ref);
            } catch (const NumericalError&) {
                failed[r] = 1;
            }
        }, threads);

        CollapseEntry entry;
        entry.params = p;
        entry.replicas = replicas;
        std::vector<double> ok;
        for (int r = 0; r < replicas; ++r) {
            if (failed[r]) ++entry.failures;
            else ok.push_back(dist[r]);
        }
        if (entry.failures * 100 > replicas)
            throw NumericalError("collapse_experiment: more than 1% of replicas blew up");
        entry.mean_distance = sample_mean(ok);
        entry.se = ok.size() >= 2 ? mean_se(ok) : 0.0;
        result.entries.push_back(entry);
    }
    return result;
}

}  // namespace flsim
