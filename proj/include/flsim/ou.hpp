#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "flsim/errors.hpp"
#include "flsim/fft.hpp"
#include "flsim/grid.hpp"
#include "flsim/mollifier.hpp"
#include "flsim/noise.hpp"
#include "flsim/rng.hpp"
#include "flsim/skeleton.hpp"
#include "flsim/spectral.hpp"

namespace flsim {

// Fluctuation modes (sin/cos pair per half-lattice k, |k| <= m_sim) at one
// time.  The k=0 cos entry is identically zero (the field has zero mean).
struct ModeVector {
    double t = 0.0;
    SpectralCoeffs coeffs;
};

// lambda_k = 4 pi^2 |k|^2
inline double analytic_mode_variance(double rho_star, const WaveIndex& k, double t) {
    if (rho_star < 0.0 || rho_star > 1.0)
        throw ConfigError("analytic_mode_variance: rho* outside [0,1]");
    const double s2 = rho_star * (1.0 - rho_star);
    const double lam = laplacian_eigenvalue(k);
    return s2 * (1.0 - std::exp(-2.0 * lam * t)) / 2.0;
}

// H^{-(d+delta)/2} norm from the mode coefficients: weight 1/|k|^{d+delta}.
inline double neg_sobolev_norm(const ModeVector& m, double delta) {
    if (delta <= 0.0) throw ConfigError("neg_sobolev_norm: delta must be positive");
    const int d = m.coeffs.d;
    double s = 0.0;
    for (std::size_t i = 0; i < m.coeffs.modes.size(); ++i) {
        const WaveIndex& k = m.coeffs.modes[i];
        if (k.is_zero()) continue;
        const double w = std::pow(static_cast<double>(k.norm_sq()), 0.5 * (d + delta));
        s += (m.coeffs.sin_c[i] * m.coeffs.sin_c[i] + m.coeffs.cos_c[i] * m.coeffs.cos_c[i]) / w;
    }
    return std::sqrt(s);
}

struct OuOptions {
    int stride = 1;
};

// Generalized OU fluctuation process  d v = Lap(v) dt - div(s(rho_bar) xi),
// integrated mode-by-mode with the exact exponential factor for the linear
// drift and the matching per-mode noise damping, so the constant-rho_bar mode
// variance is exact for any dt.  The weight s(rho_bar(t)) is piecewise frozen
// per step; v(0) = 0.
inline std::vector<ModeVector> simulate_ou(SpectralTransform& ws, const DensityPath& rho_bar,
                                           int m_sim, int K_noise, double T, double dt, Rng& rng,
                                           const OuOptions& opts = {}) {
    const TorusGrid& grid = ws.grid();
    if (m_sim < 1 || K_noise < m_sim)
        throw ConfigError("simulate_ou: need 1 <= m_sim <= K_noise");
    if (K_noise > grid.n / 2 - 1 || grid.n < 4 * K_noise + 4)
        throw ConfigError("simulate_ou: grid does not resolve the noise cutoff");
    if (rho_bar.grid != grid) throw ConfigError("simulate_ou: rho_bar grid mismatch");

    const auto n_steps = static_cast<long>(std::llround(T / dt));
    ModeMap noise_map(grid, K_noise);
    ModeMap mode_map(grid, m_sim);

    ModeVector v;
    v.coeffs = SpectralCoeffs(grid.d, m_sim);
    std::vector<double> decay(v.coeffs.modes.size()), amp(v.coeffs.modes.size());
    for (std::size_t i = 0; i < v.coeffs.modes.size(); ++i) {
        const double lam = laplacian_eigenvalue(v.coeffs.modes[i]);
        decay[i] = std::exp(-lam * dt);
        amp[i] = lam > 0.0 ? std::sqrt((1.0 - decay[i] * decay[i]) / (2.0 * lam * dt)) : 0.0;
    }

    std::vector<ModeVector> out;
    out.reserve(static_cast<std::size_t>(n_steps / opts.stride) + 2);
    out.push_back(v);

    ScalarField drift(grid);
    for (long step = 0; step < n_steps; ++step) {
        const double t = step * dt;
        const std::size_t fi = std::min<std::size_t>(
            rho_bar.frame_dt > 0.0 ? static_cast<std::size_t>(t / rho_bar.frame_dt) : 0,
            rho_bar.frames.size() - 1);
        const ScalarField& rb = rho_bar.frames[fi];

        NoiseIncrement inc = sample_increment(rng, grid.d, K_noise, dt);
        VectorField W = noise_field(ws, inc, noise_map);
        for (int a = 0; a < grid.d; ++a)
            for (std::size_t i = 0; i < rb.size(); ++i)
                W.comp[a].values[i] *= sqrt_nonlinearity(rb[i]);
        ws.divergence(W, drift);
        SpectralCoeffs inc_modes = transform(ws, drift, mode_map, m_sim);

        for (std::size_t i = 0; i < v.coeffs.modes.size(); ++i) {
            if (v.coeffs.modes[i].is_zero()) continue;  // zero-mean field
            v.coeffs.sin_c[i] = decay[i] * v.coeffs.sin_c[i] - amp[i] * inc_modes.sin_c[i];
            v.coeffs.cos_c[i] = decay[i] * v.coeffs.cos_c[i] - amp[i] * inc_modes.cos_c[i];
        }
        v.t = (step + 1) * dt;
        if ((step + 1) % opts.stride == 0 || step + 1 == n_steps) out.push_back(v);
    }
    return out;
}

}  // namespace flsim
