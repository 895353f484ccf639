#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "flsim/errors.hpp"
#include "flsim/fft.hpp"
#include "flsim/grid.hpp"
#include "flsim/mollifier.hpp"

namespace flsim {

// Discrete density trajectory: frames at uniform spacing frame_dt.
struct DensityPath {
    TorusGrid grid;
    double frame_dt = 0.0;
    std::vector<ScalarField> frames;

    double horizon() const { return frame_dt * (frames.size() - 1); }

    std::size_t frame_index(double t) const {
        auto i = static_cast<long>(std::llround(t / frame_dt));
        if (i < 0 || i >= static_cast<long>(frames.size()))
            throw std::invalid_argument("DensityPath: time outside the stored horizon");
        return static_cast<std::size_t>(i);
    }

    const ScalarField& at_time(double t) const { return frames[frame_index(t)]; }
};

struct ControlPath {
    double frame_dt = 0.0;
    std::vector<VectorField> frames;
};

// Control supplied per step as a function of the current density and time;
// returns false if no control acts at this step.
using ControlFn = std::function<bool(const ScalarField& rho, double t, VectorField& g)>;

inline ControlFn control_from_path(const ControlPath& path) {
    return [&path](const ScalarField&, double t, VectorField& g) {
        auto i = static_cast<std::size_t>(std::llround(t / path.frame_dt));
        if (i >= path.frames.size()) i = path.frames.size() - 1;
        g = path.frames[i];
        return true;
    };
}

struct SkeletonOptions {
    int stride = 1;            // store every stride-th frame
    double mass_tol = 1e-10;   // abort threshold on per-step mass drift
    double blowup_tol = 1e6;
};

// Exponential-integrator multipliers for one step of dt:
//   c' = decay*c + phi*N_hat,   decay = exp(-lambda dt),  phi = (1-decay)/lambda.
// Exact for the heat part, first order in the flux.
struct EtdTables {
    std::vector<double> decay, phi;

    EtdTables(const SpectralTransform& ws, double dt) {
        const auto& lam = ws.laplacian_symbol();
        decay.resize(lam.size());
        phi.resize(lam.size());
        for (std::size_t i = 0; i < lam.size(); ++i) {
            decay[i] = std::exp(-lam[i] * dt);
            phi[i] = lam[i] > 0.0 ? (1.0 - decay[i]) / lam[i] : dt;
        }
    }
};

namespace detail {

inline void check_stable(const ScalarField& f, double blowup_tol, const char* where) {
    for (double v : f.values) {
        if (!std::isfinite(v) || std::abs(v) > blowup_tol)
            throw NumericalError(std::string(where) + ": field value " + std::to_string(v) +
                                 " exceeds stability bounds");
    }
}

}  // namespace detail

// Deterministic solver for d_t rho = Lap(rho) - div(s(rho) g) with the
// truncated square root (zero flux outside [0,1]).  Semi-implicit splitting:
// exponential heat step in coefficient space, explicit conservative flux.
// Mass is conserved exactly per step (the zero mode is untouched by the
// divergence-form flux and pinned to its initial value).
inline DensityPath solve_skeleton(SpectralTransform& ws, const ScalarField& rho0,
                                  const ControlFn& control, double T, double dt,
                                  const SkeletonOptions& opts = {}) {
    const TorusGrid& grid = ws.grid();
    if (rho0.grid != grid) throw std::invalid_argument("solve_skeleton: grid mismatch");
    if (dt <= 0.0 || T < 0.0) throw std::invalid_argument("solve_skeleton: invalid time mesh");

    const auto n_steps = static_cast<long>(std::llround(T / dt));
    EtdTables etd(ws, dt);

    DensityPath path;
    path.grid = grid;
    path.frame_dt = dt * opts.stride;
    path.frames.reserve(static_cast<std::size_t>(n_steps / opts.stride) + 2);
    path.frames.push_back(rho0);

    ScalarField rho = rho0;
    std::vector<std::complex<double>> crho, cdrift;
    ws.forward(rho.values, crho);
    const std::complex<double> mass0 = crho[0];

    VectorField g, flux(grid);
    ScalarField drift;
    for (long step = 0; step < n_steps; ++step) {
        const double t = step * dt;
        ws.forward(rho.values, crho);
        if (std::abs(crho[0] - mass0) > opts.mass_tol)
            throw NumericalError("solve_skeleton: mass drift " +
                                 std::to_string(std::abs(crho[0] - mass0)) + " at t=" + std::to_string(t));
        const bool has_control = control && control(rho, t, g);
        if (has_control) {
            if (g.dim() != grid.d || g.comp[0].size() != rho.size())
                throw std::invalid_argument("solve_skeleton: control grid mismatch");
            for (int a = 0; a < grid.d; ++a)
                for (std::size_t i = 0; i < rho.size(); ++i)
                    flux.comp[a].values[i] = sqrt_nonlinearity(rho[i]) * g.comp[a][i];
            ws.divergence(flux, drift);
            std::vector<std::complex<double>> cd;
            ws.forward(drift.values, cd);
            for (std::size_t i = 0; i < crho.size(); ++i)
                crho[i] = etd.decay[i] * crho[i] - etd.phi[i] * cd[i];
        } else {
            for (std::size_t i = 0; i < crho.size(); ++i) crho[i] *= etd.decay[i];
        }
        crho[0] = mass0;
        ws.inverse(crho, rho.values);
        detail::check_stable(rho, opts.blowup_tol, "solve_skeleton");
        if ((step + 1) % opts.stride == 0 || step + 1 == n_steps) path.frames.push_back(rho);
    }
    return path;
}

inline DensityPath solve_skeleton(SpectralTransform& ws, const ScalarField& rho0,
                                  const ControlPath& g, double T, double dt,
                                  const SkeletonOptions& opts = {}) {
    return solve_skeleton(ws, rho0, control_from_path(g), T, dt, opts);
}

inline DensityPath solve_heat(SpectralTransform& ws, const ScalarField& rho0, double T, double dt,
                              const SkeletonOptions& opts = {}) {
    return solve_skeleton(ws, rho0, ControlFn{}, T, dt, opts);
}

// Grid L1 norm of the difference of two paths at time t.
inline double l1_distance(const DensityPath& a, const DensityPath& b, double t) {
    if (a.grid != b.grid || a.frame_dt != b.frame_dt)
        throw std::invalid_argument("l1_distance: mesh mismatch");
    const ScalarField& fa = a.at_time(t);
    const ScalarField& fb = b.at_time(t);
    double s = 0.0;
    for (std::size_t i = 0; i < fa.size(); ++i) s += std::abs(fa[i] - fb[i]);
    return s * a.grid.cell_volume();
}

// L2([0,T]; L2) distance between two paths on the same mesh.
inline double l2l2_distance(const DensityPath& a, const DensityPath& b) {
    if (a.grid != b.grid || a.frames.size() != b.frames.size())
        throw std::invalid_argument("l2l2_distance: mesh mismatch");
    double s = 0.0;
    for (std::size_t f = 0; f < a.frames.size(); ++f) {
        double fr = 0.0;
        for (std::size_t i = 0; i < a.frames[f].size(); ++i) {
            const double dv = a.frames[f][i] - b.frames[f][i];
            fr += dv * dv;
        }
        s += fr * a.grid.cell_volume() * a.frame_dt;
    }
    return std::sqrt(s);
}

}  // namespace flsim
