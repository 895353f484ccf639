#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "flsim/errors.hpp"
#include "flsim/fft.hpp"
#include "flsim/grid.hpp"
#include "flsim/mollifier.hpp"
#include "flsim/skeleton.hpp"
#include "flsim/wave.hpp"

namespace flsim {

struct RateOptions {
    double kappa = 1e-10;        // ellipticity floor added to s(rho)^2
    double cg_tol = 1e-10;       // relative residual target
    int cg_max_iters = 10000;
    double kappa_budget = 1e-6;  // max admissible kappa contribution to the value
    double mass_tol = 1e-8;      // max |mean| of the per-step source
};

struct RateResult {
    double value = 0.0;               // 1/2 ||g||^2_{L2 L2} of the recovered control
    bool infinite = false;            // unreachable path (residual or kappa budget blown)
    double kappa_contribution = 0.0;  // part of the value due to the ellipticity floor
    double max_residual = 0.0;        // worst relative elliptic residual
    ControlPath control;              // minimizer, gradient form g = s(rho) grad(phi)
};

namespace detail {

// Preconditioned CG for  div(w grad(phi)) = r  on zero-mean fields, with the
// unweighted spectral inverse Laplacian as preconditioner.  Returns the final
// relative residual.
inline double solve_weighted_poisson(SpectralTransform& ws, const ScalarField& w,
                                     const ScalarField& r, ScalarField& phi, double tol,
                                     int max_iters) {
    const TorusGrid& grid = ws.grid();
    const std::size_t n = r.size();
    auto apply = [&](const ScalarField& p, ScalarField& out) {
        // out = -div(w grad p)  (positive semi-definite on zero-mean fields)
        static thread_local VectorField grad;
        ws.gradient(p, grad);
        for (int a = 0; a < grid.d; ++a)
            for (std::size_t i = 0; i < n; ++i) grad.comp[a].values[i] *= w[i];
        ws.divergence(grad, out);
        for (double& v : out.values) v = -v;
    };

    // The spectral divergence annihilates the mean and pure-Nyquist modes, so
    // the rhs must be deflated onto range(A); otherwise CG runs on an
    // inconsistent singular system and diverges.  Re-project the residual each
    // iteration to keep round-off from reseeding the null modes.
    std::vector<std::complex<double>> buf;
    auto project_range = [&](ScalarField& f) {
        ws.forward(f.values, buf);
        for (std::size_t i = 0; i < ws.complex_size(); ++i) {
            bool null_mode = true;
            for (int a = 0; a < grid.d && null_mode; ++a)
                if (ws.derivative_symbol(a)[i] != 0.0) null_mode = false;
            if (null_mode) buf[i] = 0.0;
        }
        ws.inverse(buf, f.values);
    };

    ScalarField rhs = r;  // solve  (-A) phi = -r
    for (double& v : rhs.values) v = -v;
    project_range(rhs);

    phi = ScalarField(grid);
    ScalarField resid = rhs, z(grid), p(grid), Ap(grid);
    const double rhs_norm = std::sqrt(l2_norm_sq(rhs));
    if (rhs_norm == 0.0) return 0.0;

    ws.inverse_laplacian(resid, z);
    for (double& v : z.values) v = -v;  // M^{-1} = (-Lap)^{-1}
    p = z;
    double rz = l2_inner(resid, z);
    double rel = 1.0;
    for (int it = 0; it < max_iters; ++it) {
        apply(p, Ap);
        const double pAp = l2_inner(p, Ap);
        if (pAp <= 0.0) break;  // numerically null direction
        const double alpha = rz / pAp;
        for (std::size_t i = 0; i < n; ++i) {
            phi[i] += alpha * p[i];
            resid[i] -= alpha * Ap[i];
        }
        project_range(resid);
        rel = std::sqrt(l2_norm_sq(resid)) / rhs_norm;
        if (rel < tol) break;
        ws.inverse_laplacian(resid, z);
        for (double& v : z.values) v = -v;
        const double rz_new = l2_inner(resid, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    // report the zero-mean component of phi
    const double m = mean(phi);
    for (double& v : phi.values) v -= m;
    return rel;
}

}  // namespace detail

// Minimal-norm control reconstruction: per time step solve
//   div(s(rho)^2 grad phi) = Lap(rho) - d_t rho
// and set g = s(rho) grad phi.  Any admissible control decomposes as
// s grad(phi) plus a component annihilated by the constraint, so this g is
// the L2-minimal choice and 1/2 ||g||^2 is the rate of the path.
inline RateResult minimal_control(SpectralTransform& ws, const DensityPath& path,
                                  const RateOptions& opts = {}) {
    const TorusGrid& grid = ws.grid();
    const std::size_t F = path.frames.size();
    if (F < 2) throw std::invalid_argument("minimal_control: need at least two frames");
    const double dt = path.frame_dt;

    RateResult res;
    res.control.frame_dt = dt;
    res.control.frames.reserve(F);

    ScalarField dtrho(grid), lap(grid), source(grid), w(grid), phi(grid);
    VectorField grad;
    for (std::size_t f = 0; f < F; ++f) {
        const ScalarField& rho = path.frames[f];
        // centered time derivative, second-order one-sided at the endpoints
        if (f == 0) {
            if (F >= 3)
                for (std::size_t i = 0; i < rho.size(); ++i)
                    dtrho[i] = (-3.0 * path.frames[0][i] + 4.0 * path.frames[1][i] -
                                path.frames[2][i]) /
                               (2.0 * dt);
            else
                for (std::size_t i = 0; i < rho.size(); ++i)
                    dtrho[i] = (path.frames[1][i] - path.frames[0][i]) / dt;
        } else if (f == F - 1) {
            if (F >= 3)
                for (std::size_t i = 0; i < rho.size(); ++i)
                    dtrho[i] = (3.0 * path.frames[F - 1][i] - 4.0 * path.frames[F - 2][i] +
                                path.frames[F - 3][i]) /
                               (2.0 * dt);
            else
                for (std::size_t i = 0; i < rho.size(); ++i)
                    dtrho[i] = (path.frames[F - 1][i] - path.frames[F - 2][i]) / dt;
        } else {
            for (std::size_t i = 0; i < rho.size(); ++i)
                dtrho[i] = (path.frames[f + 1][i] - path.frames[f - 1][i]) / (2.0 * dt);
        }
        ws.laplacian(rho, lap);
        for (std::size_t i = 0; i < rho.size(); ++i) source[i] = lap[i] - dtrho[i];
        if (std::abs(mean(source)) > opts.mass_tol)
            throw NumericalError("minimal_control: source has nonzero mean (mass not conserved along the path)");

        for (std::size_t i = 0; i < rho.size(); ++i) {
            const double s = sqrt_nonlinearity(rho[i]);
            w[i] = s * s + opts.kappa;
        }
        const double rel = detail::solve_weighted_poisson(ws, w, source, phi, opts.cg_tol,
                                                          opts.cg_max_iters);
        res.max_residual = std::max(res.max_residual, rel);
        if (rel > 100.0 * opts.cg_tol) res.infinite = true;

        ws.gradient(phi, grad);
        VectorField g(grid);
        double step_val = 0.0, step_kappa = 0.0;
        for (int a = 0; a < grid.d; ++a) {
            for (std::size_t i = 0; i < rho.size(); ++i) {
                const double s = sqrt_nonlinearity(rho[i]);
                const double gp = grad.comp[a][i];
                g.comp[a].values[i] = s * gp;
                step_val += s * s * gp * gp;
                step_kappa += opts.kappa * gp * gp;
            }
        }
        // trapezoidal weights in time
        const double tw = (f == 0 || f == F - 1) ? 0.5 : 1.0;
        res.value += 0.5 * tw * dt * step_val * grid.cell_volume();
        res.kappa_contribution += 0.5 * tw * dt * step_kappa * grid.cell_volume();
        res.control.frames.push_back(std::move(g));
    }
    if (res.kappa_contribution > opts.kappa_budget) res.infinite = true;
    return res;
}

// Endpoint rate upper bound: coordinate descent over a low-dimensional family
// of paths from rho0 to target.  Candidate baselines are the linear
// interpolation and the heat-bridge path; perturbations add separable
// space-time modes vanishing at both endpoints.
struct TargetRateOptions {
    int frames = 41;
    int descent_sweeps = 2;
    int time_modes = 2;
    int space_modes = 4;  // low sin/cos modes per axis
    RateOptions rate;
    double mass_tol = 1e-10;
};

inline RateResult rate_of_target(SpectralTransform& ws, const ScalarField& rho0,
                                 const ScalarField& target, double T,
                                 const TargetRateOptions& opts = {}) {
    const TorusGrid& grid = ws.grid();
    if (std::abs(mean(rho0) - mean(target)) > opts.mass_tol)
        throw ConfigError("rate_of_target: initial and target mass differ");

    const int F = opts.frames;
    const double fdt = T / (F - 1);

    auto evaluate = [&](const DensityPath& p) -> double {
        RateResult r = minimal_control(ws, p, opts.rate);
        return r.infinite ? std::numeric_limits<double>::infinity() : r.value;
    };

    // baseline 1: linear interpolation in time
    DensityPath linear;
    linear.grid = grid;
    linear.frame_dt = fdt;
    for (int f = 0; f < F; ++f) {
        const double w = static_cast<double>(f) / (F - 1);
        ScalarField fr(grid);
        for (std::size_t i = 0; i < fr.size(); ++i) fr[i] = (1.0 - w) * rho0[i] + w * target[i];
        linear.frames.push_back(std::move(fr));
    }

    // baseline 2: heat flow pulled to the target endpoint
    DensityPath heat = solve_heat(ws, rho0, T, fdt);
    DensityPath bridge = heat;
    for (int f = 0; f < F; ++f) {
        const double w = static_cast<double>(f) / (F - 1);
        for (std::size_t i = 0; i < bridge.frames[f].size(); ++i)
            bridge.frames[f][i] += w * (target[i] - heat.frames[F - 1][i]);
    }

    DensityPath best = linear;
    double best_val = evaluate(linear);
    {
        const double v = evaluate(bridge);
        if (v < best_val) {
            best_val = v;
            best = bridge;
        }
    }

    // perturbation directions: sin(pi m t / T) * (spatial mode)
    std::vector<ScalarField> spatial;
    {
        auto modes = enumerate_half_lattice(grid.d, opts.space_modes);
        for (const auto& k : modes) {
            if (k.is_zero()) continue;  // keep mass fixed
            for (int kind = 0; kind < 2; ++kind) {
                ScalarField f(grid);
                for (std::size_t i = 0; i < f.size(); ++i) {
                    const auto x = grid.point(i);
                    double phase = 0.0;
                    for (int a = 0; a < grid.d; ++a) phase += k.k[a] * x[a];
                    phase *= 2.0 * std::numbers::pi;
                    f[i] = std::numbers::sqrt2 * (kind == 0 ? std::sin(phase) : std::cos(phase));
                }
                spatial.push_back(std::move(f));
                if (static_cast<int>(spatial.size()) >= opts.space_modes) break;
            }
            if (static_cast<int>(spatial.size()) >= opts.space_modes) break;
        }
    }

    auto perturbed_value = [&](const DensityPath& base, int tm, const ScalarField& sf,
                               double c) -> double {
        DensityPath p = base;
        for (int f = 0; f < F; ++f) {
            const double t = static_cast<double>(f) / (F - 1);
            const double env = std::sin(std::numbers::pi * tm * t);
            if (env == 0.0) continue;
            for (std::size_t i = 0; i < p.frames[f].size(); ++i)
                p.frames[f][i] += c * env * sf[i];
        }
        return evaluate(p);
    };

    std::vector<std::pair<int, int>> coords;  // (time mode, spatial index)
    for (int tm = 1; tm <= opts.time_modes; ++tm)
        for (int si = 0; si < static_cast<int>(spatial.size()); ++si) coords.emplace_back(tm, si);
    std::vector<double> c(coords.size(), 0.0);

    // coordinate descent with three-point parabolic line search per coordinate
    DensityPath current = best;
    for (int sweep = 0; sweep < opts.descent_sweeps; ++sweep) {
        for (std::size_t ci = 0; ci < coords.size(); ++ci) {
            const auto [tm, si] = coords[ci];
            const double h = 0.02;
            const double f0 = best_val;
            const double fp = perturbed_value(current, tm, spatial[si], h);
            const double fm = perturbed_value(current, tm, spatial[si], -h);
            double step = 0.0;
            const double denom = fp - 2.0 * f0 + fm;
            if (std::isfinite(fp) && std::isfinite(fm) && denom > 0.0) {
                step = -0.5 * h * (fp - fm) / denom;
                step = std::clamp(step, -10.0 * h, 10.0 * h);
            } else if (fp < f0 || fm < f0) {
                step = fp < fm ? h : -h;
            }
            if (step != 0.0) {
                const double fv = perturbed_value(current, tm, spatial[si], step);
                if (fv < best_val) {
                    for (int f = 0; f < F; ++f) {
                        const double t = static_cast<double>(f) / (F - 1);
                        const double env = std::sin(std::numbers::pi * tm * t);
                        for (std::size_t i = 0; i < current.frames[f].size(); ++i)
                            current.frames[f][i] += step * env * spatial[si][i];
                    }
                    best_val = fv;
                    c[ci] += step;
                }
            }
        }
    }

    RateResult out = minimal_control(ws, current, opts.rate);
    return out;
}

}  // namespace flsim
