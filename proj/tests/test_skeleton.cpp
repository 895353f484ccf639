#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "flsim/fft.hpp"
#include "flsim/skeleton.hpp"
#include "flsim/spectral.hpp"

using namespace flsim;

namespace {

ScalarField random_band_limited(SpectralTransform& ws, int cutoff, double amp,
                                std::mt19937_64& rng) {
    SpectralCoeffs c(ws.grid().d, cutoff);
    std::normal_distribution<double> gauss(0.0, amp);
    for (std::size_t m = 0; m < c.modes.size(); ++m) {
        c.cos_c[m] = gauss(rng);
        if (!c.modes[m].is_zero()) c.sin_c[m] = gauss(rng);
    }
    return inverse_transform(ws, c);
}

ScalarField random_density(SpectralTransform& ws, std::mt19937_64& rng) {
    ScalarField f = random_band_limited(ws, 3, 0.06, rng);
    for (double& v : f.values) v = std::clamp(0.5 + v, 0.05, 0.95);
    return f;
}

}  // namespace

TEST_CASE("heat-mode decay", "[skeleton]") {
    TorusGrid grid(1, 128);
    SpectralTransform ws(grid);
    const double amp = 0.3, T = 0.1, dt = 1e-4;
    ScalarField rho0(grid);
    for (std::size_t i = 0; i < rho0.size(); ++i)
        rho0[i] = 0.5 + amp * std::numbers::sqrt2 * std::sin(2.0 * std::numbers::pi * grid.point(i)[0]);
    SkeletonOptions opts;
    opts.stride = 100;
    DensityPath path = solve_heat(ws, rho0, T, dt, opts);

    const double lam = 4.0 * std::numbers::pi * std::numbers::pi;
    const ScalarField& last = path.frames.back();
    double err2 = 0.0, ref2 = 0.0;
    for (std::size_t i = 0; i < last.size(); ++i) {
        const double expect = 0.5 + amp * std::exp(-lam * T) * std::numbers::sqrt2 *
                                        std::sin(2.0 * std::numbers::pi * grid.point(i)[0]);
        err2 += (last[i] - expect) * (last[i] - expect);
        ref2 += expect * expect;
    }
    CHECK(std::sqrt(err2 / ref2) < 1e-6);
    CHECK(std::abs(mean(last) - mean(rho0)) < 1e-12);
}

TEST_CASE("constant density with constant control stays constant", "[skeleton]") {
    TorusGrid grid(1, 32);
    SpectralTransform ws(grid);
    ScalarField rho0(grid, 0.3);
    VectorField g(grid);
    for (double& v : g.comp[0].values) v = 0.7;
    ControlFn fn = [&](const ScalarField&, double, VectorField& out) {
        out = g;
        return true;
    };
    DensityPath path = solve_skeleton(ws, rho0, fn, 0.05, 1e-3);
    for (const auto& fr : path.frames)
        for (double v : fr.values) CHECK_THAT(v, Catch::Matchers::WithinAbs(0.3, 1e-12));
}

TEST_CASE("0/1-valued data sees pure heat flow", "[skeleton]") {
    TorusGrid grid(1, 64);
    SpectralTransform ws(grid);
    ScalarField rho0(grid);
    for (std::size_t i = 0; i < rho0.size(); ++i) rho0[i] = grid.point(i)[0] < 0.5 ? 1.0 : 0.0;
    std::mt19937_64 rng(4);
    VectorField g(grid);
    g.comp[0] = random_band_limited(ws, 4, 0.5, rng);
    ControlFn fn = [&](const ScalarField&, double, VectorField& out) {
        out = g;
        return true;
    };
    // the truncated sqrt vanishes on {0,1}, so only the first step can differ
    // (after one heat step the values enter (0,1)); compare one step only
    DensityPath a = solve_skeleton(ws, rho0, fn, 1e-3, 1e-3);
    DensityPath b = solve_heat(ws, rho0, 1e-3, 1e-3);
    CHECK(linf_distance(a.frames.back(), b.frames.back()) < 1e-12);
}

TEST_CASE("path distance helpers", "[skeleton]") {
    TorusGrid grid(1, 32);
    SpectralTransform ws(grid);
    std::mt19937_64 rng(12);
    ScalarField rho0 = random_density(ws, rng);
    DensityPath p = solve_heat(ws, rho0, 0.02, 1e-3);
    CHECK(l1_distance(p, p, 0.01) == 0.0);
    CHECK(l2l2_distance(p, p) == 0.0);
}

TEST_CASE("L1 contraction", "[skeleton]") {
    TorusGrid grid(1, 64);
    SpectralTransform ws(grid);
    std::mt19937_64 rng(2718);
    for (int pair = 0; pair < 10; ++pair) {
        ScalarField a0 = random_density(ws, rng);
        ScalarField b0 = random_density(ws, rng);
        VectorField g(grid);
        g.comp[0] = random_band_limited(ws, 3, 0.4, rng);
        ControlFn fn = [&](const ScalarField&, double, VectorField& out) {
            out = g;
            return true;
        };
        const double T = 0.05, dt = 5e-4;
        DensityPath pa = solve_skeleton(ws, a0, fn, T, dt);
        DensityPath pb = solve_skeleton(ws, b0, fn, T, dt);
        ScalarField diff0(grid);
        for (std::size_t i = 0; i < diff0.size(); ++i) diff0[i] = a0[i] - b0[i];
        const double init = l1_norm(diff0);
        for (std::size_t f = 0; f < pa.frames.size(); ++f) {
            double d = 0.0;
            for (std::size_t i = 0; i < grid.total_points(); ++i)
                d += std::abs(pa.frames[f][i] - pb.frames[f][i]);
            d *= grid.cell_volume();
            CHECK(d <= init + 1e-8);
        }
    }
}

TEST_CASE("range preservation and energy bound", "[skeleton]") {
    TorusGrid grid(1, 64);
    SpectralTransform ws(grid);
    std::mt19937_64 rng(99);
    const double T = 0.1, dt = 5e-4;
    for (int run = 0; run < 5; ++run) {
        ScalarField rho0 = random_density(ws, rng);
        VectorField g(grid);
        g.comp[0] = random_band_limited(ws, 3, 0.5, rng);
        ControlFn fn = [&](const ScalarField&, double, VectorField& out) {
            out = g;
            return true;
        };
        DensityPath p = solve_skeleton(ws, rho0, fn, T, dt);

        double sup_l2_sq = 0.0, grad_l2l2_sq = 0.0;
        for (const auto& fr : p.frames) {
            for (double v : fr.values) {
                CHECK(v >= -10.0 * dt);
                CHECK(v <= 1.0 + 10.0 * dt);
            }
            sup_l2_sq = std::max(sup_l2_sq, l2_norm_sq(fr));
            VectorField grad;
            ws.gradient(fr, grad);
            grad_l2l2_sq += l2_norm_sq(grad.comp[0]) * p.frame_dt;
        }
        // calibrated once, then frozen as a regression bound
        const double c_energy = 2.0;
        const double budget = l2_norm_sq(rho0) + l2_norm_sq(g.comp[0]) * T;
        CHECK(sup_l2_sq + grad_l2l2_sq <= c_energy * budget);
    }
}

TEST_CASE("weakly null control perturbations wash out", "[skeleton]") {
    TorusGrid grid(1, 64);
    SpectralTransform ws(grid);
    std::mt19937_64 rng(31);
    ScalarField rho0 = random_density(ws, rng);
    VectorField g(grid), h(grid);
    g.comp[0] = random_band_limited(ws, 3, 0.3, rng);
    h.comp[0] = random_band_limited(ws, 3, 0.5, rng);
    // the oscillation frequency has to clear the spectral gap of the forced
    // modes before the response decays like 1/m, so start well above it
    const double T = 0.1, dt = 2e-5;

    ControlFn base = [&](const ScalarField&, double, VectorField& out) {
        out = g;
        return true;
    };
    DensityPath ref = solve_skeleton(ws, rho0, base, T, dt);

    double first = 0.0, prev = 1e18;
    for (int m : {4, 16, 64, 256}) {
        ControlFn fn = [&, m](const ScalarField&, double t, VectorField& out) {
            out = g;
            const double env = std::sin(2.0 * std::numbers::pi * m * t);
            for (std::size_t i = 0; i < out.comp[0].size(); ++i)
                out.comp[0].values[i] += env * h.comp[0][i];
            return true;
        };
        DensityPath pm = solve_skeleton(ws, rho0, fn, T, dt);
        const double d = l2l2_distance(pm, ref);
        if (first == 0.0) first = d;
        CHECK(d < prev);
        prev = d;
    }
    CHECK(prev < first / 10.0);
}

TEST_CASE("invalid meshes are rejected", "[skeleton]") {
    TorusGrid grid(1, 32);
    SpectralTransform ws(grid);
    ScalarField rho0(grid, 0.5);
    CHECK_THROWS_AS(solve_heat(ws, rho0, 0.1, -1e-3), std::invalid_argument);
}
