#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "flsim/fft.hpp"
#include "flsim/spde.hpp"

using namespace flsim;

namespace {

ScalarField sine_density(const TorusGrid& grid, double amp) {
    ScalarField f(grid);
    for (std::size_t i = 0; i < f.size(); ++i)
        f[i] = 0.5 + amp * std::numbers::sqrt2 * std::sin(2.0 * std::numbers::pi * grid.point(i)[0]);
    return f;
}

}  // namespace

TEST_CASE("eps = 0 reduces to the deterministic solver", "[spde]") {
    TorusGrid grid(1, 64);
    SpectralTransform ws(grid);
    ScalarField rho0 = sine_density(grid, 0.2);
    ScalingParams p;
    p.epsilon = 0.0;
    p.eta = 0.05;
    p.K = 4;
    p.M = grid.n / 2 - 1;
    MollifiedSqrt moll(p.eta);
    SpdeSystem sys(ws, p, moll);
    SpdeRunRecord rec = sys.run(rho0, nullptr, 0.05, 1e-3, 42);
    DensityPath heat = solve_heat(ws, rho0, 0.05, 1e-3);
    REQUIRE(rec.path.frames.size() == heat.frames.size());
    for (std::size_t f = 0; f < heat.frames.size(); ++f)
        CHECK(linf_distance(rec.path.frames[f], heat.frames[f]) < 1e-10);
}

TEST_CASE("mass conservation over many steps", "[spde]") {
    TorusGrid grid(1, 32);
    SpectralTransform ws(grid);
    ScalarField rho0 = sine_density(grid, 0.1);
    ScalingParams p;
    p.epsilon = 0.005;
    p.eta = 0.1;
    p.K = 3;
    p.M = grid.n / 2 - 1;
    MollifiedSqrt moll(p.eta);
    SpdeSystem sys(ws, p, moll);
    SpdeOptions opts;
    opts.stride = 1000;
    SpdeRunRecord rec = sys.run(rho0, nullptr, 1.0, 1e-4, 7, opts);
    const double m0 = rec.diag.front().mass;
    for (const auto& dgn : rec.diag) CHECK(std::abs(dgn.mass - m0) < 1e-12);
}

TEST_CASE("bitwise determinism for a fixed seed", "[spde]") {
    TorusGrid grid(1, 32);
    ScalarField rho0 = sine_density(grid, 0.15);
    ScalingParams p;
    p.epsilon = 0.01;
    p.eta = 0.1;
    p.K = 3;
    p.M = grid.n / 2 - 1;
    auto run_once = [&]() {
        SpectralTransform ws(grid);
        MollifiedSqrt moll(p.eta);
        SpdeSystem sys(ws, p, moll);
        return sys.run(rho0, nullptr, 0.02, 1e-4, 123);
    };
    SpdeRunRecord a = run_once(), b = run_once();
    REQUIRE(a.path.frames.size() == b.path.frames.size());
    for (std::size_t f = 0; f < a.path.frames.size(); ++f)
        CHECK(a.path.frames[f].values == b.path.frames[f].values);
}

TEST_CASE("constant coefficient kills the Ito correction", "[spde]") {
    TorusGrid grid(1, 32);
    SpectralTransform ws(grid);
    ScalingParams p;
    p.epsilon = 0.01;
    p.eta = 0.1;
    p.K = 3;
    p.M = grid.n / 2 - 1;
    SpdeSystem sys(ws, p, [](double) { return 0.25; }, [](double) { return 0.0; }, 0.0);
    ScalarField rho = sine_density(grid, 0.2);
    CHECK(sys.correction_l2(rho) < 1e-14);
}

TEST_CASE("linearized mode variance", "[spde]") {
    TorusGrid grid(1, 32);
    ScalarField rho0(grid, 0.5);
    ScalingParams p;
    p.epsilon = 1e-4;
    p.eta = 0.1;
    p.K = 3;
    p.M = grid.n / 2 - 1;
    const double T = 0.1, dt = 1e-3;
    const int replicas = 200;
    const WaveIndex k1({1});

    std::vector<double> coef(replicas);
    for (int r = 0; r < replicas; ++r) {
        SpectralTransform ws(grid);
        MollifiedSqrt moll(p.eta);
        SpdeSystem sys(ws, p, moll);
        SpdeOptions opts;
        opts.stride = 1 << 20;
        SpdeRunRecord rec = sys.run(rho0, nullptr, T, dt, mix_seed(555, r), opts);
        SpectralCoeffs c = transform(ws, rec.path.frames.back(), 2);
        coef[r] = c.sin_c[c.find(k1)];
    }
    double m = 0.0;
    for (double v : coef) m += v;
    m /= replicas;
    double var = 0.0;
    for (double v : coef) var += (v - m) * (v - m);
    var /= replicas - 1;
    const double lam = laplacian_eigenvalue(k1);
    const double target = p.epsilon * (1.0 - std::exp(-2.0 * lam * T)) / 8.0;
    const double se = var * std::sqrt(2.0 / (replicas - 1));
    CHECK(std::abs(var - target) < 3.0 * se);
}

TEST_CASE("stability rule rejects oversized steps", "[spde]") {
    TorusGrid grid(1, 64);
    SpectralTransform ws(grid);
    ScalingParams p;
    p.epsilon = 0.5;
    p.eta = 0.01;  // steep mollified derivative
    p.K = 8;
    p.M = grid.n / 2 - 1;
    MollifiedSqrt moll(p.eta);
    SpdeSystem sys(ws, p, moll);
    ScalarField rho0(grid, 0.5);
    CHECK_THROWS_AS(sys.run(rho0, nullptr, 0.1, 0.1, 1), ConfigError);
}

TEST_CASE("collapse toward the deterministic limit", "[spde]") {
    TorusGrid grid(1, 32);
    ScalarField rho0 = sine_density(grid, 0.2);
    std::vector<ScalingParams> schedule;
    for (double eps : {1e-2, 1e-3, 1e-4}) {
        ScalingParams p;
        p.epsilon = eps;
        p.eta = 0.1;
        p.K = 3;
        p.M = grid.n / 2 - 1;
        schedule.push_back(p);
    }
    CollapseResult res =
        collapse_experiment(grid, rho0, nullptr, schedule, 0.05, 1e-4, 20, 2026);
    REQUIRE(res.entries.size() == 3);
    CHECK(res.entries[1].mean_distance < res.entries[0].mean_distance);
    CHECK(res.entries[2].mean_distance < res.entries[1].mean_distance);
}
