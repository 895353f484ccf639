#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "flsim/fft.hpp"
#include "flsim/spectral.hpp"
#include "flsim/ssep.hpp"

using namespace flsim;

TEST_CASE("Bernoulli initialization", "[ssep]") {
    TorusGrid grid(1, 8);
    Rng rng = make_rng(1);

    SECTION("full and empty profiles") {
        SsepConfiguration full = init_bernoulli(ScalarField(grid, 1.0), 64, rng);
        CHECK(full.particle_count == 64);
        SsepConfiguration empty = init_bernoulli(ScalarField(grid, 0.0), 64, rng);
        CHECK(empty.particle_count == 0);
    }
    SECTION("binomial count at density 1/2") {
        const int N = 512;
        SsepConfiguration c = init_bernoulli(ScalarField(grid, 0.5), N, rng);
        CHECK(std::abs(c.particle_count - N / 2.0) <= 3.0 * std::sqrt(N * 0.25));
    }
}

TEST_CASE("particle conservation and no-op dynamics", "[ssep]") {
    TorusGrid grid(1, 8);
    Rng rng = make_rng(2);

    SECTION("full lattice never changes") {
        SsepConfiguration c = init_bernoulli(ScalarField(grid, 1.0), 64, rng);
        auto before = c.occupations;
        advance(c, 0.05, rng);
        CHECK(c.occupations == before);
    }
    SECTION("swaps conserve the particle number") {
        SsepConfiguration c = init_bernoulli(ScalarField(grid, 0.3), 128, rng);
        const long count = c.particle_count;
        advance(c, 0.02, rng);
        long pop = 0;
        for (auto o : c.occupations) pop += o;
        CHECK(pop == count);
        CHECK(c.particle_count == count);
        CHECK(c.t_macro == 0.02);
    }
}

TEST_CASE("single-particle diffusion", "[ssep]") {
    const int N = 64;
    TorusGrid grid(1, 8);
    const double t = 0.005;  // keep displacements well below the ring size
    const int replicas = 10000;
    Rng rng = make_rng(77);
    double sum = 0.0, sumsq = 0.0;
    for (int r = 0; r < replicas; ++r) {
        SsepConfiguration c;
        c.d = 1;
        c.N = N;
        c.occupations.assign(N, 0);
        c.occupations[N / 2] = 1;
        c.particle_count = 1;
        advance(c, t, rng);
        int pos = 0;
        for (int i = 0; i < N; ++i)
            if (c.occupations[i]) pos = i;
        int disp = pos - N / 2;
        if (disp > N / 2) disp -= N;
        if (disp < -N / 2) disp += N;
        const double x = static_cast<double>(disp) / N;  // macroscopic units
        sum += x;
        sumsq += x * x;
    }
    const double var = (sumsq - sum * sum / replicas) / (replicas - 1);
    const double target = 2.0 * t;  // unit diffusivity from the rate convention
    const double se = var * std::sqrt(2.0 / (replicas - 1));
    CHECK(std::abs(var - target) < 3.0 * se);
}

TEST_CASE("coarse density field", "[ssep]") {
    TorusGrid grid(1, 8);
    Rng rng = make_rng(9);

    SECTION("empty configuration gives the zero field") {
        SsepConfiguration c = init_bernoulli(ScalarField(grid, 0.0), 64, rng);
        ScalarField f = empirical_density(c, grid);
        for (double v : f.values) CHECK(v == 0.0);
    }
    SECTION("mean matches the particle count") {
        SsepConfiguration c = init_bernoulli(ScalarField(grid, 0.4), 64, rng);
        ScalarField f = empirical_density(c, grid);
        CHECK_THAT(mean(f), Catch::Matchers::WithinAbs(
                                 static_cast<double>(c.particle_count) / 64.0, 1e-12));
    }
    SECTION("divisibility enforced") {
        SsepConfiguration c = init_bernoulli(ScalarField(grid, 0.5), 60, rng);
        CHECK_THROWS_AS(empirical_density(c, grid), ConfigError);
    }
}

TEST_CASE("discrete heat mean", "[ssep]") {
    const int N = 256;
    TorusGrid grid(1, 32);

    SECTION("constant profiles are invariant") {
        auto m = discrete_heat_mean(ScalarField(grid, 0.37), 1, N, 0.1);
        for (double v : m) CHECK_THAT(v, Catch::Matchers::WithinAbs(0.37, 1e-12));
    }
    SECTION("sine mode decays at the discrete rate") {
        ScalarField prof(grid);
        for (std::size_t i = 0; i < prof.size(); ++i)
            prof[i] = 0.5 + 0.2 * std::sin(2.0 * std::numbers::pi * grid.point(i)[0]);
        const double t = 0.01;
        auto m = discrete_heat_mean(prof, 1, N, t);
        const double lam =
            static_cast<double>(N) * N * 2.0 * (1.0 - std::cos(2.0 * std::numbers::pi / N));
        for (int x = 0; x < N; ++x) {
            const double expect =
                0.5 + 0.2 * std::exp(-lam * t) *
                          std::sin(2.0 * std::numbers::pi * (static_cast<double>(x) / N));
            // profile sampling is piecewise constant over boxes of 8 sites
            CHECK_THAT(m[x], Catch::Matchers::WithinAbs(expect, 0.02));
        }
    }
}

TEST_CASE("equilibrium structure function", "[ssep]") {
    const int N = 256;
    const int replicas = 300;
    TorusGrid grid(1, 32);
    ScalarField flat(grid, 0.5);
    std::vector<double> mean_sites(N, 0.5);
    SpectralTransform ws(grid);
    ModeMap map(grid, 3);

    std::vector<double> k1_vals(replicas);
    Rng rng = make_rng(31);
    for (int r = 0; r < replicas; ++r) {
        SsepConfiguration c = init_bernoulli(flat, N, rng);
        advance(c, 0.002, rng);
        ScalarField f = fluctuation_field(c, mean_sites, grid);
        SpectralCoeffs modes = transform(ws, f, map, 3);
        k1_vals[r] = modes.sin_c[modes.find(WaveIndex({1}))];
    }
    double m = 0.0;
    for (double v : k1_vals) m += v;
    m /= replicas;
    double var = 0.0;
    for (double v : k1_vals) var += (v - m) * (v - m);
    var /= replicas - 1;
    const double target = 0.25;  // rho (1 - rho)
    const double se = var * std::sqrt(2.0 / (replicas - 1));
    CHECK(std::abs(var - target) < 3.0 * se);
}
