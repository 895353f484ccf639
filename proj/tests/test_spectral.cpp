#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "flsim/fft.hpp"
#include "flsim/grid.hpp"
#include "flsim/spectral.hpp"
#include "flsim/wave.hpp"

using namespace flsim;

namespace {

ScalarField random_band_limited(SpectralTransform& ws, int cutoff, std::mt19937_64& rng) {
    SpectralCoeffs c(ws.grid().d, cutoff);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (std::size_t m = 0; m < c.modes.size(); ++m) {
        c.cos_c[m] = gauss(rng);
        if (!c.modes[m].is_zero()) c.sin_c[m] = gauss(rng);
    }
    return inverse_transform(ws, c);
}

}  // namespace

TEST_CASE("half-lattice enumeration", "[spectral]") {
    SECTION("d=1, K=2") {
        auto modes = enumerate_half_lattice(1, 2);
        REQUIRE(modes.size() == 3);
        CHECK(modes[0].k == std::vector<int>{0});
        CHECK(modes[1].k == std::vector<int>{1});
        CHECK(modes[2].k == std::vector<int>{2});
    }
    SECTION("d=2, K=1") {
        auto modes = enumerate_half_lattice(2, 1);
        REQUIRE(modes.size() == 3);
        CHECK(modes[0].k == std::vector<int>{0, 0});
        CHECK(modes[1].k == std::vector<int>{0, 1});
        CHECK(modes[2].k == std::vector<int>{1, 0});
    }
    SECTION("d=1, K=0") {
        auto modes = enumerate_half_lattice(1, 0);
        REQUIRE(modes.size() == 1);
        CHECK(modes[0].is_zero());
    }
    SECTION("membership rule") {
        CHECK(WaveIndex({1, -1}).in_half_lattice());
        CHECK_FALSE(WaveIndex({-1, 1}).in_half_lattice());
        CHECK(WaveIndex({0, 2}).in_half_lattice());
        CHECK_FALSE(WaveIndex({0, -2}).in_half_lattice());
    }
}

TEST_CASE("vector basis evaluation", "[spectral]") {
    WaveIndex zero({0});
    CHECK(vector_basis_eval(zero, 1, BasisKind::Cos, {0.37})[0] == 1.0);
    CHECK(vector_basis_eval(zero, 1, BasisKind::Sin, {0.91})[0] == 0.0);
    WaveIndex one({1});
    CHECK_THAT(vector_basis_eval(one, 1, BasisKind::Sin, {0.25})[0],
               Catch::Matchers::WithinAbs(std::numbers::sqrt2, 1e-14));
    CHECK_THROWS_AS(vector_basis_eval(WaveIndex({-1}), 1, BasisKind::Sin, {0.1}),
                    std::invalid_argument);
}

TEST_CASE("laplacian eigenvalue convention", "[spectral]") {
    CHECK(laplacian_eigenvalue(WaveIndex({0})) == 0.0);
    // oracle: -(sqrt(2) sin(2 pi x))'' = 4 pi^2 sqrt(2) sin(2 pi x)
    CHECK_THAT(laplacian_eigenvalue(WaveIndex({1})),
               Catch::Matchers::WithinRel(4.0 * std::numbers::pi * std::numbers::pi, 1e-14));
    CHECK_THAT(laplacian_eigenvalue(WaveIndex({1, 1})),
               Catch::Matchers::WithinRel(8.0 * std::numbers::pi * std::numbers::pi, 1e-14));
}

TEST_CASE("transform basics", "[spectral]") {
    TorusGrid grid(1, 64);
    SpectralTransform ws(grid);

    SECTION("constant field") {
        ScalarField f(grid, 0.75);
        auto c = transform(ws, f, 4);
        for (std::size_t m = 0; m < c.modes.size(); ++m) {
            if (c.modes[m].is_zero()) {
                CHECK_THAT(c.cos_c[m], Catch::Matchers::WithinAbs(0.75, 1e-14));
            } else {
                CHECK_THAT(c.cos_c[m], Catch::Matchers::WithinAbs(0.0, 1e-14));
                CHECK_THAT(c.sin_c[m], Catch::Matchers::WithinAbs(0.0, 1e-14));
            }
        }
    }

    SECTION("pure sine mode") {
        ScalarField f(grid);
        for (std::size_t i = 0; i < f.size(); ++i)
            f[i] = std::numbers::sqrt2 * std::sin(2.0 * std::numbers::pi * grid.point(i)[0]);
        auto c = transform(ws, f, 4);
        auto i1 = c.find(WaveIndex({1}));
        CHECK_THAT(c.sin_c[i1], Catch::Matchers::WithinAbs(1.0, 1e-13));
        CHECK_THAT(c.cos_c[i1], Catch::Matchers::WithinAbs(0.0, 1e-13));
    }

    SECTION("round trip on band-limited fields") {
        std::mt19937_64 rng(7);
        for (int d : {1, 2}) {
            TorusGrid g(d, 32);
            SpectralTransform w(g);
            ScalarField f = random_band_limited(w, 6, rng);
            auto c = transform(w, f, 6);
            ScalarField back = inverse_transform(w, c);
            CHECK(linf_distance(f, back) < 1e-12);
        }
    }

    SECTION("cutoff above Nyquist rejected") {
        CHECK_THROWS_AS(transform(ws, ScalarField(grid), 32), std::invalid_argument);
    }
}

TEST_CASE("orthonormality under grid quadrature", "[spectral]") {
    for (int d : {1, 2}) {
        const int K = d == 1 ? 8 : 4;
        TorusGrid grid(d, 4 * K + 4);
        auto modes = enumerate_half_lattice(d, K);
        for (std::size_t a = 0; a < modes.size(); ++a) {
            for (std::size_t b = a; b < modes.size(); ++b) {
                for (auto ka : {BasisKind::Sin, BasisKind::Cos}) {
                    for (auto kb : {BasisKind::Sin, BasisKind::Cos}) {
                        if (modes[a].is_zero() && ka == BasisKind::Sin) continue;
                        if (modes[b].is_zero() && kb == BasisKind::Sin) continue;
                        double q = 0.0;
                        for (std::size_t i = 0; i < grid.total_points(); ++i) {
                            auto x = grid.point(i);
                            q += scalar_basis_eval(modes[a], ka, x) *
                                 scalar_basis_eval(modes[b], kb, x);
                        }
                        q *= grid.cell_volume();
                        const double expect = (a == b && ka == kb) ? 1.0 : 0.0;
                        REQUIRE_THAT(q, Catch::Matchers::WithinAbs(expect, 1e-10));
                    }
                }
            }
        }
    }
}

TEST_CASE("Parseval and projection idempotence", "[spectral]") {
    std::mt19937_64 rng(21);
    TorusGrid grid(2, 32);
    SpectralTransform ws(grid);
    ScalarField f = random_band_limited(ws, 6, rng);

    auto c = transform(ws, f, 6);
    CHECK_THAT(l2_norm_sq(f), Catch::Matchers::WithinAbs(c.sum_sq(), 1e-10));

    ScalarField once = f;
    ws.project(once, 3);
    ScalarField twice = once;
    ws.project(twice, 3);
    auto c1 = transform(ws, once, 6);
    auto c2 = transform(ws, twice, 6);
    for (std::size_t m = 0; m < c1.modes.size(); ++m) {
        CHECK_THAT(c2.cos_c[m], Catch::Matchers::WithinAbs(c1.cos_c[m], 1e-13));
        CHECK_THAT(c2.sin_c[m], Catch::Matchers::WithinAbs(c1.sin_c[m], 1e-13));
    }
}

TEST_CASE("gradient and divergence", "[spectral]") {
    TorusGrid grid(1, 64);
    SpectralTransform ws(grid);

    SECTION("gradient of constant is zero") {
        ScalarField f(grid, 1.3);
        VectorField g;
        ws.gradient(f, g);
        for (double v : g.comp[0].values) CHECK(std::abs(v) < 1e-13);
    }

    SECTION("div grad of a sine equals the analytic second derivative") {
        ScalarField f(grid);
        const double fourpi2 = 4.0 * std::numbers::pi * std::numbers::pi;
        for (std::size_t i = 0; i < f.size(); ++i)
            f[i] = std::numbers::sqrt2 * std::sin(2.0 * std::numbers::pi * grid.point(i)[0]);
        VectorField g;
        ws.gradient(f, g);
        ScalarField lap;
        ws.divergence(g, lap);
        for (std::size_t i = 0; i < f.size(); ++i)
            REQUIRE_THAT(lap[i], Catch::Matchers::WithinAbs(-fourpi2 * f[i], 1e-10));
    }

    SECTION("divergence has exact zero mean") {
        std::mt19937_64 rng(4);
        TorusGrid g2(2, 32);
        SpectralTransform w2(g2);
        VectorField v(g2);
        v.comp[0] = random_band_limited(w2, 5, rng);
        v.comp[1] = random_band_limited(w2, 5, rng);
        ScalarField div;
        w2.divergence(v, div);
        CHECK(std::abs(mean(div)) < 1e-13);
    }
}
