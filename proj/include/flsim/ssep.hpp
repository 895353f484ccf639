#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include <fftw3.h>

#include "flsim/errors.hpp"
#include "flsim/fft.hpp"
#include "flsim/grid.hpp"
#include "flsim/rng.hpp"

namespace flsim {

// Symmetric simple exclusion process on (Z/NZ)^d with parabolic time scaling:
// each unordered nearest-neighbor edge swaps its endpoints at rate N^2 in
// macroscopic time, so the hydrodynamic limit is d_t rho = Lap(rho) with unit
// diffusivity.
struct SsepConfiguration {
    int d = 1;
    int N = 0;
    double t_macro = 0.0;
    std::vector<std::uint8_t> occupations;  // row-major over (Z/NZ)^d
    long particle_count = 0;

    std::size_t sites() const { return occupations.size(); }
};

namespace ssep_detail {

inline std::size_t total_sites(int d, int N) {
    std::size_t s = 1;
    for (int a = 0; a < d; ++a) s *= static_cast<std::size_t>(N);
    return s;
}

// strides for row-major indexing: last axis fastest
inline std::vector<std::size_t> strides(int d, int N) {
    std::vector<std::size_t> st(d);
    std::size_t s = 1;
    for (int a = d - 1; a >= 0; --a) {
        st[a] = s;
        s *= static_cast<std::size_t>(N);
    }
    return st;
}

}  // namespace ssep_detail

// Independent Bernoulli(rho0(x/N)) occupations; the profile is sampled at the
// nearest coarse grid point.
inline SsepConfiguration init_bernoulli(const ScalarField& rho0, int N, Rng& rng) {
    const TorusGrid& grid = rho0.grid;
    SsepConfiguration cfg;
    cfg.d = grid.d;
    cfg.N = N;
    cfg.occupations.assign(ssep_detail::total_sites(grid.d, N), 0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<int> site(grid.d, 0);
    std::vector<int> gidx(grid.d, 0);
    for (std::size_t i = 0; i < cfg.occupations.size(); ++i) {
        for (int a = 0; a < grid.d; ++a)
            gidx[a] = static_cast<int>((static_cast<long>(site[a]) * grid.n) / N) % grid.n;
        const double p = rho0[rho0.grid.index(gidx)];
        if (p < 0.0 || p > 1.0) throw ConfigError("init_bernoulli: profile outside [0,1]");
        if (unif(rng) < p) {
            cfg.occupations[i] = 1;
            ++cfg.particle_count;
        }
        for (int a = grid.d - 1; a >= 0; --a) {
            if (++site[a] < N) break;
            site[a] = 0;
        }
    }
    return cfg;
}

// Exact event-driven (Gillespie) advance by dt_macro.  The aggregate event
// rate is (number of directed forward edges) x N^2 = d N^d N^2; each event
// picks a uniform edge and swaps its endpoints (a no-op on equal occupations).
inline void advance(SsepConfiguration& cfg, double dt_macro, Rng& rng) {
    if (dt_macro < 0.0) throw ConfigError("advance: negative time step");
    if (dt_macro == 0.0) return;
    const std::size_t sites = cfg.sites();
    const double total_rate = static_cast<double>(cfg.d) * static_cast<double>(sites) *
                              static_cast<double>(cfg.N) * static_cast<double>(cfg.N);
    std::exponential_distribution<double> exp_gap(total_rate);
    std::uniform_int_distribution<std::size_t> pick_site(0, sites - 1);
    std::uniform_int_distribution<int> pick_axis(0, cfg.d - 1);
    const auto st = ssep_detail::strides(cfg.d, cfg.N);

    double t = 0.0;
    for (;;) {
        t += exp_gap(rng);
        if (t > dt_macro) break;
        const std::size_t i = pick_site(rng);
        const int axis = cfg.d == 1 ? 0 : pick_axis(rng);
        // neighbor in +axis direction with periodic wrap
        const std::size_t stride = st[axis];
        const std::size_t line = stride * static_cast<std::size_t>(cfg.N);
        const std::size_t base = (i / line) * line;
        const std::size_t j = base + (i - base + stride) % line;
        if (cfg.occupations[i] != cfg.occupations[j])
            std::swap(cfg.occupations[i], cfg.occupations[j]);
    }
    cfg.t_macro += dt_macro;
}

// Box-averaged coarse density on an n-point grid (N must be divisible by n).
inline ScalarField empirical_density(const SsepConfiguration& cfg, const TorusGrid& grid) {
    if (grid.d != cfg.d) throw ConfigError("empirical_density: dimension mismatch");
    if (cfg.N % grid.n != 0) throw ConfigError("empirical_density: N must be divisible by n");
    const int b = cfg.N / grid.n;
    ScalarField out(grid);
    std::vector<int> site(cfg.d, 0);
    std::vector<int> box(cfg.d, 0);
    for (std::size_t i = 0; i < cfg.occupations.size(); ++i) {
        for (int a = 0; a < cfg.d; ++a) box[a] = site[a] / b;
        out[grid.index(box)] += cfg.occupations[i];
        for (int a = cfg.d - 1; a >= 0; --a) {
            if (++site[a] < cfg.N) break;
            site[a] = 0;
        }
    }
    double boxsize = 1.0;
    for (int a = 0; a < cfg.d; ++a) boxsize *= b;
    for (double& v : out.values) v /= boxsize;
    return out;
}

// E pi^N per lattice site: the discrete heat semigroup (rate-N^2 nearest
// neighbor Laplacian) applied to the initial occupation probabilities,
// computed by DFT on the N-lattice.
inline std::vector<double> discrete_heat_mean(const ScalarField& rho0, int d, int N,
                                              double t_macro) {
    const std::size_t sites = ssep_detail::total_sites(d, N);
    std::vector<std::complex<double>> buf(sites);
    {
        // initial probabilities, sampled like init_bernoulli
        std::vector<int> site(d, 0), gidx(d, 0);
        const TorusGrid& grid = rho0.grid;
        for (std::size_t i = 0; i < sites; ++i) {
            for (int a = 0; a < d; ++a)
                gidx[a] = static_cast<int>((static_cast<long>(site[a]) * grid.n) / N) % grid.n;
            buf[i] = rho0[grid.index(gidx)];
            for (int a = d - 1; a >= 0; --a) {
                if (++site[a] < N) break;
                site[a] = 0;
            }
        }
    }
    std::vector<int> dims(d, N);
    fftw_plan fwd, bwd;
    {
        std::lock_guard<std::mutex> lk(detail::fftw_planner_mutex());
        fwd = fftw_plan_dft(d, dims.data(), reinterpret_cast<fftw_complex*>(buf.data()),
                            reinterpret_cast<fftw_complex*>(buf.data()), FFTW_FORWARD,
                            FFTW_ESTIMATE);
        bwd = fftw_plan_dft(d, dims.data(), reinterpret_cast<fftw_complex*>(buf.data()),
                            reinterpret_cast<fftw_complex*>(buf.data()), FFTW_BACKWARD,
                            FFTW_ESTIMATE);
    }
    fftw_execute(fwd);
    {
        std::vector<int> k(d, 0);
        const double rate = static_cast<double>(N) * static_cast<double>(N);
        for (std::size_t i = 0; i < sites; ++i) {
            double lam = 0.0;
            for (int a = 0; a < d; ++a)
                lam += rate * 2.0 * (1.0 - std::cos(2.0 * std::numbers::pi * k[a] / N));
            buf[i] *= std::exp(-lam * t_macro) / static_cast<double>(sites);
            for (int a = d - 1; a >= 0; --a) {
                if (++k[a] < N) break;
                k[a] = 0;
            }
        }
    }
    fftw_execute(bwd);
    {
        std::lock_guard<std::mutex> lk(detail::fftw_planner_mutex());
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(bwd);
    }
    std::vector<double> out(sites);
    for (std::size_t i = 0; i < sites; ++i) out[i] = buf[i].real();
    return out;
}

// Coarse fluctuation field N^{d/2} (pi^N - E pi^N) per box, with the mean
// supplied per lattice site (from discrete_heat_mean).
inline ScalarField fluctuation_field(const SsepConfiguration& cfg,
                                     const std::vector<double>& mean_sites,
                                     const TorusGrid& grid) {
    if (mean_sites.size() != cfg.sites())
        throw ConfigError("fluctuation_field: mean/occupation size mismatch");
    if (cfg.N % grid.n != 0) throw ConfigError("fluctuation_field: N must be divisible by n");
    const int b = cfg.N / grid.n;
    ScalarField out(grid);
    std::vector<int> site(cfg.d, 0), box(cfg.d, 0);
    for (std::size_t i = 0; i < cfg.occupations.size(); ++i) {
        for (int a = 0; a < cfg.d; ++a) box[a] = site[a] / b;
        out[grid.index(box)] += cfg.occupations[i] - mean_sites[i];
        for (int a = cfg.d - 1; a >= 0; --a) {
            if (++site[a] < cfg.N) break;
            site[a] = 0;
        }
    }
    double boxsize = 1.0;
    for (int a = 0; a < cfg.d; ++a) boxsize *= b;
    const double scale = std::pow(static_cast<double>(cfg.N), 0.5 * cfg.d) / boxsize;
    for (double& v : out.values) v *= scale;
    return out;
}

}  // namespace flsim
