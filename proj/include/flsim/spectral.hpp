#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "flsim/fft.hpp"
#include "flsim/grid.hpp"
#include "flsim/wave.hpp"

namespace flsim {

// Coefficients of a real scalar field in the orthonormal torus basis
// {1} u {sqrt(2) sin(2 pi k.x), sqrt(2) cos(2 pi k.x) : k in half-lattice, k != 0},
// truncated at |k| <= cutoff.  The cos coefficient at k = 0 is the mean; the
// sin slot at k = 0 is carried but identically zero.
struct SpectralCoeffs {
    int d = 1;
    int cutoff = 0;
    std::vector<WaveIndex> modes;   // enumerate_half_lattice(d, cutoff)
    std::vector<double> sin_c;
    std::vector<double> cos_c;

    SpectralCoeffs() = default;
    SpectralCoeffs(int dim, int m)
        : d(dim), cutoff(m), modes(enumerate_half_lattice(dim, m)),
          sin_c(modes.size(), 0.0), cos_c(modes.size(), 0.0) {}

    std::size_t find(const WaveIndex& k) const {
        auto it = std::lower_bound(modes.begin(), modes.end(), k);
        if (it == modes.end() || !(*it == k)) throw std::out_of_range("SpectralCoeffs: mode not present");
        return static_cast<std::size_t>(it - modes.begin());
    }

    double sum_sq() const {
        double s = 0.0;
        for (double v : sin_c) s += v * v;
        for (double v : cos_c) s += v * v;
        return s;
    }
};

// Precomputed addressing of half-lattice modes inside an r2c complex array.
struct ModeMap {
    struct Slot {
        std::size_t idx;      // complex-array index holding frequency k (or -k)
        bool conj;            // true if the array holds the -k coefficient
        std::size_t mirror;   // second storage location, or npos
        static constexpr std::size_t npos = static_cast<std::size_t>(-1);
    };
    std::vector<WaveIndex> modes;
    std::vector<Slot> slots;

    ModeMap(const TorusGrid& grid, int cutoff) {
        if (cutoff > grid.n / 2 - 1)
            throw std::invalid_argument("ModeMap: cutoff exceeds the Nyquist limit n/2 - 1");
        modes = enumerate_half_lattice(grid.d, cutoff);
        const int d = grid.d, n = grid.n, nc = n / 2 + 1;
        auto locate = [&](const std::vector<int>& k) {
            std::size_t lin = 0;
            for (int a = 0; a < d - 1; ++a) {
                int idx = k[a] >= 0 ? k[a] : k[a] + n;
                lin = lin * n + static_cast<std::size_t>(idx);
            }
            return lin * nc + static_cast<std::size_t>(k[d - 1]);
        };
        for (const auto& w : modes) {
            Slot s{0, false, Slot::npos};
            if (w.k[d - 1] >= 0) {
                s.idx = locate(w.k);
                if (w.k[d - 1] == 0 && !w.is_zero()) {
                    std::vector<int> neg(w.k);
                    for (int& c : neg) c = -c;
                    s.mirror = locate(neg);
                }
            } else {
                std::vector<int> neg(w.k);
                for (int& c : neg) c = -c;
                s.idx = locate(neg);
                s.conj = true;
            }
            slots.push_back(s);
        }
    }
};

// Band-limited analysis of a grid field: FFT then coefficient extraction.
inline SpectralCoeffs transform(SpectralTransform& ws, const ScalarField& f, const ModeMap& map,
                                int cutoff) {
    SpectralCoeffs out(ws.grid().d, cutoff);
    std::vector<std::complex<double>> c;
    ws.forward(f.values, c);
    const double r2 = std::numbers::sqrt2;
    for (std::size_t m = 0; m < map.modes.size(); ++m) {
        const auto& slot = map.slots[m];
        std::complex<double> v = c[slot.idx];
        if (slot.conj) v = std::conj(v);
        if (map.modes[m].is_zero()) {
            out.cos_c[m] = v.real();
            out.sin_c[m] = 0.0;
        } else {
            out.cos_c[m] = r2 * v.real();
            out.sin_c[m] = -r2 * v.imag();
        }
    }
    return out;
}

inline SpectralCoeffs transform(SpectralTransform& ws, const ScalarField& f, int cutoff) {
    ModeMap map(ws.grid(), cutoff);
    return transform(ws, f, map, cutoff);
}

// Synthesis back onto the grid (exact inverse on band-limited fields).
inline ScalarField inverse_transform(SpectralTransform& ws, const SpectralCoeffs& coeffs,
                                     const ModeMap& map) {
    std::vector<std::complex<double>> c(ws.complex_size(), {0.0, 0.0});
    const double inv_r2 = 1.0 / std::numbers::sqrt2;
    for (std::size_t m = 0; m < map.modes.size(); ++m) {
        const auto& slot = map.slots[m];
        std::complex<double> v;
        if (map.modes[m].is_zero()) {
            v = {coeffs.cos_c[m], 0.0};
        } else {
            v = {coeffs.cos_c[m] * inv_r2, -coeffs.sin_c[m] * inv_r2};
        }
        c[slot.idx] = slot.conj ? std::conj(v) : v;
        if (slot.mirror != ModeMap::Slot::npos) c[slot.mirror] = std::conj(c[slot.idx]);
    }
    ScalarField out(ws.grid());
    ws.inverse(c, out.values);
    return out;
}

inline ScalarField inverse_transform(SpectralTransform& ws, const SpectralCoeffs& coeffs) {
    ModeMap map(ws.grid(), coeffs.cutoff);
    return inverse_transform(ws, coeffs, map);
}

}  // namespace flsim
