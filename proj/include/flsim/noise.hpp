#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "flsim/fft.hpp"
#include "flsim/grid.hpp"
#include "flsim/rng.hpp"
#include "flsim/spectral.hpp"
#include "flsim/wave.hpp"

namespace flsim {

// Scaling parameters (epsilon, eta, K, M) of one SPDE configuration.
struct ScalingParams {
    double epsilon = 0.0;  // noise intensity, plays the role of 1/N
    double eta = 0.0;      // mollification scale; 0 means the exact truncated sqrt
    int K = 1;             // ultraviolet noise cutoff
    int M = 1;             // Galerkin cutoff

    void validate(const TorusGrid& grid) const {
        if (epsilon < 0.0 || epsilon > 1.0)
            throw std::invalid_argument("ScalingParams: epsilon must be in [0,1]");
        if (eta < 0.0 || eta >= 1.0)
            throw std::invalid_argument("ScalingParams: eta must be in [0,1)");
        if (K < 0 || M < 1) throw std::invalid_argument("ScalingParams: K >= 0, M >= 1 required");
        if (M > grid.n / 2 - 1)
            throw std::invalid_argument("ScalingParams: M exceeds the grid Nyquist limit");
        if (grid.n < 4 * K + 4)
            throw std::invalid_argument("ScalingParams: grid too coarse for noise cutoff (need n >= 4K+4)");
    }
};

// The exact constant in the pointwise basis identity
//   sum_{j, |k| <= K} (v.E_{k,j}) E_{k,j} + (v.E'_{k,j}) E'_{k,j} = N v:
// the zero mode contributes only through the cos members E'_{j,0} = v_j, so
// the count is 2 #{k != 0, |k| <= K} + 1 rather than 2 #{|k| <= K}.
inline long correction_constant(int d, int K) {
    const auto modes = enumerate_half_lattice(d, K);
    return 2 * static_cast<long>(modes.size() - 1) + 1;
}

// One time increment of the cutoff noise: independent N(0, dt) entries per
// (axis j, half-lattice mode k, sin/cos member).  The (j, k=0, sin) entry is
// carried but multiplies the identically-zero basis function.
struct NoiseIncrement {
    double dt = 0.0;
    int d = 1;
    int K = 0;
    std::vector<WaveIndex> modes;                // half-lattice, |k| <= K
    std::vector<std::vector<double>> sin_g;      // [axis][mode]
    std::vector<std::vector<double>> cos_g;      // [axis][mode]
};

inline NoiseIncrement sample_increment(Rng& rng, int d, int K, double dt) {
    if (dt < 0.0) throw std::invalid_argument("sample_increment: dt must be >= 0");
    NoiseIncrement inc;
    inc.dt = dt;
    inc.d = d;
    inc.K = K;
    inc.modes = enumerate_half_lattice(d, K);
    inc.sin_g.assign(d, std::vector<double>(inc.modes.size(), 0.0));
    inc.cos_g.assign(d, std::vector<double>(inc.modes.size(), 0.0));
    if (dt == 0.0) return inc;
    std::normal_distribution<double> gauss(0.0, std::sqrt(dt));
    for (int j = 0; j < d; ++j) {
        for (std::size_t m = 0; m < inc.modes.size(); ++m) {
            inc.sin_g[j][m] = gauss(rng);
            inc.cos_g[j][m] = gauss(rng);
        }
    }
    return inc;
}

// Evaluate the increment of xi^K on the grid:
//   sum_j sum_{|k| <= K} (E_{k,j} dB + E'_{k,j} dW).
// Component j is the synthesis of the (j, ., .) coefficients in the scalar
// sin/cos basis.
inline VectorField noise_field(SpectralTransform& ws, const NoiseIncrement& inc,
                               const ModeMap& map) {
    const TorusGrid& grid = ws.grid();
    if (grid.d != inc.d) throw std::invalid_argument("noise_field: dimension mismatch");
    if (grid.n < 4 * inc.K + 4)
        throw std::invalid_argument("noise_field: grid does not resolve cutoff (need n >= 4K+4)");
    VectorField out(grid);
    for (int j = 0; j < inc.d; ++j) {
        SpectralCoeffs c(inc.d, inc.K);
        for (std::size_t m = 0; m < inc.modes.size(); ++m) {
            c.cos_c[m] = inc.cos_g[j][m];
            c.sin_c[m] = inc.modes[m].is_zero() ? 0.0 : inc.sin_g[j][m];
        }
        out.comp[j] = inverse_transform(ws, c, map);
    }
    return out;
}

inline VectorField noise_field(SpectralTransform& ws, const NoiseIncrement& inc) {
    ModeMap map(ws.grid(), inc.K);
    return noise_field(ws, inc, map);
}

}  // namespace flsim
