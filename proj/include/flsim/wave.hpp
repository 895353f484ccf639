#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace flsim {

// Integer wave vector in Z^d.  The noise/Fourier basis is indexed by the
// half-lattice: k = 0 or the first nonzero component of k strictly positive,
// so that {k, -k} pairs are represented once.
struct WaveIndex {
    std::vector<int> k;

    WaveIndex() = default;
    explicit WaveIndex(std::vector<int> comps) : k(std::move(comps)) {}

    int dim() const { return static_cast<int>(k.size()); }

    bool is_zero() const {
        return std::all_of(k.begin(), k.end(), [](int c) { return c == 0; });
    }

    double norm_sq() const {
        double s = 0.0;
        for (int c : k) s += static_cast<double>(c) * c;
        return s;
    }

    double norm() const { return std::sqrt(norm_sq()); }

    bool in_half_lattice() const {
        for (int c : k) {
            if (c > 0) return true;
            if (c < 0) return false;
        }
        return true;  // k == 0
    }

    bool operator==(const WaveIndex& o) const { return k == o.k; }
    bool operator<(const WaveIndex& o) const {
        return std::lexicographical_compare(k.begin(), k.end(), o.k.begin(), o.k.end());
    }
};

// All half-lattice wave vectors with |k| <= K (Euclidean), lexicographic order.
inline std::vector<WaveIndex> enumerate_half_lattice(int d, int K) {
    if (d < 1) throw std::invalid_argument("enumerate_half_lattice: d must be >= 1");
    if (K < 0) throw std::invalid_argument("enumerate_half_lattice: K must be >= 0");
    std::vector<WaveIndex> out;
    std::vector<int> cur(d, -K);
    // Odometer over the box [-K,K]^d.
    while (true) {
        WaveIndex w{cur};
        if (w.in_half_lattice() && w.norm_sq() <= static_cast<double>(K) * K + 1e-12)
            out.push_back(w);
        int a = d - 1;
        while (a >= 0 && cur[a] == K) cur[a--] = -K;
        if (a < 0) break;
        ++cur[a];
    }
    std::sort(out.begin(), out.end());
    return out;
}

// Laplacian eigenvalue of the mode pair {sqrt(2) sin(2 pi k.x), sqrt(2) cos(2 pi k.x)}.
inline double laplacian_eigenvalue(const WaveIndex& k) {
    constexpr double four_pi_sq = 4.0 * std::numbers::pi * std::numbers::pi;
    return four_pi_sq * k.norm_sq();
}

enum class BasisKind { Sin, Cos };

// Scalar basis function value: sqrt(2) sin(2 pi k.x) or sqrt(2) cos(2 pi k.x);
// at k = 0 the cos member is the constant 1 and the sin member is identically 0.
inline double scalar_basis_eval(const WaveIndex& k, BasisKind kind, const std::vector<double>& x) {
    if (k.dim() != static_cast<int>(x.size()))
        throw std::invalid_argument("scalar_basis_eval: dimension mismatch");
    if (k.is_zero()) return kind == BasisKind::Cos ? 1.0 : 0.0;
    double phase = 0.0;
    for (int a = 0; a < k.dim(); ++a) phase += k.k[a] * x[a];
    phase *= 2.0 * std::numbers::pi;
    const double r = std::numbers::sqrt2;
    return kind == BasisKind::Sin ? r * std::sin(phase) : r * std::cos(phase);
}

// Vector basis member E_{j,k} (sin) or E'_{j,k} (cos): the scalar basis value
// times the j-th coordinate unit vector.  Axis j is 1-based.
inline std::vector<double> vector_basis_eval(const WaveIndex& k, int j, BasisKind kind,
                                             const std::vector<double>& x) {
    if (!k.in_half_lattice())
        throw std::invalid_argument("vector_basis_eval: k not in half-lattice");
    const int d = k.dim();
    if (j < 1 || j > d) throw std::invalid_argument("vector_basis_eval: axis out of range");
    std::vector<double> v(d, 0.0);
    v[j - 1] = scalar_basis_eval(k, kind, x);
    return v;
}

}  // namespace flsim
