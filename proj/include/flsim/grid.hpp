#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace flsim {

// Uniform periodic grid on the unit torus [0,1)^d with n points per axis.
struct TorusGrid {
    int d = 1;
    int n = 2;

    TorusGrid() = default;
    TorusGrid(int dim, int points) : d(dim), n(points) {
        if (d < 1) throw std::invalid_argument("TorusGrid: dimension must be >= 1");
        if (n < 2) throw std::invalid_argument("TorusGrid: need at least 2 points per axis");
    }

    double spacing() const { return 1.0 / n; }

    std::size_t total_points() const {
        std::size_t p = 1;
        for (int a = 0; a < d; ++a) p *= static_cast<std::size_t>(n);
        return p;
    }

    // Cell volume of the periodic trapezoidal quadrature.
    double cell_volume() const { return std::pow(1.0 / n, d); }

    // Row-major linear index from per-axis indices (already in [0,n)).
    std::size_t index(const std::vector<int>& idx) const {
        std::size_t lin = 0;
        for (int a = 0; a < d; ++a) lin = lin * n + static_cast<std::size_t>(idx[a]);
        return lin;
    }

    // Coordinates of grid point with linear index `lin`.
    std::vector<double> point(std::size_t lin) const {
        std::vector<double> x(d);
        for (int a = d - 1; a >= 0; --a) {
            x[a] = static_cast<double>(lin % n) / n;
            lin /= n;
        }
        return x;
    }

    bool operator==(const TorusGrid& o) const { return d == o.d && n == o.n; }
    bool operator!=(const TorusGrid& o) const { return !(*this == o); }
};

struct ScalarField {
    TorusGrid grid;
    std::vector<double> values;

    ScalarField() = default;
    explicit ScalarField(TorusGrid g, double fill = 0.0)
        : grid(g), values(g.total_points(), fill) {}

    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }
    std::size_t size() const { return values.size(); }
};

struct VectorField {
    std::vector<ScalarField> comp;

    VectorField() = default;
    explicit VectorField(TorusGrid g) : comp(g.d, ScalarField(g)) {}

    const TorusGrid& grid() const { return comp.at(0).grid; }
    int dim() const { return static_cast<int>(comp.size()); }
};

// Trapezoidal quadrature on the uniform periodic grid.
inline double integrate(const ScalarField& f) {
    double s = 0.0;
    for (double v : f.values) s += v;
    return s * f.grid.cell_volume();
}

inline double mean(const ScalarField& f) {
    return integrate(f) / 1.0;  // torus has unit volume
}

inline double l1_norm(const ScalarField& f) {
    double s = 0.0;
    for (double v : f.values) s += std::abs(v);
    return s * f.grid.cell_volume();
}

inline double l2_norm_sq(const ScalarField& f) {
    double s = 0.0;
    for (double v : f.values) s += v * v;
    return s * f.grid.cell_volume();
}

inline double l2_norm(const ScalarField& f) { return std::sqrt(l2_norm_sq(f)); }

inline double l2_norm_sq(const VectorField& f) {
    double s = 0.0;
    for (const auto& c : f.comp) s += l2_norm_sq(c);
    return s;
}

inline double l2_inner(const ScalarField& a, const ScalarField& b) {
    if (a.grid != b.grid) throw std::invalid_argument("l2_inner: grid mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s * a.grid.cell_volume();
}

inline double linf_distance(const ScalarField& a, const ScalarField& b) {
    if (a.grid != b.grid) throw std::invalid_argument("linf_distance: grid mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace flsim
