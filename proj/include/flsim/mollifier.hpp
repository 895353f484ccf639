#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace flsim {

// Truncated square-root nonlinearity: sqrt(x(1-x)) on [0,1], zero outside.
inline double sqrt_nonlinearity(double x) {
    if (x <= 0.0 || x >= 1.0) return 0.0;
    return std::sqrt(x * (1.0 - x));
}

// Smooth mollification s^eta = psi_eta * s with the standard bump kernel
// psi(u) ~ exp(-1/(1-u^2)) on (-1,1), tabulated once with cubic interpolation
// so that evaluation is O(1) inside the SPDE step loop.  Queries outside
// [-eta, 1+eta] return 0 exactly.
class MollifiedSqrt {
public:
    explicit MollifiedSqrt(double eta, int table_size = (1 << 16) + 1)
        : eta_(eta) {
        if (eta <= 0.0 || eta >= 1.0)
            throw std::invalid_argument("MollifiedSqrt: eta must be in (0,1)");
        if (table_size < 16) throw std::invalid_argument("MollifiedSqrt: table too small");
        x0_ = -eta_;
        x1_ = 1.0 + eta_;
        dx_ = (x1_ - x0_) / (table_size - 1);
        val_.resize(table_size);
        deriv_.resize(table_size);

        // Kernel mass for the normalization, Simpson on the smooth bump.
        double norm = 0.0;
        {
            const int q = 2048;
            for (int i = 0; i <= q; ++i) {
                double w = (i == 0 || i == q) ? 1.0 : (i % 2 ? 4.0 : 2.0);
                norm += w * (2.0 / q) / 3.0 * bump(-1.0 + 2.0 * i / q);
            }
        }

        // s^eta(x) = int_{lo}^{hi} psi((x-z)/eta) s(z) dz / (eta norm), with
        // lo = max(0, x-eta), hi = min(1, x+eta).  The integrand has sqrt
        // kinks only at z = 0 and z = 1, so split at the midpoint and use the
        // substitution z = endpoint +- t^2 on each half: the integrand becomes
        // smooth in t and composite Simpson converges fast.  The derivative
        // table integrates psi' under the same nodes; boundary terms vanish
        // because psi is flat at +-1.
        const int q = 96;  // Simpson subintervals per half (even)
        for (int tbl = 0; tbl < table_size; ++tbl) {
            const double x = x0_ + tbl * dx_;
            const double lo = std::max(0.0, x - eta_);
            const double hi = std::min(1.0, x + eta_);
            double v = 0.0, dv = 0.0;
            if (hi > lo) {
                const double mid = 0.5 * (lo + hi);
                for (int half = 0; half < 2; ++half) {
                    const double tmax = std::sqrt(mid - lo);  // same width both halves
                    for (int i = 0; i <= q; ++i) {
                        const double t = tmax * i / q;
                        const double z = half == 0 ? lo + t * t : hi - t * t;
                        double w = (i == 0 || i == q) ? 1.0 : (i % 2 ? 4.0 : 2.0);
                        w *= (tmax / q) / 3.0 * 2.0 * t;  // dz = 2 t dt
                        const double u = (x - z) / eta_;
                        const double s = sqrt_nonlinearity(z);
                        v += w * bump(u) * s;
                        dv += w * bump_prime(u) * s;
                    }
                }
            }
            val_[tbl] = v / (eta_ * norm);
            deriv_[tbl] = dv / (eta_ * eta_ * norm);
        }
    }

    double eta() const { return eta_; }

    double operator()(double x) const { return std::max(0.0, interp(val_, x)); }
    double prime(double x) const { return interp(deriv_, x); }

    // sup |s - s^eta| over a dense grid refined near the endpoints 0 and 1.
    double sup_error() const {
        double m = 0.0;
        for (double x : evaluation_grid())
            m = std::max(m, std::abs(sqrt_nonlinearity(x) - (*this)(x)));
        return m;
    }

    // sup |(s^eta)'| over the same dense grid.
    double sup_deriv() const {
        double m = 0.0;
        for (double x : evaluation_grid())
            m = std::max(m, std::abs(prime(x)));
        return m;
    }

private:
    static double bump(double u) {
        const double w = 1.0 - u * u;
        return w > 1e-12 ? std::exp(-1.0 / w) : 0.0;
    }
    static double bump_prime(double u) {
        const double w = 1.0 - u * u;
        if (w <= 1e-12) return 0.0;
        return bump(u) * (-2.0 * u / (w * w));
    }

    std::vector<double> evaluation_grid() const {
        std::vector<double> xs;
        const int coarse = 100000;
        xs.reserve(coarse + 4000);
        for (int i = 0; i <= coarse; ++i)
            xs.push_back(x0_ + (x1_ - x0_) * i / coarse);
        // geometric refinement toward the sqrt kinks at 0 and 1
        for (int i = 0; i < 2000; ++i) {
            const double off = eta_ * std::pow(0.5, 12.0 * i / 2000.0);
            xs.push_back(off);
            xs.push_back(-off);
            xs.push_back(1.0 - off);
            xs.push_back(1.0 + off);
        }
        return xs;
    }

    // Catmull-Rom cubic through the table; exact zero outside the support.
    double interp(const std::vector<double>& tab, double x) const {
        if (x <= x0_ || x >= x1_) return 0.0;
        const double p = (x - x0_) / dx_;
        long i = static_cast<long>(p);
        i = std::clamp(i, 1L, static_cast<long>(tab.size()) - 3);
        const double t = p - i;
        const double ym1 = tab[i - 1], y0 = tab[i], y1 = tab[i + 1], y2 = tab[i + 2];
        const double a0 = -0.5 * ym1 + 1.5 * y0 - 1.5 * y1 + 0.5 * y2;
        const double a1 = ym1 - 2.5 * y0 + 2.0 * y1 - 0.5 * y2;
        const double a2 = -0.5 * ym1 + 0.5 * y1;
        return ((a0 * t + a1) * t + a2) * t + y0;
    }

    double eta_, x0_, x1_, dx_;
    std::vector<double> val_, deriv_;
};

inline double sup_error(double eta) { return MollifiedSqrt(eta).sup_error(); }
inline double sup_deriv(double eta) { return MollifiedSqrt(eta).sup_deriv(); }

}  // namespace flsim
