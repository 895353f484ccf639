#pragma once

#include <complex>
#include <cstring>
#include <mutex>
#include <stdexcept>
#include <vector>

#include <fftw3.h>

#include "flsim/grid.hpp"

namespace flsim {

namespace detail {
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace detail

// Real<->complex FFT workspace for one grid, plus the spectral differential
// operators built on it.  Forward output is normalized so that entry m holds
// the Fourier coefficient c_m = \int f(x) e^{-2 pi i m.x} dx.
//
// One instance is not thread safe; concurrent replicas each own their own.
class SpectralTransform {
public:
    explicit SpectralTransform(TorusGrid grid) : grid_(grid) {
        const int d = grid_.d;
        const int n = grid_.n;
        real_size_ = grid_.total_points();
        complex_size_ = 1;
        for (int a = 0; a < d - 1; ++a) complex_size_ *= static_cast<std::size_t>(n);
        complex_size_ *= static_cast<std::size_t>(n / 2 + 1);

        rbuf_ = static_cast<double*>(fftw_malloc(sizeof(double) * real_size_));
        cbuf_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * complex_size_));
        if (!rbuf_ || !cbuf_) throw std::bad_alloc();

        std::vector<int> dims(d, n);
        {
            std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
            fwd_ = fftw_plan_dft_r2c(d, dims.data(), rbuf_, cbuf_, FFTW_ESTIMATE);
            inv_ = fftw_plan_dft_c2r(d, dims.data(), cbuf_, rbuf_, FFTW_ESTIMATE);
        }
        if (!fwd_ || !inv_) throw std::runtime_error("SpectralTransform: FFTW plan creation failed");

        build_frequency_tables();
    }

    ~SpectralTransform() {
        std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(inv_);
        fftw_free(rbuf_);
        fftw_free(cbuf_);
    }

    SpectralTransform(const SpectralTransform&) = delete;
    SpectralTransform& operator=(const SpectralTransform&) = delete;

    const TorusGrid& grid() const { return grid_; }
    std::size_t complex_size() const { return complex_size_; }

    // 4 pi^2 |m|^2 at each complex index.
    const std::vector<double>& laplacian_symbol() const { return lap_; }
    // 2 pi m_j at each complex index, with the Nyquist frequency zeroed.
    const std::vector<double>& derivative_symbol(int axis) const { return deriv_.at(axis); }

    void forward(const std::vector<double>& in, std::vector<std::complex<double>>& out) {
        if (in.size() != real_size_) throw std::invalid_argument("forward: size mismatch");
        std::memcpy(rbuf_, in.data(), sizeof(double) * real_size_);
        fftw_execute(fwd_);
        out.resize(complex_size_);
        const double norm = 1.0 / static_cast<double>(real_size_);
        for (std::size_t i = 0; i < complex_size_; ++i)
            out[i] = std::complex<double>(cbuf_[i][0] * norm, cbuf_[i][1] * norm);
    }

    void inverse(const std::vector<std::complex<double>>& in, std::vector<double>& out) {
        if (in.size() != complex_size_) throw std::invalid_argument("inverse: size mismatch");
        for (std::size_t i = 0; i < complex_size_; ++i) {
            cbuf_[i][0] = in[i].real();
            cbuf_[i][1] = in[i].imag();
        }
        fftw_execute(inv_);
        out.resize(real_size_);
        std::memcpy(out.data(), rbuf_, sizeof(double) * real_size_);
    }

    // Spectral gradient; output components allocated on the same grid.
    void gradient(const ScalarField& f, VectorField& out) {
        forward(f.values, scratch_);
        if (out.comp.size() != static_cast<std::size_t>(grid_.d)) out = VectorField(grid_);
        for (int a = 0; a < grid_.d; ++a) {
            const auto& sym = deriv_[a];
            scratch2_.resize(complex_size_);
            for (std::size_t i = 0; i < complex_size_; ++i)
                scratch2_[i] = std::complex<double>(0.0, sym[i]) * scratch_[i];
            out.comp[a].grid = grid_;
            inverse(scratch2_, out.comp[a].values);
        }
    }

    // Spectral divergence; the zero mode of the result is exactly zero.
    void divergence(const VectorField& f, ScalarField& out) {
        if (f.dim() != grid_.d) throw std::invalid_argument("divergence: component count mismatch");
        acc_.assign(complex_size_, {0.0, 0.0});
        for (int a = 0; a < grid_.d; ++a) {
            forward(f.comp[a].values, scratch_);
            const auto& sym = deriv_[a];
            for (std::size_t i = 0; i < complex_size_; ++i)
                acc_[i] += std::complex<double>(0.0, sym[i]) * scratch_[i];
        }
        out.grid = grid_;
        inverse(acc_, out.values);
    }

    void laplacian(const ScalarField& f, ScalarField& out) {
        forward(f.values, scratch_);
        for (std::size_t i = 0; i < complex_size_; ++i) scratch_[i] *= -lap_[i];
        out.grid = grid_;
        inverse(scratch_, out.values);
    }

    // Zero-mean solution of Laplace(u) = f - mean(f).
    void inverse_laplacian(const ScalarField& f, ScalarField& out) {
        forward(f.values, scratch_);
        scratch_[0] = 0.0;
        for (std::size_t i = 1; i < complex_size_; ++i)
            scratch_[i] /= (lap_[i] > 0.0 ? -lap_[i] : 1.0);
        out.grid = grid_;
        inverse(scratch_, out.values);
    }

    // Radial spectral projection: zero all modes with |m| > cutoff.
    void project(ScalarField& f, int cutoff) {
        forward(f.values, scratch_);
        const double c2 = static_cast<double>(cutoff) * cutoff + 1e-12;
        constexpr double four_pi_sq = 4.0 * 3.14159265358979323846 * 3.14159265358979323846;
        for (std::size_t i = 0; i < complex_size_; ++i)
            if (lap_[i] / four_pi_sq > c2) scratch_[i] = 0.0;
        inverse(scratch_, f.values);
    }

    // Signed integer frequency vector of a complex-array index.
    void frequency(std::size_t cidx, std::vector<int>& m) const {
        const int d = grid_.d;
        const int n = grid_.n;
        const int nc = n / 2 + 1;
        m.resize(d);
        m[d - 1] = static_cast<int>(cidx % nc);
        cidx /= nc;
        for (int a = d - 2; a >= 0; --a) {
            int idx = static_cast<int>(cidx % n);
            m[a] = idx <= n / 2 ? idx : idx - n;
            cidx /= n;
        }
    }

private:
    void build_frequency_tables() {
        const int d = grid_.d;
        const int n = grid_.n;
        constexpr double two_pi = 2.0 * 3.14159265358979323846;
        lap_.assign(complex_size_, 0.0);
        deriv_.assign(d, std::vector<double>(complex_size_, 0.0));
        std::vector<int> m;
        for (std::size_t i = 0; i < complex_size_; ++i) {
            frequency(i, m);
            double k2 = 0.0;
            for (int a = 0; a < d; ++a) {
                k2 += static_cast<double>(m[a]) * m[a];
                // odd derivative of the unmatched Nyquist mode is dropped
                deriv_[a][i] = (std::abs(m[a]) == n / 2) ? 0.0 : two_pi * m[a];
            }
            lap_[i] = two_pi * two_pi * k2;
        }
    }

    TorusGrid grid_;
    std::size_t real_size_ = 0;
    std::size_t complex_size_ = 0;
    double* rbuf_ = nullptr;
    fftw_complex* cbuf_ = nullptr;
    fftw_plan fwd_ = nullptr;
    fftw_plan inv_ = nullptr;
    std::vector<double> lap_;
    std::vector<std::vector<double>> deriv_;
    std::vector<std::complex<double>> scratch_, scratch2_, acc_;
};

}  // namespace flsim
