#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace flsim {

// Pairwise summation: order-independent up to a deterministic tree, much
// smaller error constant than sequential accumulation.
inline double pairwise_sum(const double* x, std::size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += x[i];
        return s;
    }
    const std::size_t h = n / 2;
    return pairwise_sum(x, h) + pairwise_sum(x + h, n - h);
}

inline double pairwise_sum(const std::vector<double>& x) { return pairwise_sum(x.data(), x.size()); }

inline double sample_mean(const std::vector<double>& x) {
    if (x.empty()) throw std::invalid_argument("sample_mean: empty sample");
    return pairwise_sum(x) / static_cast<double>(x.size());
}

// Unbiased sample variance (denominator n-1).
inline double sample_variance(const std::vector<double>& x) {
    const std::size_t n = x.size();
    if (n < 2) throw std::invalid_argument("sample_variance: need at least 2 points");
    const double m = sample_mean(x);
    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) sq[i] = (x[i] - m) * (x[i] - m);
    return pairwise_sum(sq) / static_cast<double>(n - 1);
}

inline double sample_covariance(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n != y.size() || n < 2) throw std::invalid_argument("sample_covariance: bad sample sizes");
    const double mx = sample_mean(x), my = sample_mean(y);
    std::vector<double> pr(n);
    for (std::size_t i = 0; i < n; ++i) pr[i] = (x[i] - mx) * (y[i] - my);
    return pairwise_sum(pr) / static_cast<double>(n - 1);
}

// Jackknife (leave-one-out) standard error of an arbitrary statistic given
// the full-sample value and the n leave-one-out values.
inline double jackknife_se(const std::vector<double>& loo) {
    const std::size_t n = loo.size();
    if (n < 2) throw std::invalid_argument("jackknife_se: need at least 2 points");
    const double m = sample_mean(loo);
    double s = 0.0;
    for (double v : loo) s += (v - m) * (v - m);
    return std::sqrt(s * static_cast<double>(n - 1) / static_cast<double>(n));
}

// Jackknife SE of the sample mean (equals the usual sqrt(var/n)).
inline double mean_se(const std::vector<double>& x) {
    return std::sqrt(sample_variance(x) / static_cast<double>(x.size()));
}

// Jackknife SE of the unbiased sample variance.
inline double variance_se_jackknife(const std::vector<double>& x) {
    const std::size_t n = x.size();
    if (n < 3) throw std::invalid_argument("variance_se_jackknife: need at least 3 points");
    const double sum = pairwise_sum(x);
    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) sq[i] = x[i] * x[i];
    const double sumsq = pairwise_sum(sq);
    std::vector<double> loo(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double s1 = sum - x[i];
        const double s2 = sumsq - x[i] * x[i];
        const double m = s1 / static_cast<double>(n - 1);
        loo[i] = (s2 - static_cast<double>(n - 1) * m * m) / static_cast<double>(n - 2);
    }
    return jackknife_se(loo);
}

struct ScalarStats {
    double mean = 0.0;
    double mean_se = 0.0;
    double variance = 0.0;
    double variance_se = 0.0;
};

inline ScalarStats scalar_stats(const std::vector<double>& x) {
    ScalarStats s;
    s.mean = sample_mean(x);
    s.variance = sample_variance(x);
    s.mean_se = mean_se(x);
    s.variance_se = x.size() >= 3 ? variance_se_jackknife(x) : 0.0;
    return s;
}

}  // namespace flsim
