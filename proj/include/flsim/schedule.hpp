#pragma once

#include <cmath>
#include <vector>

#include "flsim/errors.hpp"
#include "flsim/mollifier.hpp"
#include "flsim/noise.hpp"

namespace flsim {

struct ScheduleEntry {
    double epsilon = 0.0;
    double eta = 0.0;
    int K = 1;
    int M = 0;  // 0 = use the grid Nyquist at run time
    long n_corr = 0;
    double sup_deriv = 0.0;
    double diag_uv = 0.0;       // eps * K^{d+2}
    double diag_moll = 0.0;     // eps * N_K^eff * sup_deriv^2
    double diag_clt = 0.0;      // eps * (N_K^eff)^2 * sup_deriv^4
};

struct ScheduleReport {
    int d = 1;
    double a = 0.0, b = 0.0;
    std::vector<ScheduleEntry> entries;
    bool ldp_flag = false;  // first two diagnostics decreasing along the list
    bool clt_flag = false;  // third diagnostic decreasing
};

// K = ceil(eps^{-a}), eta = eps^b; diagnostics use the measured sup-derivative
// of the mollified sqrt, not an assumed power law.
inline ScheduleReport build_schedule(const std::vector<double>& eps_list, double a, double b,
                                     int d) {
    if (eps_list.empty()) throw ConfigError("build_schedule: empty epsilon list");
    if (a <= 0.0 || b <= 0.0) throw ConfigError("build_schedule: exponents must be positive");
    for (std::size_t i = 0; i + 1 < eps_list.size(); ++i)
        if (eps_list[i + 1] >= eps_list[i])
            throw ConfigError("build_schedule: epsilon list must be strictly decreasing");

    ScheduleReport rep;
    rep.d = d;
    rep.a = a;
    rep.b = b;
    for (double eps : eps_list) {
        if (eps <= 0.0 || eps > 1.0) throw ConfigError("build_schedule: epsilon outside (0,1]");
        ScheduleEntry e;
        e.epsilon = eps;
        e.K = static_cast<int>(std::ceil(std::pow(eps, -a)));
        e.eta = std::pow(eps, b);
        e.n_corr = correction_constant(d, e.K);
        e.sup_deriv = MollifiedSqrt(e.eta).sup_deriv();
        e.diag_uv = eps * std::pow(static_cast<double>(e.K), d + 2);
        e.diag_moll = eps * static_cast<double>(e.n_corr) * e.sup_deriv * e.sup_deriv;
        e.diag_clt = eps * static_cast<double>(e.n_corr) * static_cast<double>(e.n_corr) *
                     std::pow(e.sup_deriv, 4);
        rep.entries.push_back(e);
    }

    rep.ldp_flag = rep.clt_flag = true;
    for (std::size_t i = 0; i + 1 < rep.entries.size(); ++i) {
        if (rep.entries[i + 1].diag_uv >= rep.entries[i].diag_uv ||
            rep.entries[i + 1].diag_moll >= rep.entries[i].diag_moll)
            rep.ldp_flag = false;
        if (rep.entries[i + 1].diag_clt >= rep.entries[i].diag_clt) rep.clt_flag = false;
    }
    return rep;
}

}  // namespace flsim
