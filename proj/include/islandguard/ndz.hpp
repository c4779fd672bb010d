#ifndef ISLANDGUARD_NDZ_HPP
#define ISLANDGUARD_NDZ_HPP

#include "islandguard/detection.hpp"
#include "islandguard/plant.hpp"
#include "islandguard/signals.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace islandguard {

/// Impedance angle of the parallel RLC load in degrees:
///   phi_load = atan(q_f * (f_0/f - f/f_0))
/// Positive below resonance (voltage leads current).
inline double load_phase_deg(double f, double q_f, double f_0) {
    if (!(f > 0.0)) throw std::invalid_argument("load_phase: f must be positive");
    return rad2deg(std::atan(q_f * (f_0 / f - f / f_0)));
}

inline double load_phase_deg(double f, const LoadParams& load) {
    return load_phase_deg(f, load.q_f(), load.f_0());
}

/// Positive root of the resonance-frequency quadratic
///   f_0^2 + (f_is * tan(theta_sms(f_is)) / q_f) * f_0 - f_is^2 = 0,
/// i.e. the load resonance whose islanded equilibrium sits exactly at f_is.
inline double ndz_resonance_root(double f_is, double q_f, const SmsParams& sms) {
    if (!(q_f > 0.0)) throw std::invalid_argument("ndz_resonance_root: q_f must be positive");
    const double b = f_is * std::tan(deg2rad(sms_phase(f_is, sms))) / q_f;
    return 0.5 * (-b + std::sqrt(b * b + 4.0 * f_is * f_is));
}

/// Islanded frequency equilibrium for a unity-power-factor current-source DG
/// with SMS feedback. In steady state the commanded current phase advance
/// must cancel the load impedance angle, so equilibria are the roots of
///   h(f) = theta_sms(f) + phi_load(f) = 0
/// and h(f) is also the drift direction: the frequency migrates toward
/// larger f while h > 0 and smaller f while h < 0. Stable roots have
/// h'(f) < 0.
struct IslandEquilibrium {
    double f_island = 0.0;
    bool stable = false;
    bool unbounded = false; // no root inside the search bracket: detection certain
};

namespace detail {

inline double phase_balance(double f, double q_f, double f_0, const SmsParams& sms) {
    return sms_phase(f, sms) + load_phase_deg(f, q_f, f_0);
}

inline double phase_balance_slope(double f, double q_f, double f_0, const SmsParams& sms) {
    const double h = 1e-5;
    return (phase_balance(f + h, q_f, f_0, sms) - phase_balance(f - h, q_f, f_0, sms)) / (2.0 * h);
}

} // namespace detail

inline IslandEquilibrium island_equilibrium(double q_f, double f_0, const SmsParams& sms,
                                            double f_lo_margin = 10.0, double f_hi_margin = 10.0,
                                            double tol = 1e-6) {
    if (!(q_f > 0.0) || !(f_0 > 0.0))
        throw std::invalid_argument("island_equilibrium: q_f and f_0 must be positive");

    const double f_lo = sms.f_g - f_lo_margin;
    const double f_hi = sms.f_g + f_hi_margin;
    auto h = [&](double f) { return detail::phase_balance(f, q_f, f_0, sms); };

    IslandEquilibrium out;
    double f = sms.f_g;
    double h0 = h(f);

    // Drift direction from the grid frequency; an exact unstable equilibrium
    // at f_g is perturbed upward by convention.
    double dir;
    if (h0 > 0.0) dir = 1.0;
    else if (h0 < 0.0) dir = -1.0;
    else {
        if (detail::phase_balance_slope(f, q_f, f_0, sms) < 0.0) {
            out.f_island = f;
            out.stable = true;
            return out;
        }
        dir = 1.0;
        f += 1e-4;
        h0 = h(f);
        if (h0 == 0.0) { out.f_island = f; return out; }
        dir = h0 > 0.0 ? 1.0 : -1.0;
    }

    // March toward the first sign change, then bisect.
    const double stride = 0.01;
    double f_prev = f, h_prev = h0;
    while (f > f_lo && f < f_hi) {
        f += dir * stride;
        const double hf = h(f);
        if (hf == 0.0 || (hf > 0.0) != (h_prev > 0.0)) {
            double a = f_prev, b = f, ha = h_prev;
            while (std::abs(b - a) > tol) {
                const double m = 0.5 * (a + b);
                const double hm = h(m);
                if (hm == 0.0) { a = b = m; break; }
                if ((hm > 0.0) == (ha > 0.0)) { a = m; ha = hm; }
                else b = m;
            }
            out.f_island = 0.5 * (a + b);
            out.stable = detail::phase_balance_slope(out.f_island, q_f, f_0, sms) < 0.0;
            return out;
        }
        f_prev = f;
        h_prev = hf;
    }

    out.unbounded = true;
    out.f_island = dir > 0.0 ? f_hi : f_lo;
    out.stable = false;
    return out;
}

/// One cell of the non-detection-zone map.
struct NdzPoint {
    double q_f = 0.0;
    double f_0 = 0.0;
    double f_island = 0.0;
    bool inside_ndz = false;
};

struct NdzMap {
    std::vector<double> q_f_axis;
    std::vector<double> f_0_axis;
    std::vector<NdzPoint> points;            // row-major, q_f rows
    std::vector<std::pair<double, double>> boundary; // (q_f, f_0) where the flag flips

    const NdzPoint& at(std::size_t iq, std::size_t i0) const {
        return points[iq * f_0_axis.size() + i0];
    }
};

struct Band {
    double f_under = 59.3;
    double f_over = 60.5;
    bool contains(double f) const { return f > f_under&& f < f_over; }
};

/// Evaluates island_equilibrium over a q_f x f_0 grid. A cell is inside the
/// NDZ when the reachable equilibrium is stable and its frequency stays
/// inside the relay band.
inline NdzMap ndz_map(double q_f_min, double q_f_max, std::size_t q_f_steps,
                      double f_0_min, double f_0_max, std::size_t f_0_steps,
                      const SmsParams& sms, const Band& band) {
    if (q_f_steps < 1 || f_0_steps < 1 || !(q_f_max >= q_f_min) || !(f_0_max >= f_0_min))
        throw std::invalid_argument("ndz_map: empty range");

    NdzMap map;
    map.q_f_axis.reserve(q_f_steps);
    map.f_0_axis.reserve(f_0_steps);
    for (std::size_t i = 0; i < q_f_steps; ++i)
        map.q_f_axis.push_back(q_f_steps == 1 ? q_f_min
                               : q_f_min + (q_f_max - q_f_min) * static_cast<double>(i) /
                                     static_cast<double>(q_f_steps - 1));
    for (std::size_t j = 0; j < f_0_steps; ++j)
        map.f_0_axis.push_back(f_0_steps == 1 ? f_0_min
                               : f_0_min + (f_0_max - f_0_min) * static_cast<double>(j) /
                                     static_cast<double>(f_0_steps - 1));

    map.points.reserve(q_f_steps * f_0_steps);
    for (double q : map.q_f_axis)
        for (double f0 : map.f_0_axis) {
            const IslandEquilibrium eq = island_equilibrium(q, f0, sms);
            NdzPoint p;
            p.q_f = q;
            p.f_0 = f0;
            p.f_island = eq.f_island;
            p.inside_ndz = eq.stable && !eq.unbounded && band.contains(eq.f_island);
            map.points.push_back(p);
        }

    for (std::size_t iq = 0; iq < q_f_steps; ++iq)
        for (std::size_t j = 0; j + 1 < f_0_steps; ++j) {
            const auto& a = map.at(iq, j);
            const auto& b = map.at(iq, j + 1);
            if (a.inside_ndz != b.inside_ndz)
                map.boundary.emplace_back(map.q_f_axis[iq], 0.5 * (a.f_0 + b.f_0));
        }
    return map;
}

} // namespace islandguard

#endif // ISLANDGUARD_NDZ_HPP
