#ifndef ISLANDGUARD_CONTROLLER_HPP
#define ISLANDGUARD_CONTROLLER_HPP

#include "islandguard/signals.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace islandguard {

/// Current commands for the constant-current controller. theta_f is the
/// phase-shift command injected by the detection stack; zero when inactive.
struct CurrentRefs {
    double i_dref = 0.0; // A, active current
    double i_qref = 0.0; // A, reactive current (zero for unity power factor)
    double theta_f = 0.0; // rad
};

/// Planar rotation of the reference pair by theta_f. Positive theta_f
/// advances the commanded current phase.
inline std::pair<double, double> rotate_refs(const CurrentRefs& refs) {
    if (refs.theta_f == 0.0) return {refs.i_dref, refs.i_qref};
    const double c = std::cos(refs.theta_f);
    const double s = std::sin(refs.theta_f);
    return {c * refs.i_dref - s * refs.i_qref,
            s * refs.i_dref + c * refs.i_qref};
}

/// Modulation diagnostics: index relative to half the DC link and the
/// voltage phase angle. The average-value model applies the commanded
/// voltage directly, so an index above one is only flagged, not clipped.
struct Modulation {
    double m = 0.0;
    double phi = 0.0; // rad
    bool over_modulated = false;
};

inline Modulation modulation(double v_sd, double v_sq, double v_dc = 900.0) {
    Modulation out;
    if (v_sd == 0.0 && v_sq == 0.0) return out;
    out.m = std::hypot(v_sd, v_sq) / (0.5 * v_dc);
    out.phi = std::atan2(v_sq, v_sd);
    out.over_modulated = out.m > 1.0;
    return out;
}

/// Synchronous-frame PI current regulator with voltage feed-forward and
/// inductive cross-decoupling:
///   v_sd = v_dref + v_d - L_f*w*i_q
///   v_sq = v_qref + v_q + L_f*w*i_d
class CurrentController {
public:
    struct Gains {
        double k_p = 0.0;  // V/A
        double k_i = 0.0;  // V/(A*s)
        double integral_limit = 900.0; // V, anti-windup clamp (2x Vdc/2)

        /// Pole placement for the current loop on a pure filter inductance:
        /// k_p sets the bandwidth, k_i the damping.
        static Gains for_bandwidth(double l_f, double bandwidth_hz = 500.0, double zeta = 0.7) {
            Gains g;
            g.k_p = two_pi * bandwidth_hz * l_f;
            const double wn = g.k_p / (2.0 * zeta * l_f);
            g.k_i = l_f * wn * wn;
            return g;
        }
    };

    struct Output {
        double v_sd = 0.0;
        double v_sq = 0.0;
        Modulation mod;          // from the applied terminal voltage
        Modulation mod_ref;      // from the regulator outputs alone
    };

    explicit CurrentController(Gains gains, double l_f)
        : gains_(gains), l_f_(l_f) {}

    double integral_d() const { return int_d_; }
    double integral_q() const { return int_q_; }
    void preload(double int_d, double int_q) { int_d_ = int_d; int_q_ = int_q; }

    Output step(const DqVector& meas_i, const DqVector& meas_v, const CurrentRefs& refs,
                double omega, double dt) {
        const auto [id_star, iq_star] = rotate_refs(refs);
        const double err_d = id_star - meas_i.d;
        const double err_q = iq_star - meas_i.q;

        int_d_ = clamp_int(int_d_ + gains_.k_i * err_d * dt);
        int_q_ = clamp_int(int_q_ + gains_.k_i * err_q * dt);

        const double v_dref = gains_.k_p * err_d + int_d_;
        const double v_qref = gains_.k_p * err_q + int_q_;

        Output out;
        out.v_sd = v_dref + meas_v.d - l_f_ * omega * meas_i.q;
        out.v_sq = v_qref + meas_v.q + l_f_ * omega * meas_i.d;
        out.mod = modulation(out.v_sd, out.v_sq);
        out.mod_ref = modulation(v_dref, v_qref);
        return out;
    }

private:
    double clamp_int(double v) const {
        return std::clamp(v, -gains_.integral_limit, gains_.integral_limit);
    }

    Gains gains_;
    double l_f_;
    double int_d_ = 0.0;
    double int_q_ = 0.0;
};

} // namespace islandguard

#endif // ISLANDGUARD_CONTROLLER_HPP
