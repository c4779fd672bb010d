#ifndef ISLANDGUARD_DETECTION_HPP
#define ISLANDGUARD_DETECTION_HPP

#include "islandguard/signals.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

namespace islandguard {

enum class SmsMode { off, always_on, armed_by_rocof };

/// Slip-mode frequency-shift curve parameters.
struct SmsParams {
    double theta_m_deg = 25.0; // maximum phase shift
    double f_m = 62.0;         // Hz, frequency of maximum shift
    double f_g = 60.0;         // Hz, grid frequency
    SmsMode mode = SmsMode::armed_by_rocof;

    void validate() const {
        if (f_m == f_g) throw std::invalid_argument("SmsParams: f_m must differ from f_g");
        if (theta_m_deg < 0.0 || theta_m_deg >= 90.0)
            throw std::invalid_argument("SmsParams: theta_m outside [0, 90) degrees");
    }
};

/// SMS phase shift in degrees:
///   theta_sms = theta_m * sin(pi/2 * (f - f_g) / (f_m - f_g))
/// The sine argument is left unclamped, so the curve folds back beyond f_m.
inline double sms_phase(double f, const SmsParams& p) {
    return p.theta_m_deg * std::sin(0.5 * pi * (f - p.f_g) / (p.f_m - p.f_g));
}

enum class TripCause { over_f, under_f, over_v, under_v };

inline const char* to_string(TripCause c) {
    switch (c) {
    case TripCause::over_f: return "over_f";
    case TripCause::under_f: return "under_f";
    case TripCause::over_v: return "over_v";
    case TripCause::under_v: return "under_v";
    }
    return "?";
}

struct RelaySettings {
    double alpha = 1.2;        // Hz/s, ROCOF threshold
    double beta = 0.85;        // pu, minimum voltage for ROCOF validity
    double f_over = 60.5;      // Hz
    double f_under = 59.3;     // Hz
    double v_over = 1.10;      // pu
    double v_under = 0.88;     // pu
    bool voltage_relays_enabled = false;
    double max_clearing = 2.0; // s, required detection bound
    double disarm_hold = 0.5;  // s, quiet time before ARMED releases

    void validate() const {
        if (alpha < 0.05 || alpha > 1.2)
            throw std::invalid_argument("RelaySettings: alpha outside [0.05, 1.2] Hz/s");
        if (!(beta > 0.0 && beta < 1.0))
            throw std::invalid_argument("RelaySettings: beta outside (0, 1) pu");
        if (!(f_under < f_over))
            throw std::invalid_argument("RelaySettings: f_under must be below f_over");
    }
};

/// ROCOF relay: asserts only while the rate of frequency change exceeds
/// alpha AND the PCC voltage stays above beta (the voltage condition rides
/// through motor starts and faults).
inline bool rocof_relay(double df_dt, double v_pcc_pu, const RelaySettings& s) {
    return std::abs(df_dt) > s.alpha && v_pcc_pu > s.beta;
}

inline std::optional<TripCause> frequency_relay(double f, const RelaySettings& s) {
    if (f > s.f_over) return TripCause::over_f;
    if (f < s.f_under) return TripCause::under_f;
    return std::nullopt;
}

inline std::optional<TripCause> voltage_relay(double v_pu, const RelaySettings& s) {
    if (!s.voltage_relays_enabled) return std::nullopt;
    if (v_pu > s.v_over) return TripCause::over_v;
    if (v_pu < s.v_under) return TripCause::under_v;
    return std::nullopt;
}

struct TripEvent {
    double t_trip = 0.0;
    TripCause cause = TripCause::over_f;
};

/// Hybrid detection state machine. In armed_by_rocof mode the ROCOF relay
/// arms the SMS injection; the over/under-frequency relays (and optional
/// voltage relays) do the tripping. TRIPPED is absorbing.
struct SupervisorState {
    enum class Mode { IDLE, ARMED, TRIPPED };
    Mode mode = Mode::IDLE;
    double armed_since = 0.0;
    double quiet_since = -1.0; // while ARMED: start of the current quiet spell
    std::optional<TripEvent> trip;
    double last_t = -1.0;
};

/// One supervisor update. Returns the phase-shift command (radians) for the
/// current controller.
inline double supervisor_step(SupervisorState& st, double f, double df_dt, double v_pu,
                              double t, const SmsParams& sms, const RelaySettings& relays) {
    if (t < st.last_t) throw std::invalid_argument("supervisor_step: time must not decrease");
    st.last_t = t;

    if (sms.mode == SmsMode::off) return 0.0;
    if (st.mode == SupervisorState::Mode::TRIPPED) return 0.0;

    std::optional<TripCause> cause = frequency_relay(f, relays);
    if (!cause) cause = voltage_relay(v_pu, relays);
    if (cause) {
        st.mode = SupervisorState::Mode::TRIPPED;
        st.trip = TripEvent{t, *cause};
        return 0.0;
    }

    if (sms.mode == SmsMode::always_on) return deg2rad(sms_phase(f, sms));

    // armed_by_rocof
    if (st.mode == SupervisorState::Mode::IDLE) {
        if (!rocof_relay(df_dt, v_pu, relays)) return 0.0;
        st.mode = SupervisorState::Mode::ARMED;
        st.armed_since = t;
        st.quiet_since = -1.0;
        return deg2rad(sms_phase(f, sms)); // injection starts with the arming step
    }

    // ARMED: release only after a sustained quiet spell with frequency in
    // band and the rocof estimate well below threshold.
    const bool quiet = std::abs(df_dt) < 0.5 * relays.alpha &&
                       f < relays.f_over && f > relays.f_under;
    if (quiet) {
        if (st.quiet_since < 0.0) st.quiet_since = t;
        if (t - st.quiet_since >= relays.disarm_hold) {
            st.mode = SupervisorState::Mode::IDLE;
            st.quiet_since = -1.0;
            return 0.0;
        }
    } else {
        st.quiet_since = -1.0;
    }
    return deg2rad(sms_phase(f, sms));
}

} // namespace islandguard

#endif // ISLANDGUARD_DETECTION_HPP
