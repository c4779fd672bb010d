#ifndef ISLANDGUARD_SIGNALS_HPP
#define ISLANDGUARD_SIGNALS_HPP

#include <cmath>
#include <stdexcept>

namespace islandguard {

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 2.0 * pi;
inline constexpr double deg_per_rad = 180.0 / pi;
inline constexpr double rad_per_deg = pi / 180.0;

inline constexpr double deg2rad(double deg) { return deg * rad_per_deg; }
inline constexpr double rad2deg(double rad) { return rad * deg_per_rad; }

/// Instantaneous per-phase values (volts or amperes).
struct ThreePhase {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;

    ThreePhase operator+(const ThreePhase& o) const { return {a + o.a, b + o.b, c + o.c}; }
    ThreePhase operator-(const ThreePhase& o) const { return {a - o.a, b - o.b, c - o.c}; }
    ThreePhase operator*(double s) const { return {a * s, b * s, c * s}; }
};

/// Rotating-frame pair plus the angle it was referred to.
/// Convention: amplitude-invariant, q axis 90 degrees ahead of d, so a
/// balanced set with phase-a angle phi maps to d = A*cos(phi - theta),
/// q = A*sin(phi - theta). A current rotated by +delta in this plane leads
/// the original by delta in time, and the cross-coupling terms of a series
/// inductance come out as v_d -> -L*w*i_q, v_q -> +L*w*i_d.
struct DqVector {
    double d = 0.0;
    double q = 0.0;
    double theta = 0.0;

    double magnitude() const { return std::hypot(d, q); }
};

/// Balanced three-phase set: a = A*cos(2*pi*f*t + phase), b and c shifted
/// by -120/+120 degrees.
inline ThreePhase synth_balanced(double amplitude, double frequency, double phase, double t) {
    if (!std::isfinite(amplitude) || !std::isfinite(frequency) || !std::isfinite(phase) ||
        !std::isfinite(t)) {
        throw std::invalid_argument("synth_balanced: non-finite input");
    }
    if (frequency <= 0.0) {
        throw std::invalid_argument("synth_balanced: frequency must be positive");
    }
    const double ang = two_pi * frequency * t + phase;
    return {amplitude * std::cos(ang),
            amplitude * std::cos(ang - two_pi / 3.0),
            amplitude * std::cos(ang + two_pi / 3.0)};
}

/// Amplitude-invariant Park transform of a balanced (zero-sequence-free) set.
inline DqVector park(const ThreePhase& x, double theta) {
    const double ct = std::cos(theta);
    const double st = std::sin(theta);
    const double cb = std::cos(theta - two_pi / 3.0);
    const double sb = std::sin(theta - two_pi / 3.0);
    const double cc = std::cos(theta + two_pi / 3.0);
    const double sc = std::sin(theta + two_pi / 3.0);
    DqVector v;
    v.d = (2.0 / 3.0) * (x.a * ct + x.b * cb + x.c * cc);
    v.q = -(2.0 / 3.0) * (x.a * st + x.b * sb + x.c * sc);
    v.theta = theta;
    return v;
}

inline ThreePhase inverse_park(const DqVector& v) {
    const double ct = std::cos(v.theta);
    const double st = std::sin(v.theta);
    const double cb = std::cos(v.theta - two_pi / 3.0);
    const double sb = std::sin(v.theta - two_pi / 3.0);
    const double cc = std::cos(v.theta + two_pi / 3.0);
    const double sc = std::sin(v.theta + two_pi / 3.0);
    return {v.d * ct - v.q * st,
            v.d * cb - v.q * sb,
            v.d * cc - v.q * sc};
}

/// Instantaneous three-phase power from per-phase samples.
inline double instantaneous_power(const ThreePhase& v, const ThreePhase& i) {
    return v.a * i.a + v.b * i.b + v.c * i.c;
}

/// Same quantity in the rotating frame (amplitude-invariant scaling).
inline double instantaneous_power(const DqVector& v, const DqVector& i) {
    return 1.5 * (v.d * i.d + v.q * i.q);
}

} // namespace islandguard

#endif // ISLANDGUARD_SIGNALS_HPP
