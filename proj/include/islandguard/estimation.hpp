#ifndef ISLANDGUARD_ESTIMATION_HPP
#define ISLANDGUARD_ESTIMATION_HPP

#include "islandguard/signals.hpp"

#include <cmath>
#include <cstddef>
#include <deque>
#include <stdexcept>
#include <vector>

namespace islandguard {

/// Synchronous-reference-frame PLL. The PI loop drives the q component of
/// the PCC voltage to zero; the reported frequency is the mean phase
/// velocity over a short trailing window, which is what a per-cycle
/// frequency measurement sees and is far less jumpy than the raw loop
/// correction during phase steps.
class Pll {
public:
    struct Config {
        double f_nom = 60.0;
        double v_rated_peak = 391.918; // 480 V line-to-line
        double natural_freq = 90.0;    // rad/s, loop pole pair
        double zeta = 1.0;
        double meas_window_cycles = 2.0;
        double k_p() const { return 2.0 * zeta * natural_freq; }
        double k_i() const { return natural_freq * natural_freq; }
    };

    Pll() : Pll(Config()) {}
    explicit Pll(Config cfg) : cfg_(cfg) {
        theta_ = 0.0;
        f_est_ = cfg_.f_nom;
    }

    /// Initialize locked onto a known phase (used when starting a
    /// simulation from a phasor solution).
    void lock_to(double theta0) {
        theta_ = theta0;
        theta_meas_ = theta0;
        loop_integral_ = 0.0;
        f_est_ = cfg_.f_nom;
        history_.clear();
        unlock_time_ = 0.0;
        t_ = 0.0;
    }

    void step(const ThreePhase& v_pcc, double dt) {
        if (!(dt > 0.0)) throw std::invalid_argument("Pll::step: dt must be positive");
        theta_meas_ = theta_;
        const DqVector v = park(v_pcc, theta_meas_);
        v_d_ = v.d;
        v_q_ = v.q;
        v_mag_ = v.magnitude();

        const double floor_mag = 0.02 * cfg_.v_rated_peak;
        const double err = v_q_ / std::max(v_mag_, floor_mag);

        loop_integral_ += cfg_.k_i() * err * dt;
        const double omega = two_pi * cfg_.f_nom + cfg_.k_p() * err + loop_integral_;
        theta_ += omega * dt;
        t_ += dt;

        history_.push_back({t_, theta_});
        const double span = cfg_.meas_window_cycles / cfg_.f_nom;
        while (history_.size() > 2 && t_ - history_[1].t >= span) history_.pop_front();
        const auto& oldest = history_.front();
        if (t_ > oldest.t)
            f_est_ = (theta_ - oldest.theta) / (two_pi * (t_ - oldest.t));

        // Loss of lock: vanished input or persistent large q residual.
        const bool bad = v_mag_ < floor_mag || std::abs(v_q_) > 0.5 * std::abs(v_d_);
        unlock_time_ = bad ? unlock_time_ + dt : 0.0;
    }

    double theta() const { return theta_; }           // for the next sample
    double theta_meas() const { return theta_meas_; } // angle of this sample's dq frame
    double f_est() const { return f_est_; }
    double loop_integral() const { return loop_integral_; }
    double v_mag() const { return v_mag_; }
    double v_pu() const { return v_mag_ / cfg_.v_rated_peak; }
    DqVector v_dq() const { return {v_d_, v_q_, theta_meas_}; }
    bool lock_lost() const { return unlock_time_ > 5.0 / cfg_.f_nom; }
    bool f_out_of_range() const { return f_est_ < 40.0 || f_est_ > 80.0; }
    const Config& config() const { return cfg_; }

private:
    struct Sample { double t; double theta; };

    Config cfg_;
    double theta_ = 0.0;
    double theta_meas_ = 0.0;
    double loop_integral_ = 0.0;
    double f_est_ = 0.0;
    double v_d_ = 0.0, v_q_ = 0.0, v_mag_ = 0.0;
    double unlock_time_ = 0.0;
    double t_ = 0.0;
    std::deque<Sample> history_;
};

/// Rate-of-change-of-frequency estimator: least-squares slope of the
/// frequency samples over a trailing window, smoothed by a first-order
/// low-pass. Frequency is sampled at a fixed interval rather than every
/// solver step.
class RocofEstimator {
public:
    struct Config {
        double window_cycles = 4.0;    // of f_nom, must stay within [2, 50]
        double f_nom = 60.0;
        double lpf_cutoff_hz = 10.0;
        double sample_interval = 1e-3; // s

        void validate() const {
            if (window_cycles < 2.0 || window_cycles > 50.0)
                throw std::invalid_argument("RocofEstimator: window must span 2-50 cycles");
            if (!(lpf_cutoff_hz > 0.0) || !(sample_interval > 0.0))
                throw std::invalid_argument("RocofEstimator: bad filter settings");
        }
    };

    RocofEstimator() : RocofEstimator(Config()) {}
    explicit RocofEstimator(Config cfg) : cfg_(cfg) {
        cfg_.validate();
        lpf_alpha_ = 1.0 - std::exp(-two_pi * cfg_.lpf_cutoff_hz * cfg_.sample_interval);
    }

    void step(double f_est, double v_pcc_pu, double dt) {
        if (!(dt > 0.0)) throw std::invalid_argument("RocofEstimator::step: dt must be positive");
        v_pu_ = v_pcc_pu;
        t_ += dt;
        accum_ += dt;
        if (accum_ + 1e-12 < cfg_.sample_interval) return;
        accum_ = 0.0;

        samples_.push_back({t_, f_est});
        const double span = cfg_.window_cycles / cfg_.f_nom;
        while (samples_.size() > 2 && t_ - samples_[1].t >= span) samples_.pop_front();

        df_dt_raw_ = regression_slope();
        df_dt_filtered_ += lpf_alpha_ * (df_dt_raw_ - df_dt_filtered_);
    }

    double df_dt_filtered() const { return df_dt_filtered_; }
    double df_dt_raw() const { return df_dt_raw_; }
    double v_pu() const { return v_pu_; }
    const Config& config() const { return cfg_; }

private:
    struct Sample { double t; double f; };

    double regression_slope() const {
        const std::size_t n = samples_.size();
        if (n < 2) return 0.0;
        double mt = 0.0, mf = 0.0;
        for (const auto& s : samples_) { mt += s.t; mf += s.f; }
        mt /= static_cast<double>(n);
        mf /= static_cast<double>(n);
        double num = 0.0, den = 0.0;
        for (const auto& s : samples_) {
            const double dt_c = s.t - mt;
            num += dt_c * (s.f - mf);
            den += dt_c * dt_c;
        }
        return den > 0.0 ? num / den : 0.0;
    }

    Config cfg_;
    double lpf_alpha_ = 0.0;
    double t_ = 0.0;
    double accum_ = 0.0;
    double df_dt_raw_ = 0.0;
    double df_dt_filtered_ = 0.0;
    double v_pu_ = 0.0;
    std::deque<Sample> samples_;
};

} // namespace islandguard

#endif // ISLANDGUARD_ESTIMATION_HPP
