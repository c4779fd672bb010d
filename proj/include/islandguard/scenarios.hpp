#ifndef ISLANDGUARD_SCENARIOS_HPP
#define ISLANDGUARD_SCENARIOS_HPP

#include "islandguard/controller.hpp"
#include "islandguard/detection.hpp"
#include "islandguard/estimation.hpp"
#include "islandguard/ndz.hpp"
#include "islandguard/plant.hpp"
#include "islandguard/signals.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <future>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace islandguard {

/// Parallel RLC load sized from active power and quality factor at the given
/// line-to-line voltage:
///   R = V^2 / P,   L = V^2 / (2 pi f Q_f P),   C = Q_f P / (2 pi f V^2)
inline LoadParams load_from_power_spec(double p, double q_f, double v_ll, double f) {
    if (!(p > 0.0 && q_f > 0.0 && v_ll > 0.0 && f > 0.0))
        throw std::invalid_argument("load_from_power_spec: all inputs must be positive");
    LoadParams load;
    load.r = v_ll * v_ll / p;
    load.l = v_ll * v_ll / (two_pi * f * q_f * p);
    load.c = q_f * p / (two_pi * f * v_ll * v_ll);
    return load;
}

/// Load active power scaled to pct% of nominal (R shrinks as load grows).
inline LoadParams scale_active_power(LoadParams load, double pct) {
    load.r /= pct / 100.0;
    return load;
}

/// Load reactive (inductive) power scaled to pct% of nominal; capacitance is
/// held at the balanced value.
inline LoadParams scale_reactive_power(LoadParams load, double pct) {
    load.l /= pct / 100.0;
    return load;
}

struct DgSpec {
    double p_rated = 100e3;     // W
    double i_qref = 0.0;        // A
    double l_filter = 2.1e-3;   // H
    double ctrl_bandwidth_hz = 500.0;
    double ctrl_zeta = 0.7;
};

struct TimedEvent {
    enum class Kind { island, connect_load, disconnect_load };
    double t = 0.0;
    Kind kind = Kind::island;
    double s_va = 0.0; // connect_load
    double pf = 1.0;   // connect_load; negative = leading
};

struct DetectionSettings {
    SmsParams sms;
    RelaySettings relays;
    RocofEstimator::Config rocof;
    double pll_natural_freq = 90.0; // rad/s
    double pll_window_cycles = 2.0;
};

struct SolverSettings {
    double dt = 50e-6;
    double t_end = 5.0;
    double settle_time = 1.0;       // run-in before t = 0
    double record_interval = 1e-3;
};

struct ScenarioSpec {
    std::string id = "scenario";
    GridParams grid;
    LoadParams load;
    std::vector<DgSpec> dgs{DgSpec{}};
    std::vector<TimedEvent> events;
    DetectionSettings detection;
    SolverSettings solver;

    void validate() const {
        grid.validate();
        load.validate();
        detection.sms.validate();
        detection.relays.validate();
        detection.rocof.validate();
        if (dgs.empty()) throw std::invalid_argument("ScenarioSpec: at least one DG required");
        if (!(solver.dt >= 1e-6 && solver.dt <= 2e-4))
            throw std::invalid_argument("ScenarioSpec: solver.dt outside [1e-6, 2e-4]");
        if (!(solver.t_end > 0.0)) throw std::invalid_argument("ScenarioSpec: solver.t_end must be positive");
        double prev = -1.0;
        for (const auto& ev : events) {
            if (ev.t < prev) throw std::invalid_argument("ScenarioSpec: events must be time-ordered");
            if (ev.t >= solver.t_end)
                throw std::invalid_argument("ScenarioSpec: t_end must exceed the last event");
            prev = ev.t;
        }
    }

    std::optional<double> island_time() const {
        for (const auto& ev : events)
            if (ev.kind == TimedEvent::Kind::island) return ev.t;
        return std::nullopt;
    }
};

struct TimeSeries {
    std::vector<double> t, va, vb, vc, ia, ib, ic;
    std::vector<double> f_est, dfdt, v_pu, theta_sms_deg;
    std::vector<int> mode, breaker, trip;
    std::size_t size() const { return t.size(); }
};

struct ScenarioResult {
    bool tripped = false;
    double t_trip = 0.0;
    TripCause cause = TripCause::over_f;
    double detection_latency = 0.0; // t_trip - island time
    double max_abs_rocof = 0.0;     // filtered, up to trip
    double f_min = 0.0, f_max = 0.0;
    double v_min = 0.0, v_max = 0.0; // pu, up to trip
    int armed_spells = 0;
    double longest_armed_spell = 0.0;
    bool over_modulated = false;
    bool numerics_ok = true;
    double t_last_valid = 0.0;
    std::string error;
    TimeSeries series;
};

/// Analytic verdict used as the expected outcome in suite reports: the
/// islanded system trips when the reachable SMS/load equilibrium leaves the
/// relay band (or no equilibrium exists), or when the islanded voltage
/// level breaches an enabled voltage relay.
inline bool expected_trip(const ScenarioSpec& spec) {
    if (!spec.island_time()) return false;
    if (spec.detection.sms.mode == SmsMode::off) return false;

    if (spec.detection.relays.voltage_relays_enabled) {
        double p_total = 0.0;
        for (const auto& dg : spec.dgs) p_total += dg.p_rated;
        const double i_rated = 2.0 * p_total / (3.0 * spec.grid.phase_peak());
        const double v_island_pu = spec.load.r * i_rated / spec.grid.phase_peak();
        if (v_island_pu > spec.detection.relays.v_over ||
            v_island_pu < spec.detection.relays.v_under)
            return true;
    }

    const Band band{spec.detection.relays.f_under, spec.detection.relays.f_over};
    const IslandEquilibrium eq =
        island_equilibrium(spec.load.q_f(), spec.load.f_0(), spec.detection.sms);
    return eq.unbounded || !eq.stable || !band.contains(eq.f_island);
}

/// Full time-domain run: steady-state init, settle, then the event schedule.
inline ScenarioResult run_scenario(const ScenarioSpec& spec) {
    spec.validate();

    const double dt = spec.solver.dt;
    const double v_rated = spec.grid.phase_peak();

    std::vector<double> l_filters, powers;
    for (const auto& dg : spec.dgs) {
        l_filters.push_back(dg.l_filter);
        powers.push_back(dg.p_rated);
    }

    const SteadyStateInit init = init_steady_state(spec.grid, spec.load, l_filters, powers);

    Plant plant(spec.grid, spec.load, l_filters);
    plant.state() = init.state;

    struct DgStack {
        CurrentController ctrl;
        Pll pll;
        RocofEstimator rocof;
        SupervisorState sup;
        CurrentRefs refs;
    };

    std::vector<DgStack> stacks;
    for (std::size_t k = 0; k < spec.dgs.size(); ++k) {
        const auto& dg = spec.dgs[k];
        Pll::Config pcfg;
        pcfg.f_nom = spec.grid.f_g;
        pcfg.v_rated_peak = v_rated;
        pcfg.natural_freq = spec.detection.pll_natural_freq;
        pcfg.meas_window_cycles = spec.detection.pll_window_cycles;

        RocofEstimator::Config rcfg = spec.detection.rocof;
        rcfg.f_nom = spec.grid.f_g;

        DgStack st{
            CurrentController(CurrentController::Gains::for_bandwidth(
                                  dg.l_filter, dg.ctrl_bandwidth_hz, dg.ctrl_zeta),
                              dg.l_filter),
            Pll(pcfg), RocofEstimator(rcfg), SupervisorState{}, CurrentRefs{}};
        st.refs.i_dref = 2.0 * dg.p_rated / (3.0 * v_rated);
        st.refs.i_qref = dg.i_qref;
        st.pll.lock_to(init.v_pcc_angle);
        stacks.push_back(std::move(st));
    }

    ScenarioResult res;
    res.f_min = spec.grid.f_g;
    res.f_max = spec.grid.f_g;
    res.v_min = 1.0;
    res.v_max = 1.0;

    const long settle_steps = std::lround(spec.solver.settle_time / dt);
    const long run_steps = std::lround(spec.solver.t_end / dt);
    const long record_every = std::max(1L, std::lround(spec.solver.record_interval / dt));

    std::size_t next_event = 0;
    std::optional<double> island_t;
    bool was_armed = false;
    double armed_start = 0.0;

    std::vector<ThreePhase> v_cmds(spec.dgs.size());
    std::vector<ThreePhase> v_cmds_next(spec.dgs.size());

    auto trip_of = [&](const DgStack& s) { return s.sup.trip; };

    try {
        for (long n = 0; n < settle_steps + run_steps; ++n) {
            const bool settling = n < settle_steps;
            const double t = (static_cast<double>(n) - static_cast<double>(settle_steps)) * dt;

            if (!settling) {
                while (next_event < spec.events.size() &&
                       t >= spec.events[next_event].t - 0.5 * dt) {
                    const auto& ev = spec.events[next_event];
                    PlantEvent pe;
                    switch (ev.kind) {
                    case TimedEvent::Kind::island:
                        pe.kind = PlantEvent::Kind::island;
                        island_t = ev.t;
                        break;
                    case TimedEvent::Kind::connect_load:
                        pe.kind = PlantEvent::Kind::connect_load;
                        pe.aux = AuxLoadParams::from_power(ev.s_va, ev.pf, spec.grid.v_ll,
                                                           spec.grid.f_g);
                        break;
                    case TimedEvent::Kind::disconnect_load:
                        pe.kind = PlantEvent::Kind::disconnect_load;
                        break;
                    }
                    plant.apply_event(pe);
                    ++next_event;
                }
            }

            const ThreePhase v_pcc = plant.state().v_pcc;

            for (std::size_t k = 0; k < stacks.size(); ++k) {
                auto& st = stacks[k];
                st.pll.step(v_pcc, dt);
                st.rocof.step(st.pll.f_est(), st.pll.v_pu(), dt);

                double theta_f = 0.0;
                if (!settling) {
                    theta_f = supervisor_step(st.sup, st.pll.f_est(), st.rocof.df_dt_filtered(),
                                              st.pll.v_pu(), t, spec.detection.sms,
                                              spec.detection.relays);
                    if (st.sup.trip) st.refs.i_dref = 0.0;
                }
                st.refs.theta_f = theta_f;

                // Current and voltage must be parked in the same frame; the
                // PLL reports the angle its sample was referred to.
                const DqVector meas_v = st.pll.v_dq();
                const DqVector meas_i = park(plant.state().i_inv[k], meas_v.theta);
                const double omega = two_pi * st.pll.f_est();
                const auto out = st.ctrl.step(meas_i, meas_v, st.refs, omega, dt);
                if (out.mod.over_modulated && !settling) res.over_modulated = true;

                // The command rotates through the step; give the integrator
                // both endpoint samples.
                v_cmds[k] = inverse_park({out.v_sd, out.v_sq, meas_v.theta});
                v_cmds_next[k] = inverse_park({out.v_sd, out.v_sq, meas_v.theta + omega * dt});
            }

            plant.step(v_cmds, v_cmds_next, dt);
            res.t_last_valid = t + dt;

            if (settling) continue;

            const auto& lead = stacks.front();
            const bool any_trip_now =
                std::any_of(stacks.begin(), stacks.end(),
                            [&](const DgStack& s) { return trip_of(s).has_value(); });

            if (!res.tripped) {
                res.f_min = std::min(res.f_min, lead.pll.f_est());
                res.f_max = std::max(res.f_max, lead.pll.f_est());
                res.v_min = std::min(res.v_min, lead.pll.v_pu());
                res.v_max = std::max(res.v_max, lead.pll.v_pu());
                res.max_abs_rocof = std::max(res.max_abs_rocof,
                                             std::abs(lead.rocof.df_dt_filtered()));
            }
            if (any_trip_now && !res.tripped) {
                res.tripped = true;
                double first = spec.solver.t_end;
                for (const auto& s : stacks)
                    if (trip_of(s) && trip_of(s)->t_trip < first) {
                        first = trip_of(s)->t_trip;
                        res.cause = trip_of(s)->cause;
                    }
                res.t_trip = first;
                if (island_t) res.detection_latency = res.t_trip - *island_t;
            }

            const bool armed_now = lead.sup.mode == SupervisorState::Mode::ARMED;
            if (armed_now && !was_armed) {
                ++res.armed_spells;
                armed_start = t;
            }
            if (armed_now)
                res.longest_armed_spell = std::max(res.longest_armed_spell, t - armed_start);
            was_armed = armed_now;

            if ((n - settle_steps) % record_every == 0) {
                auto& s = res.series;
                const ThreePhase itot = plant.state().i_inv_total();
                s.t.push_back(t);
                s.va.push_back(v_pcc.a);
                s.vb.push_back(v_pcc.b);
                s.vc.push_back(v_pcc.c);
                s.ia.push_back(itot.a);
                s.ib.push_back(itot.b);
                s.ic.push_back(itot.c);
                s.f_est.push_back(lead.pll.f_est());
                s.dfdt.push_back(lead.rocof.df_dt_filtered());
                s.v_pu.push_back(lead.pll.v_pu());
                s.theta_sms_deg.push_back(rad2deg(lead.refs.theta_f));
                s.mode.push_back(static_cast<int>(lead.sup.mode));
                s.breaker.push_back(plant.state().breaker_closed ? 1 : 0);
                s.trip.push_back(res.tripped ? 1 : 0);
            }

            // Steady-state init check at the end of the run-in.
            if (n == settle_steps) {
                if (std::abs(lead.pll.f_est() - spec.grid.f_g) > 0.02 ||
                    std::abs(lead.pll.v_pu() - 1.0) > 0.01)
                    throw std::runtime_error("run_scenario: start-up transient did not converge");
            }
        }
    } catch (const std::runtime_error& e) {
        res.numerics_ok = false;
        res.error = e.what();
    }

    return res;
}

// ---------------------------------------------------------------------------
// Suite construction
// ---------------------------------------------------------------------------

struct SuiteOptions {
    std::optional<double> theta_m_deg;
    std::optional<double> f_m;
    std::optional<double> alpha;
    std::optional<double> beta;
    std::optional<SmsMode> mode;
    std::optional<double> dt;
};

namespace suites {

inline GridParams reference_grid() { return GridParams{480.0, 60.0, 0.012, 0.3056e-3}; }
inline DgSpec reference_dg() { return DgSpec{100e3, 0.0, 2.1e-3, 500.0, 0.7}; }

/// Reference test-matrix values. The suites carry these verbatim: the rounded
/// L and C leave the balanced rows resonant a few hundredths of a hertz off
/// nominal, which is the reactive residue a matched island really has.
/// (Sizing loads from the closed-form expressions instead puts resonance at
/// exactly the grid frequency and the islanding transient vanishes
/// identically.)
inline LoadParams balanced_load() { return LoadParams{2.304, 0.00345, 2037e-6}; }

/// Detection profile used while hunting islands: SMS at 25 degrees peaking
/// 2 Hz above nominal, ROCOF arming threshold at the bottom of the relay's
/// adjustment range, and a one-cycle frequency measurement so the small
/// phase jump of a closely matched island still shows up in df/dt.
inline DetectionSettings hybrid_islanding_profile() {
    DetectionSettings d;
    d.sms = SmsParams{25.0, 62.0, 60.0, SmsMode::armed_by_rocof};
    d.relays.alpha = 0.1;
    d.rocof.window_cycles = 2.0;
    d.pll_window_cycles = 1.0;
    return d;
}

/// Normal-operation profile: the ROCOF threshold sits at the top of the
/// range with long measurement windows, riding through switching events.
inline DetectionSettings normal_operation_profile() {
    DetectionSettings d;
    d.sms = SmsParams{25.0, 62.0, 60.0, SmsMode::armed_by_rocof};
    d.relays.alpha = 1.2;
    d.rocof.window_cycles = 12.0;
    d.pll_window_cycles = 3.0;
    return d;
}

/// Standalone SMS baseline: a gentler curve that peaks far from nominal,
/// representative of designs that must stay on all the time.
inline DetectionSettings sms_alone_profile(double theta_m_deg = 15.0) {
    DetectionSettings d;
    d.sms = SmsParams{theta_m_deg, 67.0, 60.0, SmsMode::always_on};
    d.relays.alpha = 1.2;
    d.rocof.window_cycles = 4.0;
    return d;
}

} // namespace suites

inline std::vector<ScenarioSpec> build_suite(const std::string& name) {
    using K = TimedEvent::Kind;
    std::vector<ScenarioSpec> specs;

    auto base = [&](const std::string& id) {
        ScenarioSpec s;
        s.id = id;
        s.grid = suites::reference_grid();
        s.load = suites::balanced_load();
        s.dgs = {suites::reference_dg()};
        s.detection = suites::hybrid_islanding_profile();
        s.solver.t_end = 5.0;
        return s;
    };
    auto island_at_2s = [](ScenarioSpec& s) {
        s.events.push_back(TimedEvent{2.0, K::island, 0.0, 1.0});
    };

    if (name == "ul1741_p") {
        // Active-power mismatch rows: reference resistances, reactive
        // elements at the balanced values. The islanded voltage scales with
        // the load resistance, so the voltage relays carry the mismatched
        // cases (ROCOF arming is voltage-blocked below beta on the 125
        // percent row).
        struct PRow { int pct; double r; };
        for (const PRow row : {PRow{100, 2.304}, PRow{50, 4.603}, PRow{125, 1.841}}) {
            ScenarioSpec s = base("ul1741_p_" + std::to_string(row.pct));
            s.load = suites::balanced_load();
            s.load.r = row.r;
            s.detection.relays.voltage_relays_enabled = true;
            island_at_2s(s);
            specs.push_back(std::move(s));
        }
    } else if (name == "ul1741_q") {
        // Reactive-power mismatch rows: reference inductance column,
        // capacitance held at the balanced value.
        struct QRow { int pct; double l; };
        for (const QRow row : {QRow{105, 0.003278}, QRow{102, 0.003381}, QRow{101, 0.003419},
                               QRow{100, 0.00345}, QRow{99, 0.003488}, QRow{98, 0.003519},
                               QRow{95, 0.003623}}) {
            ScenarioSpec s = base("ul1741_q_" + std::to_string(row.pct));
            s.load = suites::balanced_load();
            s.load.l = row.l;
            island_at_2s(s);
            specs.push_back(std::move(s));
        }
    } else if (name == "qf_sweep") {
        // Quality-factor rows: reference L and C pairs at constant R.
        struct QfRow { double q_f, l, c_uf; };
        for (const QfRow row : {QfRow{0.5, 0.0122, 575.4}, QfRow{1.0, 0.0061, 1150.0},
                                QfRow{1.77, 0.00345, 2037.0}, QfRow{3.0, 0.00203, 3452.0},
                                QfRow{4.21, 0.00145, 4850.0}, QfRow{6.38, 0.000957, 7350.0},
                                QfRow{8.1, 0.000754, 9330.0}}) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "qf_sweep_%.2f", row.q_f);
            ScenarioSpec s = base(buf);
            s.load = LoadParams{2.304, row.l, row.c_uf * 1e-6};
            island_at_2s(s);
            specs.push_back(std::move(s));
        }
    } else if (name == "load_switching") {
        struct Case { const char* id; double pf; };
        for (const Case& c : {Case{"load_switching_lead", -0.8},
                              Case{"load_switching_unity", 1.0},
                              Case{"load_switching_lag", 0.8}}) {
            ScenarioSpec s = base(c.id);
            s.detection = suites::normal_operation_profile();
            s.events.push_back(TimedEvent{2.0, K::connect_load, 100e3, c.pf});
            s.events.push_back(TimedEvent{3.0, K::disconnect_load, 0.0, 1.0});
            specs.push_back(std::move(s));
        }
    } else if (name == "multi_dg") {
        ScenarioSpec s = base("multi_dg_matched");
        DgSpec half = suites::reference_dg();
        half.p_rated = 50e3;
        s.dgs = {half, half};
        island_at_2s(s);
        specs.push_back(std::move(s));
    } else {
        throw std::invalid_argument("build_suite: unknown suite '" + name + "'");
    }
    return specs;
}

/// CLI-style overrides. Switching a suite to always_on without an explicit
/// f_m swaps in the standalone-SMS curve, since a permanently active
/// injection is designed with a different slope than an armed one.
inline void apply_overrides(std::vector<ScenarioSpec>& specs, const SuiteOptions& opt) {
    for (auto& s : specs) {
        if (opt.mode) {
            s.detection.sms.mode = *opt.mode;
            if (*opt.mode == SmsMode::always_on && !opt.f_m)
                s.detection.sms.f_m = suites::sms_alone_profile().sms.f_m;
            if (*opt.mode == SmsMode::always_on || *opt.mode == SmsMode::off) {
                // Observation window for non-detection claims.
                bool has_island = s.island_time().has_value();
                if (has_island) s.solver.t_end = std::max(s.solver.t_end, 12.0);
            }
        }
        if (opt.theta_m_deg) s.detection.sms.theta_m_deg = *opt.theta_m_deg;
        if (opt.f_m) s.detection.sms.f_m = *opt.f_m;
        if (opt.alpha) s.detection.relays.alpha = *opt.alpha;
        if (opt.beta) s.detection.relays.beta = *opt.beta;
        if (opt.dt) s.solver.dt = *opt.dt;
    }
}

struct CaseReport {
    std::string id;
    bool expected_trip = false;
    bool observed_trip = false;
    double detection_latency = 0.0;
    std::string cause;
    bool pass = false;
};

struct RunReport {
    std::string suite;
    std::vector<CaseReport> cases;
    bool suite_pass = true;
};

/// Runs every case of a suite and grades it against the analytic verdict
/// (and the clearing-time bound when a trip is expected). Cases are
/// independent, so they run concurrently and merge by index.
inline RunReport run_suite(const std::string& name, const std::vector<ScenarioSpec>& specs,
                           std::vector<ScenarioResult>* results_out = nullptr) {
    std::vector<std::future<ScenarioResult>> futures;
    futures.reserve(specs.size());
    for (const auto& spec : specs)
        futures.push_back(std::async(std::launch::async, [&spec] { return run_scenario(spec); }));

    RunReport report;
    report.suite = name;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const ScenarioResult r = futures[i].get();
        const auto& spec = specs[i];
        CaseReport c;
        c.id = spec.id;
        c.expected_trip = expected_trip(spec);
        c.observed_trip = r.tripped;
        c.detection_latency = r.detection_latency;
        c.cause = r.tripped ? to_string(r.cause) : "none";
        c.pass = r.numerics_ok && c.expected_trip == c.observed_trip;
        if (c.pass && r.tripped && spec.island_time())
            c.pass = r.detection_latency <= spec.detection.relays.max_clearing;
        report.cases.push_back(c);
        report.suite_pass = report.suite_pass && c.pass;
        if (results_out) results_out->push_back(r);
    }
    return report;
}

} // namespace islandguard

#endif // ISLANDGUARD_SCENARIOS_HPP
