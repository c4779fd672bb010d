#ifndef ISLANDGUARD_CONFIG_HPP
#define ISLANDGUARD_CONFIG_HPP

#include "islandguard/scenarios.hpp"

#include <cctype>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>

namespace islandguard {

/// Raised on malformed configs; message always names the offending key.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

inline std::string fmt9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

} // namespace detail

/// Flat dotted-key scenario configuration, one `key = value` pair per line,
/// `#` comments. Parsed strictly: unknown keys and malformed values are
/// rejected by key path.
class ScenarioConfig {
public:
    static ScenarioSpec parse(const std::string& text) {
        std::map<std::string, std::string> kv;
        std::istringstream in(text);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            line = detail::trim(line);
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
            const std::string key = detail::trim(line.substr(0, eq));
            const std::string val = detail::trim(line.substr(eq + 1));
            if (key.empty() || val.empty())
                throw ConfigError("config line " + std::to_string(lineno) + ": empty key or value");
            if (kv.count(key)) throw ConfigError(key + ": duplicate key");
            kv[key] = val;
        }
        return from_map(kv);
    }

    static std::string serialize(const ScenarioSpec& spec) {
        using detail::fmt9;
        std::ostringstream out;
        out << "id = " << spec.id << "\n";
        out << "grid.v_ll = " << fmt9(spec.grid.v_ll) << "\n";
        out << "grid.f_g = " << fmt9(spec.grid.f_g) << "\n";
        out << "grid.r_g = " << fmt9(spec.grid.r_g) << "\n";
        out << "grid.l_g = " << fmt9(spec.grid.l_g) << "\n";
        out << "load.r = " << fmt9(spec.load.r) << "\n";
        out << "load.l = " << fmt9(spec.load.l) << "\n";
        out << "load.c = " << fmt9(spec.load.c) << "\n";
        for (std::size_t k = 0; k < spec.dgs.size(); ++k) {
            const std::string p = "dg." + std::to_string(k) + ".";
            out << p << "p_rated = " << fmt9(spec.dgs[k].p_rated) << "\n";
            out << p << "i_qref = " << fmt9(spec.dgs[k].i_qref) << "\n";
            out << p << "l_filter = " << fmt9(spec.dgs[k].l_filter) << "\n";
            out << p << "ctrl_bandwidth_hz = " << fmt9(spec.dgs[k].ctrl_bandwidth_hz) << "\n";
            out << p << "ctrl_zeta = " << fmt9(spec.dgs[k].ctrl_zeta) << "\n";
        }
        for (std::size_t k = 0; k < spec.events.size(); ++k) {
            const std::string p = "events." + std::to_string(k) + ".";
            out << p << "t = " << fmt9(spec.events[k].t) << "\n";
            out << p << "kind = " << kind_name(spec.events[k].kind) << "\n";
            if (spec.events[k].kind == TimedEvent::Kind::connect_load) {
                out << p << "s_va = " << fmt9(spec.events[k].s_va) << "\n";
                out << p << "pf = " << fmt9(spec.events[k].pf) << "\n";
            }
        }
        out << "detection.mode = " << mode_name(spec.detection.sms.mode) << "\n";
        out << "detection.theta_m_deg = " << fmt9(spec.detection.sms.theta_m_deg) << "\n";
        out << "detection.f_m = " << fmt9(spec.detection.sms.f_m) << "\n";
        out << "detection.alpha = " << fmt9(spec.detection.relays.alpha) << "\n";
        out << "detection.beta = " << fmt9(spec.detection.relays.beta) << "\n";
        out << "detection.f_over = " << fmt9(spec.detection.relays.f_over) << "\n";
        out << "detection.f_under = " << fmt9(spec.detection.relays.f_under) << "\n";
        out << "detection.v_over = " << fmt9(spec.detection.relays.v_over) << "\n";
        out << "detection.v_under = " << fmt9(spec.detection.relays.v_under) << "\n";
        out << "detection.voltage_relays = "
            << (spec.detection.relays.voltage_relays_enabled ? "on" : "off") << "\n";
        out << "detection.max_clearing = " << fmt9(spec.detection.relays.max_clearing) << "\n";
        out << "detection.disarm_hold = " << fmt9(spec.detection.relays.disarm_hold) << "\n";
        out << "detection.rocof_window_cycles = " << fmt9(spec.detection.rocof.window_cycles) << "\n";
        out << "detection.rocof_lpf_hz = " << fmt9(spec.detection.rocof.lpf_cutoff_hz) << "\n";
        out << "detection.rocof_sample_interval = " << fmt9(spec.detection.rocof.sample_interval) << "\n";
        out << "detection.pll_natural_freq = " << fmt9(spec.detection.pll_natural_freq) << "\n";
        out << "detection.pll_window_cycles = " << fmt9(spec.detection.pll_window_cycles) << "\n";
        out << "solver.dt = " << fmt9(spec.solver.dt) << "\n";
        out << "solver.t_end = " << fmt9(spec.solver.t_end) << "\n";
        out << "solver.settle_time = " << fmt9(spec.solver.settle_time) << "\n";
        out << "solver.record_interval = " << fmt9(spec.solver.record_interval) << "\n";
        return out.str();
    }

private:
    static const char* kind_name(TimedEvent::Kind k) {
        switch (k) {
        case TimedEvent::Kind::island: return "island";
        case TimedEvent::Kind::connect_load: return "connect_load";
        case TimedEvent::Kind::disconnect_load: return "disconnect_load";
        }
        return "?";
    }

    static const char* mode_name(SmsMode m) {
        switch (m) {
        case SmsMode::off: return "off";
        case SmsMode::always_on: return "always_on";
        case SmsMode::armed_by_rocof: return "armed_by_rocof";
        }
        return "?";
    }

    static ScenarioSpec from_map(const std::map<std::string, std::string>& kv) {
        std::set<std::string> seen;
        auto has = [&](const std::string& k) { return kv.count(k) != 0; };
        auto raw = [&](const std::string& k) {
            seen.insert(k);
            return kv.at(k);
        };
        auto num = [&](const std::string& k, double dflt) {
            if (!has(k)) return dflt;
            const std::string v = raw(k);
            try {
                std::size_t pos = 0;
                const double d = std::stod(v, &pos);
                if (pos != v.size()) throw std::invalid_argument("");
                return d;
            } catch (...) {
                throw ConfigError(k + ": not a number: '" + v + "'");
            }
        };

        ScenarioSpec spec;
        spec.events.clear();
        spec.dgs.clear();

        if (has("id")) spec.id = raw("id");
        spec.grid.v_ll = num("grid.v_ll", spec.grid.v_ll);
        spec.grid.f_g = num("grid.f_g", spec.grid.f_g);
        spec.grid.r_g = num("grid.r_g", spec.grid.r_g);
        spec.grid.l_g = num("grid.l_g", spec.grid.l_g);

        const bool rlc = has("load.r") || has("load.l") || has("load.c");
        for (std::size_t k = 0;; ++k) {
            const std::string p = "dg." + std::to_string(k) + ".";
            if (!has(p + "p_rated") && !has(p + "l_filter")) break;
            DgSpec dg;
            dg.p_rated = num(p + "p_rated", dg.p_rated);
            dg.i_qref = num(p + "i_qref", dg.i_qref);
            dg.l_filter = num(p + "l_filter", dg.l_filter);
            dg.ctrl_bandwidth_hz = num(p + "ctrl_bandwidth_hz", dg.ctrl_bandwidth_hz);
            dg.ctrl_zeta = num(p + "ctrl_zeta", dg.ctrl_zeta);
            if (!(dg.p_rated >= 0.0)) throw ConfigError(p + "p_rated: must be >= 0");
            if (!(dg.l_filter > 0.0)) throw ConfigError(p + "l_filter: must be positive");
            spec.dgs.push_back(dg);
        }
        if (spec.dgs.empty()) spec.dgs.push_back(DgSpec{});

        // Three load forms: explicit R/L/C, absolute power with quality
        // factor, or percentages of the DG rating with an independent %Q
        // scaling of the inductive branch.
        const bool pwr = has("load.p");
        const bool pct = has("load.pct_p") || has("load.pct_q");
        if ((rlc && (pwr || pct)) || (pwr && pct))
            throw ConfigError("load.p: give only one of load.r/l/c, load.p/q_f, "
                              "or load.pct_p/pct_q/q_f");
        if (pwr || pct) {
            const double q_f = num("load.q_f", 1.77);
            if (!(q_f > 0.0)) throw ConfigError("load.q_f: must be positive");
            if (pwr) {
                const double p = num("load.p", 100e3);
                if (!(p > 0.0)) throw ConfigError("load.p: must be positive");
                spec.load = load_from_power_spec(p, q_f, spec.grid.v_ll, spec.grid.f_g);
            } else {
                double p_rated = 0.0;
                for (const auto& dg : spec.dgs) p_rated += dg.p_rated;
                const double pct_p = num("load.pct_p", 100.0);
                const double pct_q = num("load.pct_q", 100.0);
                if (!(pct_p > 0.0)) throw ConfigError("load.pct_p: must be positive");
                if (!(pct_q > 0.0)) throw ConfigError("load.pct_q: must be positive");
                spec.load = load_from_power_spec(p_rated, q_f, spec.grid.v_ll, spec.grid.f_g);
                spec.load = scale_active_power(spec.load, pct_p);
                spec.load = scale_reactive_power(spec.load, pct_q);
            }
        } else {
            if (has("load.q_f")) throw ConfigError("load.q_f: needs load.p or load.pct_p/pct_q");
            LoadParams dflt = suites::balanced_load();
            spec.load.r = num("load.r", dflt.r);
            spec.load.l = num("load.l", dflt.l);
            spec.load.c = num("load.c", dflt.c);
            if (!(spec.load.r > 0.0)) throw ConfigError("load.r: must be positive");
            if (!(spec.load.l > 0.0)) throw ConfigError("load.l: must be positive");
            if (!(spec.load.c > 0.0)) throw ConfigError("load.c: must be positive");
        }

        for (std::size_t k = 0;; ++k) {
            const std::string p = "events." + std::to_string(k) + ".";
            if (!has(p + "t")) break;
            TimedEvent ev;
            ev.t = num(p + "t", 0.0);
            if (!has(p + "kind")) throw ConfigError(p + "kind: missing");
            const std::string kind = raw(p + "kind");
            if (kind == "island") ev.kind = TimedEvent::Kind::island;
            else if (kind == "connect_load") ev.kind = TimedEvent::Kind::connect_load;
            else if (kind == "disconnect_load") ev.kind = TimedEvent::Kind::disconnect_load;
            else throw ConfigError(p + "kind: unknown event kind '" + kind + "'");
            ev.s_va = num(p + "s_va", 0.0);
            ev.pf = num(p + "pf", 1.0);
            spec.events.push_back(ev);
        }

        if (has("detection.mode")) {
            const std::string m = raw("detection.mode");
            if (m == "off") spec.detection.sms.mode = SmsMode::off;
            else if (m == "always_on") spec.detection.sms.mode = SmsMode::always_on;
            else if (m == "armed_by_rocof") spec.detection.sms.mode = SmsMode::armed_by_rocof;
            else throw ConfigError("detection.mode: unknown mode '" + m + "'");
        }
        spec.detection.sms.theta_m_deg = num("detection.theta_m_deg", spec.detection.sms.theta_m_deg);
        spec.detection.sms.f_m = num("detection.f_m", spec.detection.sms.f_m);
        spec.detection.sms.f_g = spec.grid.f_g;
        spec.detection.relays.alpha = num("detection.alpha", spec.detection.relays.alpha);
        spec.detection.relays.beta = num("detection.beta", spec.detection.relays.beta);
        spec.detection.relays.f_over = num("detection.f_over", spec.detection.relays.f_over);
        spec.detection.relays.f_under = num("detection.f_under", spec.detection.relays.f_under);
        spec.detection.relays.v_over = num("detection.v_over", spec.detection.relays.v_over);
        spec.detection.relays.v_under = num("detection.v_under", spec.detection.relays.v_under);
        if (has("detection.voltage_relays")) {
            const std::string v = raw("detection.voltage_relays");
            if (v == "on") spec.detection.relays.voltage_relays_enabled = true;
            else if (v == "off") spec.detection.relays.voltage_relays_enabled = false;
            else throw ConfigError("detection.voltage_relays: expected on or off");
        }
        spec.detection.relays.max_clearing = num("detection.max_clearing", spec.detection.relays.max_clearing);
        spec.detection.relays.disarm_hold = num("detection.disarm_hold", spec.detection.relays.disarm_hold);
        spec.detection.rocof.window_cycles = num("detection.rocof_window_cycles", spec.detection.rocof.window_cycles);
        spec.detection.rocof.lpf_cutoff_hz = num("detection.rocof_lpf_hz", spec.detection.rocof.lpf_cutoff_hz);
        spec.detection.rocof.sample_interval = num("detection.rocof_sample_interval", spec.detection.rocof.sample_interval);
        spec.detection.pll_natural_freq = num("detection.pll_natural_freq", spec.detection.pll_natural_freq);
        spec.detection.pll_window_cycles = num("detection.pll_window_cycles", spec.detection.pll_window_cycles);

        spec.solver.dt = num("solver.dt", spec.solver.dt);
        spec.solver.t_end = num("solver.t_end", spec.solver.t_end);
        spec.solver.settle_time = num("solver.settle_time", spec.solver.settle_time);
        spec.solver.record_interval = num("solver.record_interval", spec.solver.record_interval);
        if (!(spec.solver.dt >= 1e-6 && spec.solver.dt <= 2e-4))
            throw ConfigError("solver.dt: outside [1e-6, 2e-4] s");
        if (!(spec.solver.t_end > 0.0)) throw ConfigError("solver.t_end: must be positive");
        if (!(spec.solver.record_interval > 0.0)) throw ConfigError("solver.record_interval: must be positive");

        for (const auto& [k, v] : kv)
            if (!seen.count(k) && k != "id") throw ConfigError(k + ": unknown key");

        try {
            spec.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
        return spec;
    }
};

} // namespace islandguard

#endif // ISLANDGUARD_CONFIG_HPP
