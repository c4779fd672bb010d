#ifndef ISLANDGUARD_IO_HPP
#define ISLANDGUARD_IO_HPP

#include "islandguard/ndz.hpp"
#include "islandguard/scenarios.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>

namespace islandguard {

/// All numeric output uses 9 significant digits so files diff cleanly
/// across runs and platforms.
inline std::string fmt9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

inline constexpr const char* series_header =
    "t,va,vb,vc,ia,ib,ic,f_est,dfdt,v_pu,theta_sms_deg,mode,breaker,trip";

inline void write_series_csv(const std::string& path, const TimeSeries& s) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << series_header << "\n";
    for (std::size_t i = 0; i < s.size(); ++i) {
        out << fmt9(s.t[i]) << ',' << fmt9(s.va[i]) << ',' << fmt9(s.vb[i]) << ','
            << fmt9(s.vc[i]) << ',' << fmt9(s.ia[i]) << ',' << fmt9(s.ib[i]) << ','
            << fmt9(s.ic[i]) << ',' << fmt9(s.f_est[i]) << ',' << fmt9(s.dfdt[i]) << ','
            << fmt9(s.v_pu[i]) << ',' << fmt9(s.theta_sms_deg[i]) << ',' << s.mode[i] << ','
            << s.breaker[i] << ',' << s.trip[i] << "\n";
    }
}

inline void write_summary(const std::string& path, const ScenarioSpec& spec,
                          const ScenarioResult& r) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "case: " << spec.id << "\n";
    out << "tripped: " << (r.tripped ? "yes" : "no") << "\n";
    if (r.tripped) {
        out << "t_trip: " << fmt9(r.t_trip) << "\n";
        out << "cause: " << to_string(r.cause) << "\n";
        if (spec.island_time())
            out << "detection_latency: " << fmt9(r.detection_latency) << "\n";
    }
    out << "f_min: " << fmt9(r.f_min) << "\n";
    out << "f_max: " << fmt9(r.f_max) << "\n";
    out << "v_min_pu: " << fmt9(r.v_min) << "\n";
    out << "v_max_pu: " << fmt9(r.v_max) << "\n";
    out << "max_abs_rocof: " << fmt9(r.max_abs_rocof) << "\n";
    out << "armed_spells: " << r.armed_spells << "\n";
    out << "longest_armed_spell: " << fmt9(r.longest_armed_spell) << "\n";
    out << "over_modulated: " << (r.over_modulated ? "yes" : "no") << "\n";
    out << "numerics_ok: " << (r.numerics_ok ? "yes" : "no") << "\n";
    if (!r.error.empty()) out << "error: " << r.error << " (last valid t = " << fmt9(r.t_last_valid) << ")\n";
}

inline void write_ndz_csv(const std::string& path, const NdzMap& map) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "q_f,f_0,f_island,inside_ndz\n";
    for (const auto& p : map.points)
        out << fmt9(p.q_f) << ',' << fmt9(p.f_0) << ',' << fmt9(p.f_island) << ','
            << (p.inside_ndz ? 1 : 0) << "\n";
}

inline void write_ndz_boundary(const std::string& path, const NdzMap& map) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "q_f,f_0\n";
    for (const auto& [q, f0] : map.boundary) out << fmt9(q) << ',' << fmt9(f0) << "\n";
}

inline void write_report(const std::string& path, const RunReport& rep) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "suite: " << rep.suite << "\n";
    out << "case,expected,observed,cause,latency,pass\n";
    for (const auto& c : rep.cases)
        out << c.id << ',' << (c.expected_trip ? "trip" : "clear") << ','
            << (c.observed_trip ? "trip" : "clear") << ',' << c.cause << ','
            << fmt9(c.detection_latency) << ',' << (c.pass ? "pass" : "FAIL") << "\n";
    out << "suite_pass: " << (rep.suite_pass ? "yes" : "no") << "\n";
}

} // namespace islandguard

#endif // ISLANDGUARD_IO_HPP
