// Command-line front end: single scenario runs, the standard test suites,
// and NDZ map generation. Outputs are plain CSV and text reports.

#include "islandguard/islandguard.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace islandguard;

namespace {

struct CommonOptions {
    std::string out_root;
    std::optional<double> dt;
    std::optional<double> theta_m;
    std::optional<double> f_m;
    std::optional<double> alpha;
    std::optional<double> beta;
    std::optional<std::string> mode;
};

std::string default_out_root() {
    if (const char* env = std::getenv("ISLANDGUARD_OUT")) return env;
    return "out";
}

SmsMode parse_mode(const std::string& m) {
    if (m == "off") return SmsMode::off;
    if (m == "always_on") return SmsMode::always_on;
    if (m == "armed_by_rocof") return SmsMode::armed_by_rocof;
    throw CLI::ValidationError("--mode", "expected off|always_on|armed_by_rocof");
}

SuiteOptions to_suite_options(const CommonOptions& c) {
    SuiteOptions o;
    o.dt = c.dt;
    o.theta_m_deg = c.theta_m;
    o.f_m = c.f_m;
    o.alpha = c.alpha;
    o.beta = c.beta;
    if (c.mode) o.mode = parse_mode(*c.mode);
    return o;
}

void add_common(CLI::App* cmd, CommonOptions& c) {
    cmd->add_option("--out", c.out_root, "Output directory (default $ISLANDGUARD_OUT or ./out)");
    cmd->add_option("--dt", [&c](const CLI::results_t& r) { c.dt = std::stod(r[0]); return true; },
                    "Solver step, seconds");
    cmd->add_option("--theta-m", [&c](const CLI::results_t& r) { c.theta_m = std::stod(r[0]); return true; },
                    "SMS maximum phase shift, degrees");
    cmd->add_option("--f-m", [&c](const CLI::results_t& r) { c.f_m = std::stod(r[0]); return true; },
                    "SMS peak frequency, Hz");
    cmd->add_option("--alpha", [&c](const CLI::results_t& r) { c.alpha = std::stod(r[0]); return true; },
                    "ROCOF threshold, Hz/s");
    cmd->add_option("--beta", [&c](const CLI::results_t& r) { c.beta = std::stod(r[0]); return true; },
                    "ROCOF minimum voltage, pu");
    cmd->add_option("--mode,--detection",
                    [&c](const CLI::results_t& r) { c.mode = r[0]; return true; },
                    "Detection mode: off|always_on|armed_by_rocof");
}

int cmd_run(const std::string& config_path, const CommonOptions& common) {
    std::ifstream in(config_path);
    if (!in) {
        std::cerr << "error: cannot read config '" << config_path << "'\n";
        return 2;
    }
    std::stringstream buf;
    buf << in.rdbuf();

    ScenarioSpec spec;
    try {
        spec = ScenarioConfig::parse(buf.str());
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }

    std::vector<ScenarioSpec> one{spec};
    apply_overrides(one, to_suite_options(common));
    spec = one.front();

    const fs::path out = common.out_root;
    fs::create_directories(out);

    const ScenarioResult r = run_scenario(spec);
    write_series_csv((out / "series.csv").string(), r.series);
    write_summary((out / "summary.txt").string(), spec, r);

    std::cout << "case " << spec.id << ": " << (r.tripped ? "tripped" : "no trip");
    if (r.tripped)
        std::cout << " (" << to_string(r.cause) << " at t = " << fmt9(r.t_trip)
                  << ", latency " << fmt9(r.detection_latency) << " s)";
    std::cout << "\n";
    if (!r.numerics_ok) {
        std::cerr << "error: " << r.error << "\n";
        return 3;
    }
    return 0;
}

int cmd_suite(const std::string& name, const CommonOptions& common,
              const std::string& expect_path) {
    std::vector<ScenarioSpec> specs;
    try {
        specs = build_suite(name);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    apply_overrides(specs, to_suite_options(common));

    std::vector<ScenarioResult> results;
    RunReport report = run_suite(name, specs, &results);

    if (!expect_path.empty()) {
        std::ifstream ein(expect_path);
        if (!ein) {
            std::cerr << "error: cannot read verdict file '" << expect_path << "'\n";
            return 2;
        }
        std::map<std::string, bool> want;
        std::string id, verdict;
        while (ein >> id >> verdict) want[id] = verdict == "trip";
        for (auto& c : report.cases) {
            const auto it = want.find(c.id);
            if (it == want.end()) {
                c.pass = false;
                continue;
            }
            c.expected_trip = it->second;
            c.pass = c.expected_trip == c.observed_trip;
        }
        report.suite_pass = true;
        for (const auto& c : report.cases) report.suite_pass = report.suite_pass && c.pass;
    }

    const fs::path out = fs::path(common.out_root) / name;
    fs::create_directories(out);
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const fs::path cdir = out / specs[i].id;
        fs::create_directories(cdir);
        write_series_csv((cdir / "series.csv").string(), results[i].series);
        write_summary((cdir / "summary.txt").string(), specs[i], results[i]);
    }
    write_report((out / "report.txt").string(), report);

    // Frequency traces side by side, one column per case (the headline plot
    // of every experiment).
    {
        std::ofstream plot(out / "plot_frequency.csv");
        plot << "t";
        for (const auto& s : specs) plot << ',' << s.id;
        plot << "\n";
        std::size_t rows = SIZE_MAX;
        for (const auto& r : results) rows = std::min(rows, r.series.size());
        if (rows == SIZE_MAX) rows = 0;
        for (std::size_t i = 0; i < rows; ++i) {
            plot << fmt9(results[0].series.t[i]);
            for (const auto& r : results) plot << ',' << fmt9(r.series.f_est[i]);
            plot << "\n";
        }
    }

    for (const auto& c : report.cases)
        std::cout << c.id << ": " << (c.observed_trip ? "trip" : "clear")
                  << " (expected " << (c.expected_trip ? "trip" : "clear") << ") "
                  << (c.pass ? "pass" : "FAIL") << "\n";
    std::cout << "suite " << name << ": " << (report.suite_pass ? "pass" : "FAIL") << "\n";

    if (!expect_path.empty()) return report.suite_pass ? 0 : 1;
    return 0;
}

int cmd_ndz(const CommonOptions& common, double theta_m, double f_m, double f_under,
            double f_over, double qf_min, double qf_max, std::size_t qf_steps,
            double f0_min, double f0_max, std::size_t f0_steps) {
    if (qf_steps < 1 || f0_steps < 1 || qf_max < qf_min || f0_max < f0_min) {
        std::cerr << "error: empty NDZ range\n";
        return 2;
    }
    SmsParams sms;
    sms.theta_m_deg = theta_m;
    sms.f_m = f_m;
    sms.mode = SmsMode::always_on;
    const Band band{f_under, f_over};

    const NdzMap map = ndz_map(qf_min, qf_max, qf_steps, f0_min, f0_max, f0_steps, sms, band);

    const fs::path out = common.out_root;
    fs::create_directories(out);
    write_ndz_csv((out / "ndz.csv").string(), map);
    write_ndz_boundary((out / "ndz_boundary.csv").string(), map);

    std::size_t inside = 0;
    for (const auto& p : map.points) inside += p.inside_ndz ? 1u : 0u;
    std::cout << "ndz grid " << qf_steps << "x" << f0_steps << ", " << inside
              << " cells inside, " << map.boundary.size() << " boundary points\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Anti-islanding detection test bench: time-domain scenario runs and "
                 "analytic non-detection-zone maps"};
    app.require_subcommand(1);

    CommonOptions common;
    common.out_root = default_out_root();

    std::string config_path;
    auto* run = app.add_subcommand("run", "Run a single scenario from a config file");
    run->add_option("config", config_path, "Scenario config path")->required();
    add_common(run, common);

    std::string suite_name, expect_path;
    auto* suite = app.add_subcommand("suite", "Run a named suite");
    suite->add_option("name", suite_name,
                      "ul1741_p|ul1741_q|qf_sweep|load_switching|multi_dg|all")
        ->required();
    suite->add_option("--expect", expect_path, "Verdict file: '<case-id> trip|clear' per line");
    add_common(suite, common);

    double theta_m = 25.0, f_m = 62.0, f_under = 59.3, f_over = 60.5;
    double qf_min = 0.5, qf_max = 8.1, f0_min = 57.0, f0_max = 63.0;
    std::size_t qf_steps = 100, f0_steps = 100;
    auto* ndz = app.add_subcommand("ndz", "Emit a non-detection-zone map");
    ndz->add_option("--theta-m", theta_m, "SMS maximum phase shift, degrees");
    ndz->add_option("--f-m", f_m, "SMS peak frequency, Hz");
    ndz->add_option("--f-under", f_under, "Relay under-frequency, Hz");
    ndz->add_option("--f-over", f_over, "Relay over-frequency, Hz");
    ndz->add_option("--qf-min", qf_min);
    ndz->add_option("--qf-max", qf_max);
    ndz->add_option("--qf-steps", qf_steps);
    ndz->add_option("--f0-min", f0_min);
    ndz->add_option("--f0-max", f0_max);
    ndz->add_option("--f0-steps", f0_steps);
    ndz->add_option("--out", common.out_root, "Output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(config_path, common);
        if (suite->parsed()) {
            if (suite_name == "all") {
                int worst = 0;
                for (const char* n :
                     {"ul1741_p", "ul1741_q", "qf_sweep", "load_switching", "multi_dg"})
                    worst = std::max(worst, cmd_suite(n, common, expect_path));
                return worst;
            }
            return cmd_suite(suite_name, common, expect_path);
        }
        if (ndz->parsed())
            return cmd_ndz(common, theta_m, f_m, f_under, f_over, qf_min, qf_max, qf_steps,
                           f0_min, f0_max, f0_steps);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
