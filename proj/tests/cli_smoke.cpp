// End-to-end checks of the command-line binary: spawns the real executable,
// inspects exit codes and the files it leaves behind.

#include "islandguard/config.hpp"
#include "islandguard/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

int failures = 0;

void check(bool ok, const std::string& what) {
    if (!ok) {
        ++failures;
        std::cerr << "FAIL: " << what << "\n";
    } else {
        std::cout << "ok: " << what << "\n";
    }
}

int run_cmd(const std::string& cmd) {
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t line_count(const fs::path& p) {
    std::ifstream in(p);
    std::size_t n = 0;
    std::string line;
    while (std::getline(in, line)) ++n;
    return n;
}

} // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: cli_smoke <path-to-islandguard-binary>\n";
        return 2;
    }
    const std::string bin = argv[1];
    const fs::path work = fs::temp_directory_path() / "islandguard_cli_smoke";
    fs::remove_all(work);
    fs::create_directories(work);

    // run: a matched island config trips and leaves series + summary behind.
    {
        islandguard::ScenarioSpec spec = islandguard::build_suite("ul1741_q")[3];
        spec.id = "smoke_matched";
        const fs::path cfg = work / "matched.cfg";
        std::ofstream(cfg) << islandguard::ScenarioConfig::serialize(spec);

        const fs::path out = work / "run_out";
        const int rc = run_cmd(bin + " run " + cfg.string() + " --out " + out.string() +
                               " > " + (work / "run.log").string() + " 2>&1");
        check(rc == 0, "run exits 0 on a clean config");
        check(fs::exists(out / "series.csv"), "run writes series.csv");
        check(fs::exists(out / "summary.txt"), "run writes summary.txt");
        const std::string summary = slurp(out / "summary.txt");
        check(summary.find("tripped: yes") != std::string::npos, "matched island trips");
        check(summary.find("detection_latency") != std::string::npos, "summary reports latency");
        const std::string series = slurp(out / "series.csv");
        check(series.rfind(islandguard::series_header, 0) == 0, "series header is pinned");

        // Same config with detection forced off: no trip.
        const fs::path out2 = work / "run_off";
        const int rc2 = run_cmd(bin + " run " + cfg.string() + " --out " + out2.string() +
                                " --detection off > /dev/null 2>&1");
        check(rc2 == 0, "run --detection off exits 0");
        check(slurp(out2 / "summary.txt").find("tripped: no") != std::string::npos,
              "detection off rides through");
    }

    // run: malformed config (negative dt) exits nonzero and names the key.
    {
        const fs::path cfg = work / "bad.cfg";
        std::ofstream(cfg) << "solver.dt = -5e-5\n";
        const fs::path log = work / "bad.log";
        const int rc = run_cmd(bin + " run " + cfg.string() + " > " + log.string() + " 2>&1");
        check(rc != 0, "malformed config exits nonzero");
        check(slurp(log).find("solver.dt") != std::string::npos, "error names solver.dt");
    }

    // suite: load_switching produces three no-trip cases and a report.
    {
        const fs::path out = work / "suites";
        const int rc = run_cmd(bin + " suite load_switching --out " + out.string() +
                               " > /dev/null 2>&1");
        check(rc == 0, "suite load_switching exits 0");
        const std::string report = slurp(out / "load_switching" / "report.txt");
        check(report.find("suite_pass: yes") != std::string::npos, "load_switching passes");
        check(line_count(out / "load_switching" / "plot_frequency.csv") > 100,
              "plot data emitted");

        // Verdict file contract: matching expectations exit 0, contradicting
        // expectations exit nonzero.
        const fs::path good = work / "expect_good.txt";
        std::ofstream(good) << "load_switching_lead clear\nload_switching_unity clear\n"
                            << "load_switching_lag clear\n";
        const int rc_good = run_cmd(bin + " suite load_switching --out " + out.string() +
                                    " --expect " + good.string() + " > /dev/null 2>&1");
        check(rc_good == 0, "--expect with matching verdicts exits 0");

        const fs::path badx = work / "expect_bad.txt";
        std::ofstream(badx) << "load_switching_lead trip\nload_switching_unity clear\n"
                            << "load_switching_lag clear\n";
        const int rc_bad = run_cmd(bin + " suite load_switching --out " + out.string() +
                                   " --expect " + badx.string() + " > /dev/null 2>&1");
        check(rc_bad != 0, "--expect with contradicting verdicts exits nonzero");
    }

    // suite: unknown name is rejected.
    check(run_cmd(bin + " suite nope > /dev/null 2>&1") != 0, "unknown suite exits nonzero");

    // ndz: grid CSV row count equals the grid size; theta_m 0 boundary sits
    // on the relay band.
    {
        const fs::path out = work / "ndz0";
        const int rc = run_cmd(bin + " ndz --theta-m 0 --qf-steps 11 --f0-steps 25 --out " +
                               out.string() + " > /dev/null 2>&1");
        check(rc == 0, "ndz exits 0");
        check(line_count(out / "ndz.csv") == 11 * 25 + 1, "ndz row count equals grid size");
        check(line_count(out / "ndz_boundary.csv") == 2 * 11 + 1,
              "theta_m 0 boundary is the two band edges per row");
    }
    {
        const fs::path out = work / "ndz25";
        const int rc = run_cmd(bin + " ndz --theta-m 25 --qf-steps 11 --f0-steps 25 --out " +
                               out.string() + " > /dev/null 2>&1");
        check(rc == 0, "ndz --theta-m 25 exits 0");
        // No cell with f_0 inside the relay band stays undetected.
        std::ifstream in(out / "ndz.csv");
        std::string line;
        std::getline(in, line); // header
        bool any_inside_band_ndz = false;
        while (std::getline(in, line)) {
            double q, f0, fi;
            int inside;
            std::sscanf(line.c_str(), "%lf,%lf,%lf,%d", &q, &f0, &fi, &inside);
            if (inside && f0 > 59.3 && f0 < 60.5) any_inside_band_ndz = true;
        }
        check(!any_inside_band_ndz, "theta_m 25 leaves no NDZ cell inside the relay band");
    }

    // ndz: empty range is rejected.
    check(run_cmd(bin + " ndz --qf-min 5 --qf-max 1 > /dev/null 2>&1") != 0,
          "empty ndz range exits nonzero");

    // ISLANDGUARD_OUT provides the default output root.
    {
        const fs::path out = work / "env_out";
        const int rc = run_cmd("ISLANDGUARD_OUT=" + out.string() +
                               " " + bin + " ndz --theta-m 0 --qf-steps 3 --f0-steps 5" +
                               " > /dev/null 2>&1");
        check(rc == 0 && fs::exists(out / "ndz.csv"), "ISLANDGUARD_OUT sets the output root");
    }

    // Shipped example configs behave as their comments claim.
    if (argc >= 3) {
        const fs::path configs = argv[2];
        {
            const fs::path out = work / "cfg_matched";
            const int rc = run_cmd(bin + " run " + (configs / "matched_island.cfg").string() +
                                   " --out " + out.string() + " > /dev/null 2>&1");
            check(rc == 0 && slurp(out / "summary.txt").find("tripped: yes") != std::string::npos,
                  "shipped matched-island config trips");
        }
        {
            const fs::path out = work / "cfg_switch";
            const int rc = run_cmd(bin + " run " +
                                   (configs / "load_switch_ride_through.cfg").string() +
                                   " --out " + out.string() + " > /dev/null 2>&1");
            const std::string summary = slurp(out / "summary.txt");
            check(rc == 0 && summary.find("tripped: no") != std::string::npos &&
                      summary.find("armed_spells: 0") != std::string::npos,
                  "shipped ride-through config stays quiet");
        }
    }

    std::cout << (failures == 0 ? "cli_smoke: all checks passed\n"
                                : "cli_smoke: FAILURES\n");
    return failures == 0 ? 0 : 1;
}
