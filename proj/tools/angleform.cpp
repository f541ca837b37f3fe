// angleform: scenario validation, simulation runs, and bundled reproductions
// for angle-constrained formation control under leader/first-follower graphs.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "angleform/builtin_scenarios.hpp"
#include "angleform/report.hpp"
#include "angleform/scenario_io.hpp"
#include "angleform/svg.hpp"
#include "angleform/verification.hpp"

namespace fs = std::filesystem;
using namespace angleform;

namespace {

int log_level() {
    const char* env = std::getenv("ANGLEFORM_LOG");
    if (env == nullptr) return 1;
    const std::string v(env);
    if (v == "quiet" || v == "0") return 0;
    if (v == "debug" || v == "2") return 2;
    return 1;
}

void info(const std::string& msg) {
    if (log_level() >= 1) std::cerr << msg << "\n";
}

void debug(const std::string& msg) {
    if (log_level() >= 2) std::cerr << "debug: " << msg << "\n";
}

std::optional<Scenario> load_checked(const std::string& path, bool print_ok) {
    const ParseResult parsed = load_scenario_file(path);
    for (const Diagnostic& d : parsed.diagnostics) {
        if (d.line > 0)
            std::cerr << path << ":" << d.line << ": " << d.message << "\n";
        else
            std::cerr << path << ": " << d.message << "\n";
    }
    if (!parsed.scenario) return std::nullopt;
    const auto diags = validate_scenario(*parsed.scenario);
    for (const auto& m : diags) std::cerr << path << ": " << m << "\n";
    if (!parsed.diagnostics.empty() || !diags.empty()) return std::nullopt;
    if (print_ok) std::cout << path << ": ok\n";
    return parsed.scenario;
}

void write_artifacts(const RunOutput& out, const fs::path& dir) {
    fs::create_directories(dir);

    {
        std::ofstream csv(dir / "trajectory.csv");
        write_trajectory_csv(csv, out.record);
    }
    {
        std::ofstream metrics(dir / "metrics.json");
        metrics << metrics_json(out).dump(2) << "\n";
    }

    write_line_plot_svg((dir / "angle_error.svg").string(), "Angle error", "t [s]",
                        "angle error [rad]", {"sum of angle deviations"}, {&out.record.t},
                        {&out.record.angle_error_series}, true);
    write_trajectory_svg((dir / "trajectory.svg").string(), "Agent paths", out.record);

    if (!out.follower_rates.empty()) {
        std::vector<int> agents;
        std::vector<double> predicted, fitted;
        for (const FollowerRateReport& f : out.follower_rates) {
            agents.push_back(f.agent);
            predicted.push_back(f.predicted_rate);
            fitted.push_back(f.fitted.valid ? f.fitted.rate : 0.0);
        }
        write_rates_svg((dir / "rates.svg").string(), "Follower decay rates", agents, predicted,
                        fitted);
    } else {
        // Maneuver runs: fitted leader-edge rate per segment against the unit
        // rate of the exact segment dynamics.
        std::vector<int> segs;
        std::vector<double> predicted, fitted;
        for (const SegmentSummary& seg : out.segments) {
            segs.push_back(seg.index);
            predicted.push_back(1.0);
            fitted.push_back(seg.e12_rate.valid ? seg.e12_rate.rate : 0.0);
        }
        write_rates_svg((dir / "rates.svg").string(), "Leader-edge decay rate per segment", segs,
                        predicted, fitted);
    }
    info("wrote " + (dir / "trajectory.csv").string() + ", metrics.json and plots");
}

int cmd_run(const std::string& path, const fs::path& out_dir, std::optional<double> dt,
            std::optional<double> duration) {
    auto scenario = load_checked(path, false);
    if (!scenario) return 1;
    if (dt) scenario->dt = *dt;
    if (duration) scenario->duration = *duration;
    if (auto diags = validate_scenario(*scenario); !diags.empty()) {
        for (const auto& m : diags) std::cerr << path << ": " << m << "\n";
        return 1;
    }
    debug("integrating " + path);
    const RunOutput out = run_scenario(*scenario);
    write_artifacts(out, out_dir);
    std::cout << "terminal angle error: " << out.record.angle_error_series.back() << " rad\n";
    return 0;
}

int reproduce_one(const std::string& which, const fs::path& out_dir) {
    const bool shape = which == "shape";
    const Scenario scenario = shape ? builtin_shape_scenario() : builtin_maneuver_scenario();
    debug("running bundled " + which + " scenario");
    const RunOutput out = run_scenario(scenario);
    write_artifacts(out, out_dir);

    const auto criteria =
        shape ? verification::shape_criteria() : verification::maneuver_criteria();
    std::ofstream summary(out_dir / "summary.txt");
    bool all_pass = true;
    for (const auto& c : criteria) {
        const std::string line =
            "[" + c.id + "] " + (c.pass ? "PASS" : "FAIL") + " " + c.name + " — " + c.detail;
        std::cout << line << "\n";
        summary << line << "\n";
        all_pass = all_pass && c.pass;
    }
    return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"angle-constrained formation control simulator"};
    app.require_subcommand(1);

    std::string validate_path;
    CLI::App* validate = app.add_subcommand("validate", "check a scenario file");
    validate->add_option("file", validate_path, "scenario file")->required();

    std::string run_path, run_out = "out";
    std::optional<double> run_dt, run_duration;
    CLI::App* run = app.add_subcommand("run", "simulate a scenario and write artifacts");
    run->add_option("file", run_path, "scenario file")->required();
    run->add_option("--out", run_out, "output directory");
    run->add_option("--dt", run_dt, "override integration step [s]");
    run->add_option("--duration", run_duration, "override duration [s]");

    std::string which, rep_out = "out";
    CLI::App* reproduce =
        app.add_subcommand("reproduce", "run a bundled scenario and check its criteria");
    reproduce->add_option("which", which, "shape | maneuver | all")->required();
    reproduce->add_option("--out", rep_out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 2;
    }

    try {
        if (validate->parsed()) return load_checked(validate_path, true) ? 0 : 1;
        if (run->parsed()) return cmd_run(run_path, run_out, run_dt, run_duration);
        if (reproduce->parsed()) {
            if (which == "shape" || which == "maneuver") return reproduce_one(which, rep_out);
            if (which == "all") {
                const int a = reproduce_one("shape", fs::path(rep_out) / "shape");
                const int b = reproduce_one("maneuver", fs::path(rep_out) / "maneuver");
                return (a == 0 && b == 0) ? 0 : 1;
            }
            std::cerr << "unknown fixture \"" << which << "\" (use shape, maneuver or all)\n";
            return 2;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
