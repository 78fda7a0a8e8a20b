// hkdelay: run, sweep and validate opinion-dynamics scenarios with
// finite-speed information propagation.
//
//   hkdelay run <scenario> [--out DIR] [--seed S] [--dt X] [--t-max X] [--trajectory]
//   hkdelay sweep <scenario> [--jobs K]
//   hkdelay validate <scenario>
//
// Exit codes: 0 consensus with every bound verified, 2 t_max reached without
// consensus, 3 a bound was violated, 4 configuration or runtime error.

#include <algorithm>
#include <iostream>

#include <CLI11.hpp>

#include "hkdelay/scenario.hpp"

namespace {

constexpr int kErrorExit = static_cast<int>(hkdelay::ExitCode::RuntimeError);

int report_scenario_error(const hkdelay::ScenarioError& e) {
    for (const auto& line : e.errors()) std::cerr << "error: " << line << '\n';
    return kErrorExit;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hegselmann-Krause dynamics with state-dependent delay"};
    app.require_subcommand(1);

    std::string scenario_path;
    hkdelay::RunOverrides overrides;
    std::string out_dir;
    std::uint64_t seed = 0;
    double dt = 0.0;
    double t_max = 0.0;

    auto* run_cmd = app.add_subcommand("run", "Integrate one scenario and verify the consensus bounds");
    run_cmd->add_option("scenario", scenario_path, "Scenario file")->required();
    auto* out_opt = run_cmd->add_option("--out", out_dir, "Output directory");
    auto* seed_opt = run_cmd->add_option("--seed", seed, "Seed for random initial positions");
    auto* dt_opt = run_cmd->add_option("--dt", dt, "Time step");
    auto* tmax_opt = run_cmd->add_option("--t-max", t_max, "Time horizon");
    run_cmd->add_flag("--trajectory", overrides.trajectory, "Also write trajectory.csv");

    std::size_t jobs = 1;
    auto* sweep_cmd = app.add_subcommand("sweep", "Run the scenario once per [sweep] value");
    sweep_cmd->add_option("scenario", scenario_path, "Scenario file")->required();
    sweep_cmd->add_option("--jobs", jobs, "Parallel rows")->check(CLI::PositiveNumber);

    auto* validate_cmd = app.add_subcommand("validate", "Parse and check a scenario without running it");
    validate_cmd->add_option("scenario", scenario_path, "Scenario file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kErrorExit;
    }

    try {
        hkdelay::ScenarioFile scenario = hkdelay::parse_scenario(scenario_path);

        if (validate_cmd->parsed()) {
            std::cout << "ok: " << scenario_path << '\n';
            return 0;
        }

        if (run_cmd->parsed()) {
            if (*out_opt) overrides.out = out_dir;
            if (*seed_opt) overrides.seed = seed;
            if (*dt_opt) overrides.dt = dt;
            if (*tmax_opt) overrides.t_max = t_max;
            hkdelay::apply_overrides(scenario, overrides);
            const hkdelay::RunOutcome outcome = hkdelay::run_scenario(scenario);
            if (outcome.result) {
                for (const auto& w : outcome.result->warnings) std::cerr << "warning: " << w << '\n';
            }
            if (outcome.exit_code != hkdelay::ExitCode::Success) {
                std::cerr << outcome.message << '\n';
            }
            std::cout << "output: " << outcome.directory.string() << '\n';
            return static_cast<int>(outcome.exit_code);
        }

        if (sweep_cmd->parsed()) {
            if (!scenario.sweep) {
                std::cerr << "error: scenario has no [sweep] section\n";
                return kErrorExit;
            }
            const auto rows = hkdelay::run_sweep(scenario, jobs);
            hkdelay::write_sweep_csv(std::cout, rows);
            int worst = 0;
            for (const auto& r : rows) {
                const int code = static_cast<int>(r.exit_code);
                if (code != 0) std::cerr << r.parameter << " = " << r.value << ": " << r.message << '\n';
                worst = std::max(worst, code);
            }
            return worst;
        }
    } catch (const hkdelay::ScenarioError& e) {
        return report_scenario_error(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kErrorExit;
    }
    return kErrorExit;
}
