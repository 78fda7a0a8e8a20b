#pragma once

// Scenario files: flat key = value pairs grouped in [model], [init], [run],
// [solver], [output] and [sweep] sections. '#' starts a comment. Unknown
// sections or keys are errors.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hkdelay/errors.hpp"
#include "hkdelay/integrator.hpp"

namespace hkdelay {

/// Every problem found in a scenario file, not just the first.
class ScenarioError : public Error {
public:
    explicit ScenarioError(std::vector<std::string> errors);
    const std::vector<std::string>& errors() const noexcept { return errors_; }

private:
    std::vector<std::string> errors_;
};

struct OutputSpec {
    /// Empty: fall back to HKDELAY_OUTPUT_DIR, then "hkdelay-out".
    std::filesystem::path directory;
    bool trajectory = false;
    bool metrics = true;
    bool windows = true;
    bool summary = true;
};

struct SweepSpec {
    std::string parameter;
    std::vector<std::string> values;
};

struct ScenarioFile {
    SimulationConfig config;
    OutputSpec output;
    std::optional<SweepSpec> sweep;
};

/// Parameters a sweep may vary.
const std::vector<std::string>& sweepable_parameters();

/// Parses and validates. The model assumptions are checked here unless the
/// file has a [sweep] section, in which case each row is validated on its own.
ScenarioFile parse_scenario(const std::filesystem::path& path);
ScenarioFile parse_scenario_text(const std::string& text,
                                 const std::filesystem::path& base_dir = ".");

/// Returns a copy of `scenario` with one parameter replaced. Throws ScenarioError.
ScenarioFile with_parameter(const ScenarioFile& scenario, const std::string& name,
                            const std::string& value);

enum class ExitCode : int {
    Success = 0,
    NoConsensus = 2,
    VerdictViolation = 3,
    RuntimeError = 4,
};

struct RunOverrides {
    std::optional<std::filesystem::path> out;
    std::optional<std::uint64_t> seed;
    std::optional<double> dt;
    std::optional<double> t_max;
    bool trajectory = false;
};

void apply_overrides(ScenarioFile& scenario, const RunOverrides& overrides);

/// Resolved output directory: the file's setting, else $HKDELAY_OUTPUT_DIR,
/// else "hkdelay-out".
std::filesystem::path output_directory(const OutputSpec& output);

struct RunOutcome {
    ExitCode exit_code = ExitCode::RuntimeError;
    std::optional<RunResult> result;
    /// Human-readable explanation of a non-zero exit.
    std::string message;
    std::filesystem::path directory;
};

/// Runs one scenario and writes metrics.csv, windows.csv, summary.json and
/// (opt-in) trajectory.csv. Never throws for model or runtime failures.
RunOutcome run_scenario(const ScenarioFile& scenario);

/// summary.json contents.
std::string summary_json(const ScenarioFile& scenario, const RunOutcome& outcome);

struct SweepRow {
    std::string parameter;
    std::string value;
    ExitCode exit_code = ExitCode::RuntimeError;
    std::string message;
    bool consensus = false;
    double t_end = 0.0;
    std::optional<double> fitted_decay_rate;
    double tau_max = 0.0;
    bool verdicts_ok = false;
};

/// One run per sweep value, each in <out>/row_<k>/, plus <out>/sweep.csv.
/// Rows run on up to `jobs` threads; the table keeps the value order.
std::vector<SweepRow> run_sweep(const ScenarioFile& scenario, std::size_t jobs = 1);

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

}  // namespace hkdelay
