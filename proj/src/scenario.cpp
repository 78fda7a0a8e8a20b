#include "hkdelay/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "hkdelay/csv.hpp"

namespace hkdelay {

namespace {

using Schema = std::map<std::string, std::set<std::string>>;

const Schema& schema() {
    static const Schema s = {
        {"model", {"n_agents", "dim", "speed", "psi", "psi_beta", "psi_table", "sigma_r_max",
                   "use_rearrangement"}},
        {"init", {"positions", "box_half_width", "seed", "position_list", "history", "velocities",
                  "depth"}},
        {"run", {"dt", "t_max", "epsilon", "scheme", "samples_per_window"}},
        {"solver", {"tolerance", "max_iterations", "bracket_margin"}},
        {"output", {"directory", "trajectory", "metrics", "windows", "summary"}},
        {"sweep", {"parameter", "values"}},
    };
    return s;
}

std::string trim(std::string s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep)) parts.push_back(trim(item));
    return parts;
}

std::optional<double> to_double(const std::string& s) {
    double v = 0.0;
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end) return std::nullopt;
    return v;
}

std::optional<std::uint64_t> to_uint(const std::string& s) {
    std::uint64_t v = 0;
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end) return std::nullopt;
    return v;
}

struct Entry {
    std::string value;
    int line = 0;
};

// Typed access to the raw entries; conversion problems accumulate in `errors`.
class Reader {
public:
    std::map<std::string, Entry> entries;  // "section.key"
    std::vector<std::string> errors;

    bool has(const std::string& key) const { return entries.count(key) != 0; }

    const Entry* find(const std::string& key) const {
        auto it = entries.find(key);
        return it == entries.end() ? nullptr : &it->second;
    }

    void error(const std::string& key, const std::string& what) {
        const Entry* e = find(key);
        errors.push_back((e ? "line " + std::to_string(e->line) + ": " : std::string()) + key + ": " + what);
    }

    std::string text(const std::string& key, const std::string& fallback) const {
        const Entry* e = find(key);
        return e ? e->value : fallback;
    }

    double real(const std::string& key, double fallback) {
        const Entry* e = find(key);
        if (!e) return fallback;
        if (auto v = to_double(e->value)) return *v;
        error(key, "expected a number, got '" + e->value + "'");
        return fallback;
    }

    std::uint64_t integer(const std::string& key, std::uint64_t fallback) {
        const Entry* e = find(key);
        if (!e) return fallback;
        if (auto v = to_uint(e->value)) return *v;
        error(key, "expected a nonnegative integer, got '" + e->value + "'");
        return fallback;
    }

    bool flag(const std::string& key, bool fallback) {
        const Entry* e = find(key);
        if (!e) return fallback;
        if (e->value == "true" || e->value == "yes" || e->value == "1") return true;
        if (e->value == "false" || e->value == "no" || e->value == "0") return false;
        error(key, "expected true/false, got '" + e->value + "'");
        return fallback;
    }

    std::optional<PointSet> points(const std::string& key, std::size_t dim) {
        const Entry* e = find(key);
        if (!e) return std::nullopt;
        std::vector<double> coords;
        std::size_t count = 0;
        for (const auto& agent : split(e->value, ';')) {
            if (agent.empty()) continue;
            const auto parts = split(agent, ',');
            if (parts.size() != dim) {
                error(key, "point " + std::to_string(count) + " has " + std::to_string(parts.size()) +
                               " coordinates, expected " + std::to_string(dim));
                return std::nullopt;
            }
            for (const auto& p : parts) {
                auto v = to_double(p);
                if (!v) {
                    error(key, "non-numeric coordinate '" + p + "'");
                    return std::nullopt;
                }
                coords.push_back(*v);
            }
            ++count;
        }
        return PointSet(count, dim, std::move(coords));
    }
};

Reader read_entries(const std::string& text) {
    Reader r;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::string where = "line " + std::to_string(line_no) + ": ";
        if (line.front() == '[') {
            if (line.back() != ']') {
                r.errors.push_back(where + "malformed section header '" + line + "'");
                continue;
            }
            section = trim(line.substr(1, line.size() - 2));
            if (!schema().count(section)) {
                r.errors.push_back(where + "unknown section [" + section + "]");
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            r.errors.push_back(where + "expected 'key = value', got '" + line + "'");
            continue;
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (section.empty()) {
            r.errors.push_back(where + "key '" + key + "' outside of any section");
            continue;
        }
        auto sec = schema().find(section);
        if (sec == schema().end()) continue;  // already reported
        if (!sec->second.count(key)) {
            r.errors.push_back(where + "unknown key '" + key + "' in [" + section + "]");
            continue;
        }
        const std::string full = section + "." + key;
        if (r.entries.count(full)) {
            r.errors.push_back(where + "duplicate key '" + full + "'");
            continue;
        }
        r.entries[full] = {value, line_no};
    }
    return r;
}

ScenarioFile build(Reader& r, const std::filesystem::path& base_dir) {
    ScenarioFile out;
    SimulationConfig& cfg = out.config;
    ModelParameters& params = cfg.params;

    for (const char* required : {"model.n_agents", "model.dim", "model.speed"}) {
        if (!r.has(required)) r.errors.push_back(std::string("missing required key ") + required);
    }
    params.n_agents = static_cast<std::size_t>(r.integer("model.n_agents", 2));
    params.dim = static_cast<std::size_t>(r.integer("model.dim", 1));
    params.speed = r.real("model.speed", 1.0);
    cfg.sigma_r_max = r.real("model.sigma_r_max", std::numeric_limits<double>::infinity());
    cfg.use_rearrangement = r.flag("model.use_rearrangement", true);

    const std::string psi = r.text("model.psi", "reciprocal");
    try {
        if (psi == "reciprocal") {
            params.psi = InfluenceFunction::reciprocal();
        } else if (psi == "exponential") {
            params.psi = InfluenceFunction::exponential();
        } else if (psi == "power_law") {
            if (!r.has("model.psi_beta")) r.errors.push_back("psi = power_law requires model.psi_beta");
            params.psi = InfluenceFunction::power_law(r.real("model.psi_beta", 1.0));
        } else if (psi == "custom") {
            if (!r.has("model.psi_table")) {
                r.errors.push_back("psi = custom requires model.psi_table");
            } else {
                std::filesystem::path table = r.text("model.psi_table", "");
                if (table.is_relative()) table = base_dir / table;
                params.psi = InfluenceFunction::custom(load_psi_table(table));
            }
        } else {
            r.error("model.psi", "unknown influence function '" + psi +
                                     "' (reciprocal, power_law, exponential, custom)");
        }
    } catch (const Error& e) {
        r.error("model.psi", e.what());
    }

    const std::string positions = r.text("init.positions", "random");
    cfg.seed = r.integer("init.seed", 0);
    if (positions == "random") {
        cfg.initial_positions = RandomBox{r.real("init.box_half_width", 1.0)};
    } else if (positions == "explicit") {
        auto pts = r.points("init.position_list", params.dim);
        if (!r.has("init.position_list")) r.errors.push_back("positions = explicit requires init.position_list");
        if (pts) {
            if (pts->size() != params.n_agents) {
                r.error("init.position_list", "has " + std::to_string(pts->size()) + " points, n_agents is " +
                                                  std::to_string(params.n_agents));
            }
            cfg.initial_positions = std::move(*pts);
        }
    } else {
        r.error("init.positions", "expected 'random' or 'explicit', got '" + positions + "'");
    }

    const std::string history = r.text("init.history", "constant");
    if (history == "constant") {
        cfg.history_kind = InitialHistoryKind::ConstantAtInitialPosition;
    } else if (history == "linear") {
        cfg.history_kind = InitialHistoryKind::LinearWithVelocity;
        if (!r.has("init.velocities")) r.errors.push_back("history = linear requires init.velocities");
        if (auto v = r.points("init.velocities", params.dim)) cfg.history_velocities = std::move(*v);
    } else {
        r.error("init.history", "expected 'constant' or 'linear', got '" + history + "'");
    }
    const std::string depth = r.text("init.depth", "auto");
    if (depth != "auto") cfg.history_depth = r.real("init.depth", 1.0);

    cfg.dt = r.real("run.dt", 0.01);
    cfg.t_max = r.real("run.t_max", 200.0);
    cfg.consensus_epsilon = r.real("run.epsilon", 1e-6);
    cfg.samples_per_window = static_cast<std::size_t>(r.integer("run.samples_per_window", 0));
    const std::string scheme = r.text("run.scheme", "euler");
    if (scheme == "euler") {
        cfg.scheme = Scheme::Euler;
    } else if (scheme == "heun") {
        cfg.scheme = Scheme::Heun;
    } else {
        r.error("run.scheme", "expected 'euler' or 'heun', got '" + scheme + "'");
    }

    cfg.delay_settings.tolerance = r.real("solver.tolerance", 1e-12);
    cfg.delay_settings.max_iterations = static_cast<int>(r.integer("solver.max_iterations", 100));
    cfg.delay_settings.bracket_margin = r.real("solver.bracket_margin", 1.1);

    out.output.directory = r.text("output.directory", "");
    if (!out.output.directory.empty() && out.output.directory.is_relative()) {
        out.output.directory = base_dir / out.output.directory;
    }
    out.output.trajectory = r.flag("output.trajectory", false);
    out.output.metrics = r.flag("output.metrics", true);
    out.output.windows = r.flag("output.windows", true);
    out.output.summary = r.flag("output.summary", true);

    if (r.has("sweep.parameter") || r.has("sweep.values")) {
        SweepSpec sweep;
        sweep.parameter = r.text("sweep.parameter", "");
        const auto& allowed = sweepable_parameters();
        if (std::find(allowed.begin(), allowed.end(), sweep.parameter) == allowed.end()) {
            r.error("sweep.parameter", "cannot sweep '" + sweep.parameter + "'");
        }
        for (const auto& v : split(r.text("sweep.values", ""), ',')) {
            if (!v.empty()) sweep.values.push_back(v);
        }
        if (sweep.values.empty()) r.errors.push_back("sweep.values: no values given");
        out.sweep = std::move(sweep);
    }
    return out;
}

void check_model(const ScenarioFile& s, std::vector<std::string>& errors) {
    ValidationOptions opts;
    opts.r_max = s.config.sigma_r_max;
    const ValidationReport report = validate(s.config.params, opts);
    for (const auto& c : report.checks) {
        if (!c.passed && c.required) errors.push_back("validation: " + c.name + ": " + c.detail);
    }
    const SimulationConfig& cfg = s.config;
    if (!(cfg.dt > 0.0)) errors.push_back("validation: run.dt must be positive");
    if (!(cfg.t_max > 0.0)) errors.push_back("validation: run.t_max must be positive");
    if (!(cfg.consensus_epsilon > 0.0)) errors.push_back("validation: run.epsilon must be positive");
    if (cfg.history_kind == InitialHistoryKind::LinearWithVelocity) {
        for (std::size_t i = 0; i < cfg.history_velocities.size(); ++i) {
            if (!(norm(cfg.history_velocities[i]) < cfg.params.speed)) {
                errors.push_back("validation: initial velocity of agent " + std::to_string(i) +
                                 " is not below c");
            }
        }
    }
}

std::string join(const std::vector<std::string>& lines) {
    std::string out;
    for (const auto& l : lines) out += (out.empty() ? "" : "\n") + l;
    return out;
}

}  // namespace

ScenarioError::ScenarioError(std::vector<std::string> errors)
    : Error(join(errors)), errors_(std::move(errors)) {}

const std::vector<std::string>& sweepable_parameters() {
    static const std::vector<std::string> names = {"speed", "n_agents", "dim",  "dt",  "t_max",
                                                   "epsilon", "seed", "psi_beta", "box_half_width"};
    return names;
}

ScenarioFile parse_scenario_text(const std::string& text, const std::filesystem::path& base_dir) {
    Reader r = read_entries(text);
    ScenarioFile out = build(r, base_dir);
    std::vector<std::string> errors = std::move(r.errors);
    if (errors.empty() && !out.sweep) check_model(out, errors);
    if (!errors.empty()) throw ScenarioError(std::move(errors));
    return out;
}

ScenarioFile parse_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError({"cannot open scenario file '" + path.string() + "'"});
    std::ostringstream text;
    text << in.rdbuf();
    return parse_scenario_text(text.str(), path.parent_path().empty() ? "." : path.parent_path());
}

ScenarioFile with_parameter(const ScenarioFile& scenario, const std::string& name,
                            const std::string& value) {
    ScenarioFile s = scenario;
    s.sweep.reset();
    SimulationConfig& cfg = s.config;
    const auto real = to_double(value);
    const auto whole = to_uint(value);
    auto bad = [&](const std::string& what) {
        return ScenarioError({"sweep " + name + " = " + value + ": " + what});
    };
    if (name == "speed" || name == "dt" || name == "t_max" || name == "epsilon" || name == "psi_beta" ||
        name == "box_half_width") {
        if (!real) throw bad("expected a number");
        if (name == "speed") cfg.params.speed = *real;
        if (name == "dt") cfg.dt = *real;
        if (name == "t_max") cfg.t_max = *real;
        if (name == "epsilon") cfg.consensus_epsilon = *real;
        if (name == "box_half_width") cfg.initial_positions = RandomBox{*real};
        if (name == "psi_beta") {
            if (cfg.params.psi.kind() != PsiKind::PowerLaw) throw bad("psi is not power_law");
            try {
                cfg.params.psi = InfluenceFunction::power_law(*real);
            } catch (const Error& e) {
                throw bad(e.what());
            }
        }
    } else if (name == "n_agents" || name == "dim" || name == "seed") {
        if (!whole) throw bad("expected a nonnegative integer");
        if (name == "n_agents") cfg.params.n_agents = static_cast<std::size_t>(*whole);
        if (name == "dim") cfg.params.dim = static_cast<std::size_t>(*whole);
        if (name == "seed") cfg.seed = *whole;
    } else {
        throw bad("not a sweepable parameter");
    }
    std::vector<std::string> errors;
    check_model(s, errors);
    if (!errors.empty()) throw ScenarioError(std::move(errors));
    return s;
}

void apply_overrides(ScenarioFile& scenario, const RunOverrides& overrides) {
    if (overrides.out) scenario.output.directory = *overrides.out;
    if (overrides.seed) scenario.config.seed = *overrides.seed;
    if (overrides.dt) scenario.config.dt = *overrides.dt;
    if (overrides.t_max) scenario.config.t_max = *overrides.t_max;
    if (overrides.trajectory) scenario.output.trajectory = true;
}

std::filesystem::path output_directory(const OutputSpec& output) {
    if (!output.directory.empty()) return output.directory;
    if (const char* env = std::getenv("HKDELAY_OUTPUT_DIR"); env && *env) return env;
    return "hkdelay-out";
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw RangeError("cannot write '" + path.string() + "'");
    out << contents;
}

nlohmann::ordered_json number_or_text(double v) {
    if (std::isfinite(v)) return v;
    return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
}

}  // namespace

std::string summary_json(const ScenarioFile& scenario, const RunOutcome& outcome) {
    using nlohmann::ordered_json;
    const SimulationConfig& cfg = scenario.config;
    ordered_json j;
    j["exit_code"] = static_cast<int>(outcome.exit_code);
    j["message"] = outcome.message;
    j["model"] = {{"n_agents", cfg.params.n_agents},
                  {"dim", cfg.params.dim},
                  {"speed", cfg.params.speed},
                  {"psi", to_string(cfg.params.psi.kind())},
                  {"sigma_r_max", number_or_text(cfg.sigma_r_max)}};
    if (cfg.params.psi.kind() == PsiKind::PowerLaw) j["model"]["psi_beta"] = cfg.params.psi.beta();
    j["run"] = {{"dt", cfg.dt},
                {"t_max", cfg.t_max},
                {"epsilon", cfg.consensus_epsilon},
                {"scheme", to_string(cfg.scheme)},
                {"seed", cfg.seed}};
    if (!outcome.result) return j.dump(2) + "\n";

    const RunResult& r = *outcome.result;
    const DiagnosticsReport& rep = r.report;
    const BoundConstants& k = rep.constants;
    j["constants"] = {{"sigma", k.sigma},
                      {"sigma_eff_startup", k.sigma_eff_startup},
                      {"lipschitz_initial", k.lipschitz_initial},
                      {"S0", k.s0},
                      {"R0", k.r0},
                      {"tau", k.tau},
                      {"history_depth", k.depth},
                      {"psibar", k.psibar},
                      {"alpha", k.alpha},
                      {"contraction_factor", k.contraction_factor},
                      {"tol_diag", rep.tol_diag}};
    const double t_end = rep.series.empty() ? 0.0 : rep.series.back().t;
    double tau_max = 0.0;
    for (const auto& m : rep.series) tau_max = std::max(tau_max, m.tau_max);
    j["outcome"] = {{"terminated_by_consensus", r.terminated_by_consensus},
                    {"t_end", t_end},
                    {"d_x_end", rep.series.empty() ? 0.0 : rep.series.back().diameter},
                    {"tau_max_observed", tau_max},
                    {"steps", r.state.step_count},
                    {"windows", rep.windows.size()}};
    j["outcome"]["consensus_time"] = r.terminated_by_consensus ? ordered_json(t_end) : ordered_json(nullptr);
    j["fitted_decay_rate"] = rep.fitted_decay_rate ? ordered_json(*rep.fitted_decay_rate) : ordered_json(nullptr);
    j["contraction_factor"] = k.contraction_factor;
    const Verdicts& v = rep.verdicts;
    j["verdicts"] = {{"radius_ok", v.radius_ok},
                     {"delay_bound_ok", v.delay_bound_ok},
                     {"delay_bound_strict_ok", v.delay_bound_strict_ok},
                     {"lipschitz_ok", v.lipschitz_ok},
                     {"K_monotone_ok", v.k_monotone_ok},
                     {"K_contraction_ok", v.k_contraction_ok},
                     {"mixing_ok", v.mixing_ok},
                     {"pair_estimate_ok", v.pair_estimate_ok},
                     {"decay_ok", v.decay_ok},
                     {"all_ok", v.all_ok()}};
    ordered_json violations = ordered_json::array();
    for (std::size_t i = 0; i < v.violations.size() && i < 50; ++i) {
        const auto& viol = v.violations[i];
        violations.push_back({{"check", viol.check}, {"where", viol.where}, {"lhs", viol.lhs}, {"rhs", viol.rhs}});
    }
    j["violations"] = violations;
    j["solver"] = {{"rhs_evaluations", r.stats.rhs_evaluations},
                   {"delay_iterations", r.stats.delay_iterations},
                   {"bisection_fallbacks", r.stats.bisection_fallbacks},
                   {"max_residual", r.stats.max_residual},
                   {"max_speed_excess", number_or_text(r.stats.max_speed_excess)}};
    j["warnings"] = r.warnings;
    j["error"] = r.error ? ordered_json(*r.error) : ordered_json(nullptr);
    return j.dump(2) + "\n";
}

RunOutcome run_scenario(const ScenarioFile& scenario) {
    RunOutcome outcome;
    outcome.directory = output_directory(scenario.output);
    try {
        outcome.result = run(scenario.config);
    } catch (const Error& e) {
        outcome.exit_code = ExitCode::RuntimeError;
        outcome.message = std::string("invalid configuration: ") + e.what();
    }

    if (outcome.result) {
        const RunResult& r = *outcome.result;
        if (r.error) {
            outcome.exit_code = ExitCode::RuntimeError;
            outcome.message = "runtime error: " + *r.error;
        } else if (!r.report.verdicts.all_ok()) {
            outcome.exit_code = ExitCode::VerdictViolation;
            outcome.message = "bound violated: ";
            const auto& viol = r.report.verdicts.violations;
            if (!viol.empty()) {
                outcome.message += viol.front().check + " at " + format_double(viol.front().where) + " (" +
                                   format_double(viol.front().lhs) + " > " + format_double(viol.front().rhs) + ")";
            }
        } else if (!r.terminated_by_consensus) {
            outcome.exit_code = ExitCode::NoConsensus;
            outcome.message = "t_max reached without consensus";
        } else {
            outcome.exit_code = ExitCode::Success;
        }
    }

    try {
        std::filesystem::create_directories(outcome.directory);
        const OutputSpec& out = scenario.output;
        if (outcome.result) {
            const RunResult& r = *outcome.result;
            if (out.metrics) {
                std::ostringstream os;
                write_metrics_csv(os, r.report.series);
                write_file(outcome.directory / "metrics.csv", os.str());
            }
            if (out.windows) {
                std::ostringstream os;
                write_windows_csv(os, r.report.windows);
                write_file(outcome.directory / "windows.csv", os.str());
            }
            if (out.trajectory) {
                std::ofstream os(outcome.directory / "trajectory.csv", std::ios::binary);
                write_trajectory_csv(os, r.state.history);
            }
        }
        if (out.summary) write_file(outcome.directory / "summary.json", summary_json(scenario, outcome));
    } catch (const std::exception& e) {
        outcome.exit_code = ExitCode::RuntimeError;
        outcome.message += (outcome.message.empty() ? "" : "; ") + std::string("output: ") + e.what();
    }
    return outcome;
}

std::vector<SweepRow> run_sweep(const ScenarioFile& scenario, std::size_t jobs) {
    if (!scenario.sweep) throw ScenarioError({"scenario has no [sweep] section"});
    const SweepSpec& sweep = *scenario.sweep;
    const std::filesystem::path base = output_directory(scenario.output);
    std::vector<SweepRow> rows(sweep.values.size());

    auto run_row = [&](std::size_t k) {
        SweepRow& row = rows[k];
        row.parameter = sweep.parameter;
        row.value = sweep.values[k];
        char name[32];
        std::snprintf(name, sizeof(name), "row_%03zu", k);
        try {
            ScenarioFile s = with_parameter(scenario, sweep.parameter, sweep.values[k]);
            s.output.directory = base / name;
            const RunOutcome outcome = run_scenario(s);
            row.exit_code = outcome.exit_code;
            row.message = outcome.message;
            if (outcome.result) {
                const auto& rep = outcome.result->report;
                row.consensus = outcome.result->terminated_by_consensus;
                row.t_end = rep.series.empty() ? 0.0 : rep.series.back().t;
                row.fitted_decay_rate = rep.fitted_decay_rate;
                for (const auto& m : rep.series) row.tau_max = std::max(row.tau_max, m.tau_max);
                row.verdicts_ok = rep.verdicts.all_ok();
            }
        } catch (const std::exception& e) {
            row.exit_code = ExitCode::RuntimeError;
            row.message = e.what();
        }
    };

    jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(rows.size(), 1));
    if (jobs == 1) {
        for (std::size_t k = 0; k < rows.size(); ++k) run_row(k);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < jobs; ++w) {
            pool.emplace_back([&] {
                for (std::size_t k = next++; k < rows.size(); k = next++) run_row(k);
            });
        }
        for (auto& t : pool) t.join();
    }

    std::filesystem::create_directories(base);
    std::ostringstream os;
    write_sweep_csv(os, rows);
    write_file(base / "sweep.csv", os.str());
    return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
    out << "row,parameter,value,exit_code,consensus,t_end,fitted_decay_rate,tau_max,verdicts_ok\n";
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const SweepRow& r = rows[k];
        out << k << ',' << r.parameter << ',' << r.value << ',' << static_cast<int>(r.exit_code) << ','
            << (r.consensus ? 1 : 0) << ',' << format_double(r.t_end) << ','
            << (r.fitted_decay_rate ? format_double(*r.fitted_decay_rate) : std::string()) << ','
            << format_double(r.tau_max) << ',' << (r.verdicts_ok ? 1 : 0) << '\n';
    }
}

}  // namespace hkdelay
