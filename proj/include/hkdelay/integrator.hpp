#pragma once

// Fixed-step method of steps for
//   x_i'(t) = 1/(N-1) sum_j psi(|x~_ji - x_i|) (x~_ji - x_i),  x~_ji = x_j(t - tau_ij(t)),
// with the delays re-solved at every right-hand-side evaluation against the
// accumulated trajectory.

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "hkdelay/delay_solver.hpp"
#include "hkdelay/diagnostics.hpp"
#include "hkdelay/history.hpp"
#include "hkdelay/model.hpp"
#include "hkdelay/point_set.hpp"

namespace hkdelay {

enum class Scheme { Euler, Heun };

std::string to_string(Scheme scheme);

/// Uniform positions in [-half_width, half_width]^d drawn from the seed.
struct RandomBox {
    double half_width = 1.0;
};

struct SimulationConfig {
    ModelParameters params;
    std::variant<PointSet, RandomBox> initial_positions = RandomBox{};
    InitialHistoryKind history_kind = InitialHistoryKind::ConstantAtInitialPosition;
    PointSet history_velocities;
    /// Materialized past; defaults to 1.5 max(S0, tau).
    std::optional<double> history_depth;
    double dt = 0.01;
    double t_max = 200.0;
    double consensus_epsilon = 1e-6;
    Scheme scheme = Scheme::Euler;
    DelaySolveSettings delay_settings;
    std::uint64_t seed = 0;
    /// Upper end of the sigma supremum (infinite: global supremum).
    double sigma_r_max = std::numeric_limits<double>::infinity();
    /// Use the nonincreasing rearrangement of psi in psibar.
    bool use_rearrangement = true;
    /// Samples per window for K_n (0: every knot).
    std::size_t samples_per_window = 0;
};

/// Deterministic uniform draw: mt19937_64 with 53-bit mantissa extraction.
PointSet random_box_positions(std::size_t n_agents, std::size_t dim, double half_width,
                              std::uint64_t seed);

struct SimulationState {
    double t = 0.0;
    PointSet positions;
    TrajectoryHistory history{1, 1};
    std::size_t step_count = 0;
    /// Delays from the latest evaluation, used to warm-start the next solve.
    DelayMatrix last_delays;
};

struct RhsResult {
    PointSet velocity;
    DelayMatrix delays;
    double speed_max = 0.0;
};

/// Right-hand side at time t for the given current positions; the history
/// must already contain a knot at t equal to `positions`.
RhsResult rhs(const PointSet& positions, double t, const TrajectoryHistory& history,
              const ModelParameters& params, const DelaySolveSettings& settings,
              const DelayMatrix* warm = nullptr);
RhsResult rhs(const SimulationState& state, const ModelParameters& params,
              const DelaySolveSettings& settings);

/// Summary of one right-hand-side evaluation, for auditing.
struct EvalSummary {
    double t = 0.0;
    double speed_max = 0.0;
    double max_residual = 0.0;
    int delay_iterations = 0;
    int bisection_fallbacks = 0;
};

EvalSummary summarize(const RhsResult& result, double t);

/// Evaluations performed inside one step (not counting a supplied `at_t`).
struct StepAudit {
    std::vector<EvalSummary> evaluations;
};

/// Advances `state` by one dt and appends the accepted knot. `at_t` may carry
/// an evaluation already done at state.t. The predictor of Heun is appended
/// to the history before the corrector evaluation and then overwritten.
StepAudit step(SimulationState& state, const SimulationConfig& config,
               const RhsResult* at_t = nullptr);

struct PreparedRun {
    SimulationState state;
    BoundConstants constants;
    std::vector<std::string> warnings;
};

/// Validates, resolves initial positions, and materializes the initial history.
/// Throws ParameterError listing every failed assumption.
PreparedRun prepare(const SimulationConfig& config);

struct RunStats {
    std::size_t rhs_evaluations = 0;
    std::size_t delay_iterations = 0;
    std::size_t bisection_fallbacks = 0;
    double max_residual = 0.0;
    /// max over evaluations of (max_i |x_i'| - sigma_eff(t)).
    double max_speed_excess = -std::numeric_limits<double>::infinity();
};

struct RunResult {
    SimulationState state;
    DiagnosticsReport report;
    RunStats stats;
    bool terminated_by_consensus = false;
    /// Set when the run stopped on a runtime error; results are partial.
    std::optional<std::string> error;
    std::vector<std::string> warnings;
};

/// Integrates until d_x < epsilon or t >= t_max, then runs verify_bounds.
/// Configuration errors throw; runtime failures are reported in `error`.
RunResult run(const SimulationConfig& config);

}  // namespace hkdelay
