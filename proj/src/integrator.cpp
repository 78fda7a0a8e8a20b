#include "hkdelay/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "hkdelay/csv.hpp"
#include "hkdelay/errors.hpp"

namespace hkdelay {

std::string to_string(Scheme scheme) { return scheme == Scheme::Heun ? "heun" : "euler"; }

PointSet random_box_positions(std::size_t n_agents, std::size_t dim, double half_width,
                              std::uint64_t seed) {
    if (!(half_width > 0.0) || !std::isfinite(half_width)) {
        throw ParameterError("random box half-width must be positive and finite");
    }
    std::mt19937_64 engine(seed);
    PointSet out(n_agents, dim);
    for (double& v : out.flat()) {
        const double u = static_cast<double>(engine() >> 11) * 0x1.0p-53;  // [0, 1)
        v = half_width * (2.0 * u - 1.0);
    }
    return out;
}

RhsResult rhs(const PointSet& positions, double t, const TrajectoryHistory& history,
              const ModelParameters& params, const DelaySolveSettings& settings,
              const DelayMatrix* warm) {
    const std::size_t n = positions.size();
    const std::size_t d = positions.dim();
    RhsResult out;
    out.delays = all_delays(positions, t, history, params.speed, settings, warm);
    out.velocity = PointSet(n, d);
    const double weight = 1.0 / static_cast<double>(n - 1);
    std::vector<double> diff(d);
    for (std::size_t i = 0; i < n; ++i) {
        auto xi = positions[i];
        auto vi = out.velocity[i];
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            auto seen = out.delays.delayed(i, j);
            for (std::size_t c = 0; c < d; ++c) diff[c] = seen[c] - xi[c];
            const double influence = params.psi(norm(diff));
            for (std::size_t c = 0; c < d; ++c) vi[c] += influence * diff[c];
        }
        for (std::size_t c = 0; c < d; ++c) vi[c] *= weight;
        out.speed_max = std::max(out.speed_max, norm(vi));
    }
    return out;
}

RhsResult rhs(const SimulationState& state, const ModelParameters& params,
              const DelaySolveSettings& settings) {
    const DelayMatrix* warm = state.last_delays.size() == state.positions.size() ? &state.last_delays : nullptr;
    return rhs(state.positions, state.t, state.history, params, settings, warm);
}

EvalSummary summarize(const RhsResult& result, double t) {
    return {t, result.speed_max, result.delays.max_residual, result.delays.total_iterations,
            result.delays.bisection_fallbacks};
}

StepAudit step(SimulationState& state, const SimulationConfig& config, const RhsResult* at_t) {
    StepAudit audit;
    const ModelParameters& params = config.params;
    std::optional<RhsResult> own;
    if (at_t == nullptr) {
        own = rhs(state, params, config.delay_settings);
        audit.evaluations.push_back(summarize(*own, state.t));
        at_t = &*own;
    }
    const double dt = config.dt;
    const double t_next = static_cast<double>(state.step_count + 1) * dt;
    const std::size_t n = state.positions.size();
    const std::size_t d = state.positions.dim();

    PointSet next(n, d);
    auto x = state.positions.flat();
    auto v0 = at_t->velocity.flat();
    auto out = next.flat();
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = x[k] + dt * v0[k];
    state.history.append(t_next, next);

    if (config.scheme == Scheme::Heun) {
        RhsResult corrector = rhs(next, t_next, state.history, params, config.delay_settings, &at_t->delays);
        audit.evaluations.push_back(summarize(corrector, t_next));
        auto v1 = corrector.velocity.flat();
        for (std::size_t k = 0; k < out.size(); ++k) out[k] = x[k] + 0.5 * dt * (v0[k] + v1[k]);
        state.history.replace_latest(next);
        state.last_delays = std::move(corrector.delays);
    } else {
        state.last_delays = at_t->delays;
    }
    state.positions = std::move(next);
    state.t = t_next;
    ++state.step_count;
    return audit;
}

PreparedRun prepare(const SimulationConfig& config) {
    const ModelParameters& params = config.params;
    ValidationOptions vopts;
    vopts.r_max = config.sigma_r_max;
    const ValidationReport report = validate(params, vopts);
    if (!report.ok()) {
        throw ParameterError(report.failures());
    }
    std::vector<std::string> problems;
    if (!(config.dt > 0.0) || !std::isfinite(config.dt)) problems.push_back("dt must be positive");
    if (!(config.t_max > 0.0)) problems.push_back("t_max must be positive");
    if (!(config.consensus_epsilon > 0.0)) problems.push_back("consensus_epsilon must be positive");
    if (config.history_depth && !(*config.history_depth > 0.0)) {
        problems.push_back("history depth must be positive");
    }
    if (!problems.empty()) {
        std::string msg;
        for (const auto& p : problems) msg += (msg.empty() ? "" : "\n") + p;
        throw ParameterError(msg);
    }
    check_settings(config.delay_settings);

    PointSet x0;
    if (const auto* explicit_pos = std::get_if<PointSet>(&config.initial_positions)) {
        if (explicit_pos->size() != params.n_agents || explicit_pos->dim() != params.dim) {
            throw ParameterError("initial positions: expected " + std::to_string(params.n_agents) +
                                 " points of dimension " + std::to_string(params.dim));
        }
        x0 = *explicit_pos;
    } else {
        x0 = random_box_positions(params.n_agents, params.dim,
                                  std::get<RandomBox>(config.initial_positions).half_width, config.seed);
    }

    PreparedRun prepared;
    const double sigma = report.sigma;
    InitialHistorySpec spec;
    spec.kind = config.history_kind;
    spec.velocities = config.history_velocities;

    try {
        const double s0 = diameter(x0) / (params.speed - sigma);
        spec.depth = std::max(s0, config.dt);
        const TrajectoryHistory probe = materialize_initial(spec, x0, params.speed, config.dt);
        const BoundConstants rough = compute_constants(params, sigma, probe, config.use_rearrangement);

        const double wanted = default_history_depth(rough.s0, rough.tau);
        spec.depth = config.history_depth.value_or(std::max(wanted, config.dt));
        if (spec.depth < rough.s0) {
            prepared.warnings.push_back("history depth " + format_double(spec.depth) +
                                        " is shorter than S0 = " + format_double(rough.s0));
        }
        prepared.state.history = materialize_initial(spec, x0, params.speed, config.dt);
        prepared.constants =
            compute_constants(params, sigma, prepared.state.history, config.use_rearrangement);
        if (params.psi.domain_end() < 2.0 * prepared.constants.r0) {
            throw RangeError("psi table ends at " + format_double(params.psi.domain_end()) +
                             " but distances up to 2 R0 = " + format_double(2.0 * prepared.constants.r0) +
                             " can occur");
        }
    } catch (const RangeError& e) {
        throw ParameterError(e.what());
    }
    if (prepared.constants.tau > 0.0 && config.dt > prepared.constants.tau / 10.0) {
        prepared.warnings.push_back("dt " + format_double(config.dt) + " exceeds tau/10 = " +
                                    format_double(prepared.constants.tau / 10.0));
    }
    prepared.state.positions = std::move(x0);
    prepared.state.t = 0.0;
    prepared.state.step_count = 0;
    return prepared;
}

RunResult run(const SimulationConfig& config) {
    PreparedRun prepared = prepare(config);
    RunResult result;
    result.warnings = std::move(prepared.warnings);
    result.state = std::move(prepared.state);
    result.report.constants = prepared.constants;
    SimulationState& state = result.state;
    RunStats& stats = result.stats;
    const BoundConstants& k = result.report.constants;

    auto account = [&stats, &k](const EvalSummary& e) {
        ++stats.rhs_evaluations;
        stats.delay_iterations += static_cast<std::size_t>(e.delay_iterations);
        stats.bisection_fallbacks += static_cast<std::size_t>(e.bisection_fallbacks);
        stats.max_residual = std::max(stats.max_residual, e.max_residual);
        stats.max_speed_excess = std::max(stats.max_speed_excess, e.speed_max - k.sigma_eff(e.t));
    };

    const double t_stop = config.t_max * (1.0 - 1e-12);
    try {
        while (true) {
            const RhsResult eval = rhs(state, config.params, config.delay_settings);
            account(summarize(eval, state.t));
            StepMetrics m;
            m.t = state.t;
            m.diameter = diameter(state.positions);
            m.radius = radius(state.positions);
            m.tau_max = eval.delays.max_tau();
            m.speed_max = eval.speed_max;
            result.report.series.push_back(m);
            if (m.diameter < config.consensus_epsilon) {
                result.terminated_by_consensus = true;
                break;
            }
            if (state.t >= t_stop) break;
            const StepAudit audit = step(state, config, &eval);
            for (const auto& e : audit.evaluations) account(e);
        }
    } catch (const Error& e) {
        result.error = e.what();
    }

    RunFacts facts;
    facts.dt = config.dt;
    facts.consensus_epsilon = config.consensus_epsilon;
    facts.terminated_by_consensus = result.terminated_by_consensus;
    facts.max_speed_excess = stats.max_speed_excess;
    facts.samples_per_window = config.samples_per_window;
    try {
        verify_bounds(result.report, state.history, facts);
    } catch (const Error& e) {
        if (!result.error) result.error = std::string("diagnostics: ") + e.what();
    }
    return result;
}

}  // namespace hkdelay
