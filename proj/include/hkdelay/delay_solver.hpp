#pragma once

// Solves c * tau = |x_i(t) - x_j(t - tau)| for the travel time tau of
// information from agent j to agent i, against a recorded history of x_j.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "hkdelay/history.hpp"
#include "hkdelay/point_set.hpp"

namespace hkdelay {

struct DelaySolveSettings {
    /// Absolute tolerance on tau (time units).
    double tolerance = 1e-12;
    int max_iterations = 100;
    /// Multiplies the a priori delay bound to form the bisection bracket.
    double bracket_margin = 1.1;
    /// Slack added to the history Lipschitz constant when forming the bracket.
    double lipschitz_slack = 1e-9;
    /// Keep every fixed-point iterate in DelaySolution::iterates.
    bool record_iterates = false;
};

void check_settings(const DelaySolveSettings& settings);

struct DelaySolution {
    double tau = 0.0;
    std::vector<double> delayed_pos;
    /// |c tau - |x_i - x_j(t - tau)||
    double residual = 0.0;
    int iterations = 0;
    bool used_bisection = false;
    std::vector<double> iterates;
};

/// Fixed-point iteration tau <- |xi - x_j(t - tau)| / c, started from
/// `warm_start` if given, else from the instantaneous distance. Falls back to
/// bisection when the iteration does not settle within max_iterations.
DelaySolution solve_delay(std::span<const double> xi, std::size_t j, double t,
                          const TrajectoryHistory& history, double speed,
                          const DelaySolveSettings& settings = {},
                          std::optional<double> warm_start = std::nullopt);

/// Bisection on f(tau) = c tau - |xi - x_j(t - tau)| over [0, margin * bound],
/// with bound = |xi - x_j(t)| / (c - L_j). Throws SolverError if the bracket
/// does not change sign (L_j >= c).
DelaySolution solve_delay_bisection(std::span<const double> xi, std::size_t j, double t,
                                    const TrajectoryHistory& history, double speed,
                                    const DelaySolveSettings& settings = {});

/// All ordered pairs at time t. Entry (i, j) is the delay with which agent i
/// observes agent j; the diagonal is tau = 0 with the agent's own position.
class DelayMatrix {
public:
    DelayMatrix() = default;
    DelayMatrix(std::size_t n_agents, std::size_t dim)
        : n_(n_agents), dim_(dim), tau_(n_agents * n_agents, 0.0),
          delayed_(n_agents * n_agents * dim, 0.0) {}

    std::size_t size() const noexcept { return n_; }
    std::size_t dim() const noexcept { return dim_; }
    double tau(std::size_t i, std::size_t j) const noexcept { return tau_[i * n_ + j]; }
    double& tau(std::size_t i, std::size_t j) noexcept { return tau_[i * n_ + j]; }
    std::span<const double> delayed(std::size_t i, std::size_t j) const noexcept {
        return {delayed_.data() + (i * n_ + j) * dim_, dim_};
    }
    std::span<double> delayed(std::size_t i, std::size_t j) noexcept {
        return {delayed_.data() + (i * n_ + j) * dim_, dim_};
    }
    double max_tau() const noexcept;

    /// Largest residual over the solved pairs.
    double max_residual = 0.0;
    int total_iterations = 0;
    int bisection_fallbacks = 0;

private:
    std::size_t n_ = 0;
    std::size_t dim_ = 0;
    std::vector<double> tau_;
    std::vector<double> delayed_;
};

/// Solves every off-diagonal pair. `warm` (same shape) seeds each pair with
/// its previous delay. A failing pair aborts; the message names the pair.
DelayMatrix all_delays(const PointSet& positions, double t, const TrajectoryHistory& history,
                       double speed, const DelaySolveSettings& settings = {},
                       const DelayMatrix* warm = nullptr);

}  // namespace hkdelay
