#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "hkdelay/point_set.hpp"

namespace hkdelay {

/// Per-agent piecewise-linear trajectories on a shared, strictly increasing
/// knot grid. Knots at t <= 0 hold the prescribed initial paths, later knots
/// the computed solution.
///
/// Only `append` and `replace_latest` mutate; all queries are const and safe
/// to run concurrently against a history that is not being written.
class TrajectoryHistory {
public:
    TrajectoryHistory(std::size_t n_agents, std::size_t dim);

    std::size_t n_agents() const noexcept { return n_; }
    std::size_t dim() const noexcept { return dim_; }
    std::size_t knot_count() const noexcept { return times_.size(); }
    bool empty() const noexcept { return times_.empty(); }

    double t_earliest() const;
    double t_latest() const;

    std::span<const double> times() const noexcept { return times_; }
    double knot_time(std::size_t k) const { return times_[k]; }
    /// Agent `agent` at knot `k`.
    std::span<const double> knot(std::size_t k, std::size_t agent) const noexcept {
        return {values_.data() + (k * n_ + agent) * dim_, dim_};
    }
    /// All agents at knot `k`, agent-major.
    std::span<const double> knot_row(std::size_t k) const noexcept {
        return {values_.data() + k * n_ * dim_, n_ * dim_};
    }
    PointSet positions_at_knot(std::size_t k) const;

    /// Extends every agent to time t. Throws OrderingError unless t > t_latest.
    void append(double t, const PointSet& positions);
    /// Overwrites the positions at the latest knot (used by predictor-corrector steps).
    void replace_latest(const PointSet& positions);

    /// Piecewise-linear position of `agent` at time s, written into `out`.
    /// Throws HistoryUnderrun for s < t_earliest and FutureQuery for s > t_latest.
    void position_into(std::size_t agent, double s, std::span<double> out) const;
    std::vector<double> position(std::size_t agent, double s) const;
    PointSet positions_at(double s) const;

    /// Index k of the segment [t_k, t_{k+1}] containing s (k + 1 < knot_count,
    /// or k = 0 when only one knot exists). Requires t_earliest <= s <= t_latest.
    std::size_t segment_for(double s) const;

    /// Maximum segment slope of one agent over the whole record.
    double lipschitz(std::size_t agent) const;
    /// Maximum segment slope over segments ending at t <= 0, all agents.
    double lipschitz_initial() const;
    /// Maximum segment slope over segments ending at t > 0, all agents.
    double lipschitz_solution() const;

private:
    double segment_slope(std::size_t k, std::size_t agent) const;

    std::size_t n_;
    std::size_t dim_;
    std::vector<double> times_;
    std::vector<double> values_;

    // Slope maxima over all segments except the latest one, which may still
    // be replaced; the latest segment's slopes are kept separately.
    std::vector<double> committed_initial_;
    std::vector<double> committed_solution_;
    std::vector<double> last_slope_;
    bool last_is_initial_ = true;
};

enum class InitialHistoryKind { ConstantAtInitialPosition, LinearWithVelocity };

struct InitialHistorySpec {
    InitialHistoryKind kind = InitialHistoryKind::ConstantAtInitialPosition;
    /// One velocity per agent, used by LinearWithVelocity.
    PointSet velocities;
    /// Length of the materialized past interval [-depth, 0].
    double depth = 1.0;
};

/// Builds the history on [-depth, 0] with uniform knot spacing <= `spacing`
/// (the grid is anchored at t = 0). Linear paths satisfy x(s) = x(0) + v s.
/// Throws LipschitzViolation if any |v| >= c.
TrajectoryHistory materialize_initial(const InitialHistorySpec& spec, const PointSet& initial_positions,
                                      double speed, double spacing);

/// Writes `t,agent_id,x_0..x_{d-1}` rows, one per (knot, agent).
void write_trajectory_csv(std::ostream& out, const TrajectoryHistory& history);

}  // namespace hkdelay
