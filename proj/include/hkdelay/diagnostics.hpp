#pragma once

// Quantities from the consensus estimates, evaluated on a computed trajectory:
// group diameter and radius, the uniform delay bound tau, the window
// diameters K_n over I_n = [(n-1) tau, n tau], the weight floor psibar, and
// the contraction factor 1 - e^{-tau} alpha. verify_bounds() checks each
// inequality with the discretization tolerance max(1e-8, 4 sigma dt).

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hkdelay/history.hpp"
#include "hkdelay/model.hpp"
#include "hkdelay/point_set.hpp"

namespace hkdelay {

double diameter(const PointSet& positions);
double radius(const PointSet& positions);

/// <x_i - x_j, y>; y must be a unit vector.
double delta_projection(const PointSet& positions, std::size_t i, std::size_t j,
                        std::span<const double> y);

/// Sample times of window [t_start, t_end]: every knot inside it plus both
/// endpoints, or `samples` uniformly spaced times when samples >= 2.
std::vector<double> window_sample_times(const TrajectoryHistory& history, double t_start,
                                        double t_end, std::size_t samples = 0);

/// max over s, t in I_n and agents i, j of |x_i(s) - x_j(t)|.
/// Throws RangeError if the history does not cover I_n.
double window_diameter(const TrajectoryHistory& history, int n, double tau,
                       std::size_t samples_per_window = 0);

struct ProjectionBounds {
    double min = 0.0;  ///< m_n^y
    double max = 0.0;  ///< M_n^y
};

/// Extremes of <x_j(s), y> over I_n and all agents. Throws DomainError unless |y| = 1.
ProjectionBounds projections(const TrajectoryHistory& history, int n, double tau,
                             std::span<const double> y, std::size_t samples_per_window = 0);

/// Largest amount by which some <x_i(t), y>, t >= (n-1) tau, leaves
/// [m_n^y, M_n^y] (<= 0 when the sandwich holds).
double projection_sandwich_excess(const TrajectoryHistory& history, int n, double tau,
                                  std::span<const double> y);

/// alpha = min{e^{-2 tau}, (1 - e^{-tau}) psibar}.
double contraction_alpha(double tau, double psibar);
/// 1 - e^{-tau} alpha.
double contraction_factor(double tau, double psibar);

struct BoundConstants {
    double speed = 0.0;
    double sigma = 0.0;
    /// Largest slope of the prescribed initial paths.
    double lipschitz_initial = 0.0;
    /// max(sigma, lipschitz_initial): the speed bound while delays can reach t <= 0.
    double sigma_eff_startup = 0.0;
    double s0 = 0.0;     ///< d_x(0) / (c - sigma)
    double r0 = 0.0;     ///< max of R_x over [-S0, 0]
    double tau = 0.0;    ///< 2 R0 / (c - sigma)
    double depth = 0.0;  ///< materialized past interval length
    double psibar = 0.0;
    double alpha = 0.0;
    double contraction_factor = 1.0;

    /// Speed bound in effect at time t.
    double sigma_eff(double t) const { return t < depth ? sigma_eff_startup : sigma; }
};

/// Constants that depend only on the model and the initial datum. R0 is taken
/// over the knots of [-S0, 0] available in `initial`.
BoundConstants compute_constants(const ModelParameters& params, double sigma,
                                 const TrajectoryHistory& initial, bool use_rearrangement = true);

/// Default materialization depth: 1.5 max(S0, tau).
double default_history_depth(double s0, double tau);

struct StepMetrics {
    double t = 0.0;
    double diameter = 0.0;
    double radius = 0.0;
    double tau_max = 0.0;
    double speed_max = 0.0;
};

struct WindowRecord {
    int n = 0;
    double t_start = 0.0;
    double t_end = 0.0;
    double k = 0.0;
};

struct Violation {
    std::string check;
    double where = 0.0;  ///< time, or window index for window checks
    double lhs = 0.0;
    double rhs = 0.0;
};

struct Verdicts {
    bool radius_ok = true;
    bool delay_bound_ok = true;
    bool delay_bound_strict_ok = true;  ///< with sigma instead of sigma_eff; informational
    bool lipschitz_ok = true;
    bool k_monotone_ok = true;
    bool k_contraction_ok = true;
    bool mixing_ok = true;
    bool pair_estimate_ok = true;
    bool decay_ok = true;
    std::vector<Violation> violations;

    bool all_ok() const;
};

/// What verify_bounds needs to know about the run besides the trajectory.
struct RunFacts {
    double dt = 0.01;
    double consensus_epsilon = 1e-6;
    bool terminated_by_consensus = false;
    /// Largest |x_i'| over every right-hand-side evaluation, minus sigma_eff there.
    double max_speed_excess = 0.0;
    std::size_t samples_per_window = 0;
};

struct DiagnosticsReport {
    std::vector<StepMetrics> series;
    BoundConstants constants;
    std::vector<WindowRecord> windows;
    std::optional<double> fitted_decay_rate;
    double tol_diag = 0.0;
    Verdicts verdicts;
};

/// Window diameters K_n for every window fully covered by the history,
/// starting at n = 0 when the past reaches -tau.
std::vector<WindowRecord> window_series(const TrajectoryHistory& history, double tau, double t_end,
                                        std::size_t samples_per_window = 0);

/// Least-squares slope of log K_n against n tau, over the later half of the
/// windows with n >= 1 and K_n > 0. Empty if fewer than two such windows.
std::optional<double> fit_decay_rate(const std::vector<WindowRecord>& windows, double tau);

/// Fills windows, the decay fit and all verdicts of `report` (series and
/// constants must already be set).
void verify_bounds(DiagnosticsReport& report, const TrajectoryHistory& history, const RunFacts& facts);

void write_metrics_csv(std::ostream& out, const std::vector<StepMetrics>& series);
void write_windows_csv(std::ostream& out, const std::vector<WindowRecord>& windows);

}  // namespace hkdelay
