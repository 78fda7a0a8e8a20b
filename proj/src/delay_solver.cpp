#include "hkdelay/delay_solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hkdelay/csv.hpp"
#include "hkdelay/errors.hpp"

namespace hkdelay {

namespace {

// |xi - x_j(t - tau)|, leaving x_j(t - tau) in `pos`.
double delayed_distance(std::span<const double> xi, std::size_t j, double t, double tau,
                        const TrajectoryHistory& history, std::span<double> pos) {
    history.position_into(j, t - tau, pos);
    return distance(xi, pos);
}

}  // namespace

void check_settings(const DelaySolveSettings& settings) {
    if (!(settings.tolerance > 0.0)) throw ParameterError("delay solver: tolerance must be positive");
    if (settings.max_iterations < 1) throw ParameterError("delay solver: max_iterations must be >= 1");
    if (!(settings.bracket_margin >= 1.0)) {
        throw ParameterError("delay solver: bracket_margin must be >= 1");
    }
}

DelaySolution solve_delay_bisection(std::span<const double> xi, std::size_t j, double t,
                                    const TrajectoryHistory& history, double speed,
                                    const DelaySolveSettings& settings) {
    DelaySolution sol;
    sol.used_bisection = true;
    sol.delayed_pos.assign(history.dim(), 0.0);
    std::span<double> pos(sol.delayed_pos);

    const double lip = history.lipschitz(j) + settings.lipschitz_slack;
    if (!(lip < speed)) {
        throw SolverError("delay solver: history of agent " + std::to_string(j) +
                          " moves at " + format_double(lip) + " >= c = " + format_double(speed));
    }
    const double d0 = delayed_distance(xi, j, t, 0.0, history, pos);
    if (d0 == 0.0) {
        sol.tau = 0.0;
        return sol;
    }
    double lo = 0.0;
    double hi = settings.bracket_margin * d0 / (speed - lip);
    const double f_hi = speed * hi - delayed_distance(xi, j, t, hi, history, pos);
    if (!(f_hi > 0.0)) {
        throw SolverError("delay solver: bisection bracket [0, " + format_double(hi) +
                          "] does not enclose a root (is sigma >= c?)");
    }
    constexpr int kMaxHalvings = 400;
    for (int it = 0; it < kMaxHalvings && hi - lo > settings.tolerance; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double f = speed * mid - delayed_distance(xi, j, t, mid, history, pos);
        ++sol.iterations;
        if (f > 0.0) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    sol.tau = 0.5 * (lo + hi);
    const double dist = delayed_distance(xi, j, t, sol.tau, history, pos);
    sol.residual = std::abs(speed * sol.tau - dist);
    return sol;
}

DelaySolution solve_delay(std::span<const double> xi, std::size_t j, double t,
                          const TrajectoryHistory& history, double speed,
                          const DelaySolveSettings& settings, std::optional<double> warm_start) {
    DelaySolution sol;
    sol.delayed_pos.assign(history.dim(), 0.0);
    std::span<double> pos(sol.delayed_pos);

    double tau = 0.0;
    double dist = 0.0;
    if (warm_start && *warm_start >= 0.0 && std::isfinite(*warm_start) &&
        t - *warm_start >= history.t_earliest()) {
        tau = *warm_start;
        dist = delayed_distance(xi, j, t, tau, history, pos);
    } else {
        dist = delayed_distance(xi, j, t, 0.0, history, pos);
        if (dist == 0.0) return sol;
        tau = dist / speed;
        dist = delayed_distance(xi, j, t, tau, history, pos);
    }
    if (settings.record_iterates) sol.iterates.push_back(tau);

    for (int it = 0; it < settings.max_iterations; ++it) {
        const double next = dist / speed;
        ++sol.iterations;
        // Residual of the current iterate is c |tau - next|; one more step
        // shrinks it by the contraction factor L_j / c.
        if (std::abs(next - tau) <= settings.tolerance) {
            sol.tau = next;
            dist = delayed_distance(xi, j, t, next, history, pos);
            sol.residual = std::abs(speed * next - dist);
            if (settings.record_iterates) sol.iterates.push_back(next);
            return sol;
        }
        tau = next;
        if (settings.record_iterates) sol.iterates.push_back(tau);
        dist = delayed_distance(xi, j, t, tau, history, pos);
    }
    return solve_delay_bisection(xi, j, t, history, speed, settings);
}

double DelayMatrix::max_tau() const noexcept {
    double m = 0.0;
    for (double v : tau_) m = std::max(m, v);
    return m;
}

DelayMatrix all_delays(const PointSet& positions, double t, const TrajectoryHistory& history,
                       double speed, const DelaySolveSettings& settings, const DelayMatrix* warm) {
    const std::size_t n = positions.size();
    const std::size_t d = positions.dim();
    if (n != history.n_agents() || d != history.dim()) {
        throw ParameterError("all_delays: positions do not match history shape");
    }
    const bool use_warm = warm != nullptr && warm->size() == n && warm->dim() == d;
    DelayMatrix out(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        auto xi = positions[i];
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) {
                out.tau(i, i) = 0.0;
                std::copy(xi.begin(), xi.end(), out.delayed(i, i).begin());
                continue;
            }
            const std::string pair =
                "pair (" + std::to_string(i) + ", " + std::to_string(j) + ") at t = " + format_double(t) + ": ";
            DelaySolution sol;
            try {
                std::optional<double> seed;
                if (use_warm) seed = warm->tau(i, j);
                sol = solve_delay(xi, j, t, history, speed, settings, seed);
            } catch (const HistoryUnderrun& e) {
                throw HistoryUnderrun(pair + e.what(), e.deficit());
            } catch (const FutureQuery& e) {
                throw FutureQuery(pair + e.what());
            } catch (const Error& e) {
                throw SolverError(pair + e.what());
            }
            out.tau(i, j) = sol.tau;
            std::copy(sol.delayed_pos.begin(), sol.delayed_pos.end(), out.delayed(i, j).begin());
            out.max_residual = std::max(out.max_residual, sol.residual);
            out.total_iterations += sol.iterations;
            if (sol.used_bisection) ++out.bisection_fallbacks;
        }
    }
    return out;
}

}  // namespace hkdelay
