#include "hkdelay/history.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "hkdelay/csv.hpp"
#include "hkdelay/errors.hpp"

namespace hkdelay {

TrajectoryHistory::TrajectoryHistory(std::size_t n_agents, std::size_t dim)
    : n_(n_agents),
      dim_(dim),
      committed_initial_(n_agents, 0.0),
      committed_solution_(n_agents, 0.0),
      last_slope_(n_agents, 0.0) {
    if (n_agents == 0 || dim == 0) {
        throw ParameterError("TrajectoryHistory: need at least one agent and one dimension");
    }
}

double TrajectoryHistory::t_earliest() const {
    if (times_.empty()) throw RangeError("empty history");
    return times_.front();
}

double TrajectoryHistory::t_latest() const {
    if (times_.empty()) throw RangeError("empty history");
    return times_.back();
}

PointSet TrajectoryHistory::positions_at_knot(std::size_t k) const {
    auto row = knot_row(k);
    return PointSet(n_, dim_, std::vector<double>(row.begin(), row.end()));
}

double TrajectoryHistory::segment_slope(std::size_t k, std::size_t agent) const {
    return distance(knot(k + 1, agent), knot(k, agent)) / (times_[k + 1] - times_[k]);
}

void TrajectoryHistory::append(double t, const PointSet& positions) {
    if (positions.size() != n_ || positions.dim() != dim_) {
        throw ParameterError("append: position shape mismatch");
    }
    if (!std::isfinite(t)) {
        throw OrderingError("append: non-finite time");
    }
    if (!times_.empty() && !(t > times_.back())) {
        throw OrderingError("append: time " + format_double(t) + " not after t_latest " +
                            format_double(times_.back()));
    }
    if (times_.size() >= 2) {
        auto& committed = last_is_initial_ ? committed_initial_ : committed_solution_;
        for (std::size_t j = 0; j < n_; ++j) committed[j] = std::max(committed[j], last_slope_[j]);
    }
    times_.push_back(t);
    auto flat = positions.flat();
    values_.insert(values_.end(), flat.begin(), flat.end());
    if (times_.size() >= 2) {
        const std::size_t k = times_.size() - 2;
        last_is_initial_ = t <= 0.0;
        for (std::size_t j = 0; j < n_; ++j) last_slope_[j] = segment_slope(k, j);
    }
}

void TrajectoryHistory::replace_latest(const PointSet& positions) {
    if (times_.empty()) throw OrderingError("replace_latest: empty history");
    if (positions.size() != n_ || positions.dim() != dim_) {
        throw ParameterError("replace_latest: position shape mismatch");
    }
    auto flat = positions.flat();
    std::copy(flat.begin(), flat.end(), values_.end() - static_cast<std::ptrdiff_t>(n_ * dim_));
    if (times_.size() >= 2) {
        const std::size_t k = times_.size() - 2;
        for (std::size_t j = 0; j < n_; ++j) last_slope_[j] = segment_slope(k, j);
    }
}

std::size_t TrajectoryHistory::segment_for(double s) const {
    const std::size_t count = times_.size();
    if (count < 2) return 0;
    // Knots are uniform in practice: guess from the mean spacing, then correct.
    const double t0 = times_.front();
    const double span = times_.back() - t0;
    const double guess_f = (s - t0) / span * static_cast<double>(count - 1);
    std::size_t k = guess_f <= 0.0 ? 0 : std::min(static_cast<std::size_t>(guess_f), count - 2);
    for (int probe = 0; probe < 3; ++probe) {
        if (s < times_[k]) {
            if (k == 0) return 0;
            --k;
        } else if (s > times_[k + 1]) {
            if (k + 2 >= count) return count - 2;
            ++k;
        } else {
            return k;
        }
    }
    auto it = std::upper_bound(times_.begin(), times_.end(), s);
    const auto idx = static_cast<std::size_t>(std::distance(times_.begin(), it));
    return std::clamp<std::size_t>(idx == 0 ? 0 : idx - 1, 0, count - 2);
}

void TrajectoryHistory::position_into(std::size_t agent, double s, std::span<double> out) const {
    if (times_.empty()) throw RangeError("position: empty history");
    if (s < times_.front()) {
        const double deficit = times_.front() - s;
        throw HistoryUnderrun("position: query at t = " + format_double(s) +
                                  " precedes history start " + format_double(times_.front()) +
                                  " by " + format_double(deficit),
                              deficit);
    }
    if (s > times_.back()) {
        throw FutureQuery("position: query at t = " + format_double(s) + " after t_latest " +
                          format_double(times_.back()));
    }
    if (times_.size() == 1) {
        auto p = knot(0, agent);
        std::copy(p.begin(), p.end(), out.begin());
        return;
    }
    const std::size_t k = segment_for(s);
    auto a = knot(k, agent);
    auto b = knot(k + 1, agent);
    const double ta = times_[k];
    const double tb = times_[k + 1];
    if (s == ta) {
        std::copy(a.begin(), a.end(), out.begin());
        return;
    }
    if (s == tb) {
        std::copy(b.begin(), b.end(), out.begin());
        return;
    }
    const double w = (s - ta) / (tb - ta);
    for (std::size_t c = 0; c < dim_; ++c) out[c] = a[c] + w * (b[c] - a[c]);
}

std::vector<double> TrajectoryHistory::position(std::size_t agent, double s) const {
    std::vector<double> out(dim_);
    position_into(agent, s, out);
    return out;
}

PointSet TrajectoryHistory::positions_at(double s) const {
    PointSet out(n_, dim_);
    for (std::size_t j = 0; j < n_; ++j) position_into(j, s, out[j]);
    return out;
}

double TrajectoryHistory::lipschitz(std::size_t agent) const {
    return std::max({committed_initial_[agent], committed_solution_[agent], last_slope_[agent]});
}

double TrajectoryHistory::lipschitz_initial() const {
    double m = 0.0;
    for (std::size_t j = 0; j < n_; ++j) {
        m = std::max(m, committed_initial_[j]);
        if (last_is_initial_) m = std::max(m, last_slope_[j]);
    }
    return m;
}

double TrajectoryHistory::lipschitz_solution() const {
    double m = 0.0;
    for (std::size_t j = 0; j < n_; ++j) {
        m = std::max(m, committed_solution_[j]);
        if (!last_is_initial_) m = std::max(m, last_slope_[j]);
    }
    return m;
}

TrajectoryHistory materialize_initial(const InitialHistorySpec& spec, const PointSet& initial_positions,
                                      double speed, double spacing) {
    if (!(spec.depth > 0.0) || !std::isfinite(spec.depth)) {
        throw ParameterError("initial history depth must be positive and finite");
    }
    if (!(spacing > 0.0)) {
        throw ParameterError("initial history knot spacing must be positive");
    }
    const std::size_t n = initial_positions.size();
    const std::size_t d = initial_positions.dim();
    const bool linear = spec.kind == InitialHistoryKind::LinearWithVelocity;
    if (linear) {
        if (spec.velocities.size() != n || spec.velocities.dim() != d) {
            throw ParameterError("initial history: need one velocity per agent");
        }
        for (std::size_t i = 0; i < n; ++i) {
            const double v = norm(spec.velocities[i]);
            if (!(v < speed)) {
                throw LipschitzViolation("initial history: agent " + std::to_string(i) +
                                         " speed " + format_double(v) +
                                         " is not below the propagation speed " +
                                         format_double(speed));
            }
        }
    }
    const auto steps = static_cast<long long>(std::ceil(spec.depth / spacing - 1e-9));
    TrajectoryHistory history(n, d);
    PointSet row(n, d);
    for (long long k = -steps; k <= 0; ++k) {
        const double t = static_cast<double>(k) * spacing;
        for (std::size_t i = 0; i < n; ++i) {
            auto dst = row[i];
            auto x0 = initial_positions[i];
            for (std::size_t c = 0; c < d; ++c) {
                dst[c] = linear ? x0[c] + spec.velocities[i][c] * t : x0[c];
            }
        }
        history.append(t, row);
    }
    return history;
}

void write_trajectory_csv(std::ostream& out, const TrajectoryHistory& history) {
    out << "t,agent_id";
    for (std::size_t c = 0; c < history.dim(); ++c) out << ",x_" << c;
    out << '\n';
    for (std::size_t k = 0; k < history.knot_count(); ++k) {
        const std::string t = format_double(history.knot_time(k));
        for (std::size_t j = 0; j < history.n_agents(); ++j) {
            out << t << ',' << j;
            for (double v : history.knot(k, j)) out << ',' << format_double(v);
            out << '\n';
        }
    }
}

}  // namespace hkdelay
