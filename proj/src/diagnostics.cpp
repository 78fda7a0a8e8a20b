#include "hkdelay/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "hkdelay/csv.hpp"
#include "hkdelay/errors.hpp"
#include "hkdelay/kernels.hpp"

namespace hkdelay {

namespace {

bool close_to(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)); }

// Positions of all agents at each sample time, as an SoA cloud.
kernels::SoaCloud window_cloud(const TrajectoryHistory& history, const std::vector<double>& times) {
    const std::size_t n = history.n_agents();
    const std::size_t d = history.dim();
    kernels::SoaCloud cloud(times.size() * n, d);
    std::vector<double> p(d);
    std::size_t idx = 0;
    for (double s : times) {
        for (std::size_t j = 0; j < n; ++j, ++idx) {
            history.position_into(j, s, p);
            for (std::size_t c = 0; c < d; ++c) cloud.at(idx, c) = p[c];
        }
    }
    return cloud;
}

void check_unit(std::span<const double> y) {
    if (std::abs(norm(y) - 1.0) > 1e-12) {
        throw DomainError("direction must be a unit vector (|y| = " + format_double(norm(y)) + ")");
    }
}

}  // namespace

double diameter(const PointSet& positions) {
    if (positions.size() < 2) return 0.0;
    const auto cloud = kernels::SoaCloud::from_points(positions);
    return std::sqrt(kernels::max_pair_dist2(cloud.view()));
}

double radius(const PointSet& positions) {
    const auto cloud = kernels::SoaCloud::from_points(positions);
    return std::sqrt(kernels::max_norm2(cloud.view()));
}

double delta_projection(const PointSet& positions, std::size_t i, std::size_t j,
                        std::span<const double> y) {
    check_unit(y);
    double s = 0.0;
    for (std::size_t c = 0; c < positions.dim(); ++c) s += (positions[i][c] - positions[j][c]) * y[c];
    return s;
}

std::vector<double> window_sample_times(const TrajectoryHistory& history, double t_start,
                                        double t_end, std::size_t samples) {
    if (history.empty()) throw RangeError("window: empty history");
    const double lo = history.t_earliest();
    const double hi = history.t_latest();
    if (close_to(t_start, lo)) t_start = std::max(t_start, lo);
    if (close_to(t_end, hi)) t_end = std::min(t_end, hi);
    if (t_start < lo || t_end > hi || t_end < t_start) {
        throw RangeError("window [" + format_double(t_start) + ", " + format_double(t_end) +
                         "] not covered by history [" + format_double(lo) + ", " +
                         format_double(hi) + "]");
    }
    std::vector<double> times;
    if (samples >= 2) {
        times.reserve(samples);
        for (std::size_t k = 0; k < samples; ++k) {
            const double w = static_cast<double>(k) / static_cast<double>(samples - 1);
            times.push_back(k + 1 == samples ? t_end : t_start + w * (t_end - t_start));
        }
        return times;
    }
    const auto knots = history.times();
    auto first = std::lower_bound(knots.begin(), knots.end(), t_start);
    auto last = std::upper_bound(knots.begin(), knots.end(), t_end);
    if (first == last || *first != t_start) times.push_back(t_start);
    times.insert(times.end(), first, last);
    if (times.back() != t_end) times.push_back(t_end);
    return times;
}

double window_diameter(const TrajectoryHistory& history, int n, double tau,
                       std::size_t samples_per_window) {
    if (!(tau > 0.0)) throw DomainError("window_diameter: tau must be positive");
    const auto times = window_sample_times(history, (n - 1) * tau, n * tau, samples_per_window);
    const auto cloud = window_cloud(history, times);
    return std::sqrt(kernels::max_pair_dist2(cloud.view()));
}

ProjectionBounds projections(const TrajectoryHistory& history, int n, double tau,
                             std::span<const double> y, std::size_t samples_per_window) {
    check_unit(y);
    if (y.size() != history.dim()) throw DomainError("projections: direction has wrong dimension");
    const auto times = window_sample_times(history, (n - 1) * tau, n * tau, samples_per_window);
    const auto cloud = window_cloud(history, times);
    const auto r = kernels::dot_range(cloud.view(), y);
    return {r.min, r.max};
}

double projection_sandwich_excess(const TrajectoryHistory& history, int n, double tau,
                                  std::span<const double> y) {
    const ProjectionBounds b = projections(history, n, tau, y);
    const auto times = window_sample_times(history, (n - 1) * tau, history.t_latest());
    const auto cloud = window_cloud(history, times);
    const auto r = kernels::dot_range(cloud.view(), y);
    return std::max(b.min - r.min, r.max - b.max);
}

double contraction_alpha(double tau, double psibar) {
    return std::min(std::exp(-2.0 * tau), (1.0 - std::exp(-tau)) * psibar);
}

double contraction_factor(double tau, double psibar) {
    return 1.0 - std::exp(-tau) * contraction_alpha(tau, psibar);
}

double default_history_depth(double s0, double tau) { return 1.5 * std::max(s0, tau); }

BoundConstants compute_constants(const ModelParameters& params, double sigma,
                                 const TrajectoryHistory& initial, bool use_rearrangement) {
    if (!(sigma < params.speed)) {
        throw ParameterError("sigma " + format_double(sigma) + " >= c " + format_double(params.speed));
    }
    BoundConstants k;
    k.speed = params.speed;
    k.sigma = sigma;
    k.lipschitz_initial = initial.lipschitz_initial();
    k.sigma_eff_startup = std::max(sigma, k.lipschitz_initial);
    k.depth = -initial.t_earliest();

    const double gap = params.speed - sigma;
    const PointSet x0 = initial.positions_at(0.0);
    k.s0 = diameter(x0) / gap;

    const double from = std::max(-k.s0, initial.t_earliest());
    double r0 = radius(initial.positions_at(from));
    for (std::size_t idx = 0; idx < initial.knot_count(); ++idx) {
        const double t = initial.knot_time(idx);
        if (t < from || t > 0.0) continue;
        r0 = std::max(r0, radius(initial.positions_at_knot(idx)));
    }
    k.r0 = r0;
    k.tau = 2.0 * r0 / gap;
    k.psibar = psibar(params.psi, params.n_agents, r0, use_rearrangement);
    k.alpha = contraction_alpha(k.tau, k.psibar);
    k.contraction_factor = 1.0 - std::exp(-k.tau) * k.alpha;
    return k;
}

bool Verdicts::all_ok() const {
    return radius_ok && delay_bound_ok && lipschitz_ok && k_monotone_ok && k_contraction_ok &&
           mixing_ok && pair_estimate_ok && decay_ok;
}

std::vector<WindowRecord> window_series(const TrajectoryHistory& history, double tau, double t_end,
                                        std::size_t samples_per_window) {
    std::vector<WindowRecord> out;
    if (!(tau > 0.0) || history.empty()) return out;
    const double lo = history.t_earliest();
    const int n_first = (lo <= -tau || close_to(lo, -tau)) ? 0 : 1;
    const int n_last = static_cast<int>(std::floor(t_end / tau * (1.0 + 1e-14)));
    for (int n = n_first; n <= n_last; ++n) {
        out.push_back({n, (n - 1) * tau, n * tau, window_diameter(history, n, tau, samples_per_window)});
    }
    return out;
}

std::optional<double> fit_decay_rate(const std::vector<WindowRecord>& windows, double tau) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& w : windows) {
        if (w.n >= 1 && w.k > 0.0) pts.emplace_back(w.n * tau, std::log(w.k));
    }
    if (pts.size() < 2) return std::nullopt;
    if (pts.size() >= 4) pts.erase(pts.begin(), pts.begin() + static_cast<std::ptrdiff_t>(pts.size() / 2));
    double mx = 0.0, my = 0.0;
    for (auto [x, y] : pts) {
        mx += x;
        my += y;
    }
    mx /= static_cast<double>(pts.size());
    my /= static_cast<double>(pts.size());
    double sxy = 0.0, sxx = 0.0;
    for (auto [x, y] : pts) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    return sxy / sxx;
}

void verify_bounds(DiagnosticsReport& report, const TrajectoryHistory& history, const RunFacts& facts) {
    const BoundConstants& k = report.constants;
    const double tol = std::max(1e-8, 4.0 * k.sigma * facts.dt);
    report.tol_diag = tol;
    Verdicts& v = report.verdicts;
    v = Verdicts{};
    auto fail = [&v](bool& flag, std::string check, double where, double lhs, double rhs) {
        flag = false;
        v.violations.push_back({std::move(check), where, lhs, rhs});
    };

    for (const auto& m : report.series) {
        const double bound = m.diameter / (k.speed - k.sigma_eff(m.t)) + tol;
        if (m.tau_max > bound) fail(v.delay_bound_ok, "delay_bound", m.t, m.tau_max, bound);
        const double strict = m.diameter / (k.speed - k.sigma) + tol;
        if (m.tau_max > strict) {
            v.delay_bound_strict_ok = false;
        }
        if (m.radius > k.r0 + tol) fail(v.radius_ok, "radius", m.t, m.radius, k.r0 + tol);
    }

    if (facts.max_speed_excess > 1e-9) {
        fail(v.lipschitz_ok, "velocity_bound", 0.0, facts.max_speed_excess, 1e-9);
    }
    if (history.lipschitz_solution() > k.sigma_eff_startup + 1e-9) {
        fail(v.lipschitz_ok, "trajectory_lipschitz", 0.0, history.lipschitz_solution(),
             k.sigma_eff_startup + 1e-9);
    }

    const double t_end = report.series.empty() ? 0.0 : report.series.back().t;
    report.windows = window_series(history, k.tau, t_end, facts.samples_per_window);
    const auto& w = report.windows;
    const double decay = std::exp(-k.tau);
    auto find = [&w](int n) -> const WindowRecord* {
        for (const auto& rec : w) {
            if (rec.n == n) return &rec;
        }
        return nullptr;
    };

    for (const auto& rec : w) {
        const int n = rec.n;
        if (const WindowRecord* next = find(n + 1)) {
            if (next->k > rec.k + tol) fail(v.k_monotone_ok, "K_monotone", n, next->k, rec.k + tol);

            // K_{n+1} <= e^{-tau} d_x(n tau) + (1 - e^{-tau}) K_n
            const double dx = diameter(history.positions_at(std::min(n * k.tau, history.t_latest())));
            const double mix = decay * dx + (1.0 - decay) * rec.k + tol;
            if (next->k > mix) fail(v.mixing_ok, "one_window_mixing", n, next->k, mix);
        }
        // K_{n+1} <= (1 - e^{-tau} alpha) K_{n-2}, n >= 2
        if (n >= 2) {
            const WindowRecord* prev = find(n - 2);
            const WindowRecord* next = find(n + 1);
            if (prev && next) {
                const double rhs = k.contraction_factor * prev->k + tol;
                if (next->k > rhs) fail(v.k_contraction_ok, "K_contraction", n, next->k, rhs);
            }
        }
        // Pointwise estimate on the diameter-maximizing pair at (n + 2) tau.
        const double t_hi = (n + 2) * k.tau;
        if (n >= 1 && t_hi <= t_end * (1.0 + 1e-14)) {
            const double t_at = std::min(t_hi, history.t_latest());
            const PointSet x = history.positions_at(t_at);
            std::size_t best_i = 0, best_j = 0;
            double best = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                for (std::size_t j = i + 1; j < x.size(); ++j) {
                    const double dist = distance(x[i], x[j]);
                    if (dist > best) {
                        best = dist;
                        best_i = i;
                        best_j = j;
                    }
                }
            }
            if (best > 0.0) {
                std::vector<double> y(x.dim());
                for (std::size_t c = 0; c < y.size(); ++c) y[c] = (x[best_i][c] - x[best_j][c]) / best;
                const double lhs = delta_projection(x, best_i, best_j, y);
                const auto times = window_sample_times(history, n * k.tau, t_at);
                double min_i = INFINITY, max_j = -INFINITY;
                std::vector<double> p(x.dim());
                for (double s : times) {
                    history.position_into(best_i, s, p);
                    min_i = std::min(min_i, dot(p, y));
                    history.position_into(best_j, s, p);
                    max_j = std::max(max_j, dot(p, y));
                }
                const double rhs =
                    std::exp(-2.0 * k.tau) * (min_i - max_j) + (1.0 - std::exp(-2.0 * k.tau)) * rec.k + tol;
                if (lhs > rhs) fail(v.pair_estimate_ok, "pair_estimate", n, lhs, rhs);
            }
        }
    }

    report.fitted_decay_rate = fit_decay_rate(w, k.tau);
    if (report.fitted_decay_rate && !(*report.fitted_decay_rate < 0.0)) {
        fail(v.decay_ok, "decay_rate", t_end, *report.fitted_decay_rate, 0.0);
    }
    if (facts.terminated_by_consensus && !report.series.empty() &&
        !(report.series.back().diameter < facts.consensus_epsilon)) {
        fail(v.decay_ok, "consensus", t_end, report.series.back().diameter, facts.consensus_epsilon);
    }
}

void write_metrics_csv(std::ostream& out, const std::vector<StepMetrics>& series) {
    out << "t,d_x,R_x,tau_max,speed_max\n";
    for (const auto& m : series) {
        out << format_double(m.t) << ',' << format_double(m.diameter) << ',' << format_double(m.radius)
            << ',' << format_double(m.tau_max) << ',' << format_double(m.speed_max) << '\n';
    }
}

void write_windows_csv(std::ostream& out, const std::vector<WindowRecord>& windows) {
    out << "n,t_start,t_end,K_n\n";
    for (const auto& w : windows) {
        out << w.n << ',' << format_double(w.t_start) << ',' << format_double(w.t_end) << ','
            << format_double(w.k) << '\n';
    }
}

}  // namespace hkdelay
