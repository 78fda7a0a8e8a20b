#include "hkdelay/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "hkdelay/csv.hpp"
#include "hkdelay/errors.hpp"

namespace hkdelay {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt_double(double v) { return format_short(v); }

// Index of the last table sample with r <= x (table nonempty, x >= table[0].r).
std::size_t segment_index(const std::vector<PsiSample>& table, double x) {
    auto it = std::upper_bound(table.begin(), table.end(), x,
                               [](double v, const PsiSample& s) { return v < s.r; });
    return static_cast<std::size_t>(std::distance(table.begin(), it)) - 1;
}

double power_law_sigma(double beta, double r_max) {
    const auto g = [beta](double r) { return r * std::pow(1.0 + r * r, -beta); };
    if (beta < 0.5) {
        return std::isinf(r_max) ? kInf : g(r_max);
    }
    if (beta == 0.5) {
        // r / sqrt(1 + r^2) increases towards 1.
        return std::isinf(r_max) ? 1.0 : g(r_max);
    }
    const double r_star = 1.0 / std::sqrt(2.0 * beta - 1.0);
    return r_max >= r_star ? g(r_star) : g(r_max);
}

}  // namespace

std::string to_string(PsiKind kind) {
    switch (kind) {
        case PsiKind::Reciprocal: return "reciprocal";
        case PsiKind::PowerLaw: return "power_law";
        case PsiKind::Exponential: return "exponential";
        case PsiKind::Custom: return "custom";
    }
    return "unknown";
}

InfluenceFunction InfluenceFunction::reciprocal() {
    InfluenceFunction f;
    f.kind_ = PsiKind::Reciprocal;
    f.lipschitz_ = 1.0;
    f.sigma_ = 1.0;
    return f;
}

InfluenceFunction InfluenceFunction::power_law(double beta) {
    if (!(beta > 0.0) || !std::isfinite(beta)) {
        throw ParameterError("power_law: beta must be positive, got " + fmt_double(beta));
    }
    InfluenceFunction f;
    f.kind_ = PsiKind::PowerLaw;
    f.beta_ = beta;
    // |psi'(r)| = 2 beta r (1 + r^2)^(-beta-1) peaks at r^2 = 1 / (2 beta + 1).
    const double r_peak = 1.0 / std::sqrt(2.0 * beta + 1.0);
    f.lipschitz_ = 2.0 * beta * r_peak * std::pow(1.0 + r_peak * r_peak, -beta - 1.0);
    f.sigma_ = power_law_sigma(beta, kInf);
    return f;
}

InfluenceFunction InfluenceFunction::exponential() {
    InfluenceFunction f;
    f.kind_ = PsiKind::Exponential;
    f.lipschitz_ = 1.0;
    f.sigma_ = std::exp(-1.0);
    return f;
}

InfluenceFunction InfluenceFunction::custom(std::vector<PsiSample> table) {
    if (table.size() < 2) {
        throw ParameterError("custom psi: table needs at least two samples");
    }
    if (table.front().r != 0.0) {
        throw ParameterError("custom psi: table must start at r = 0, got r = " +
                             fmt_double(table.front().r));
    }
    for (std::size_t k = 0; k < table.size(); ++k) {
        if (!std::isfinite(table[k].r) || !std::isfinite(table[k].psi)) {
            throw ParameterError("custom psi: non-finite sample at row " + std::to_string(k));
        }
        if (k > 0 && !(table[k].r > table[k - 1].r)) {
            throw ParameterError("custom psi: r must be strictly increasing (row " +
                                 std::to_string(k) + ")");
        }
    }
    InfluenceFunction f;
    f.kind_ = PsiKind::Custom;
    f.table_ = std::move(table);
    f.psi_at_zero_ = f.table_.front().psi;
    f.domain_end_ = f.table_.back().r;
    f.prefix_min_.resize(f.table_.size());
    double running = kInf;
    double lip = 0.0;
    for (std::size_t k = 0; k < f.table_.size(); ++k) {
        running = std::min(running, f.table_[k].psi);
        f.prefix_min_[k] = running;
        if (k > 0) {
            const double slope = std::abs(f.table_[k].psi - f.table_[k - 1].psi) /
                                 (f.table_[k].r - f.table_[k - 1].r);
            lip = std::max(lip, slope);
        }
    }
    f.lipschitz_ = lip;
    f.sigma_ = compute_sigma(f, kInf);
    return f;
}

double InfluenceFunction::operator()(double r) const {
    if (!(r >= 0.0)) {
        throw DomainError("psi: argument must be nonnegative, got " + fmt_double(r));
    }
    switch (kind_) {
        case PsiKind::Reciprocal: return 1.0 / (1.0 + r);
        case PsiKind::PowerLaw: return std::pow(1.0 + r * r, -beta_);
        case PsiKind::Exponential: return std::exp(-r);
        case PsiKind::Custom: {
            if (r > domain_end_) {
                throw RangeError("psi: r = " + fmt_double(r) + " beyond table end " +
                                 fmt_double(domain_end_));
            }
            const std::size_t k = segment_index(table_, r);
            if (k + 1 >= table_.size()) return table_.back().psi;
            const PsiSample& a = table_[k];
            const PsiSample& b = table_[k + 1];
            const double w = (r - a.r) / (b.r - a.r);
            return a.psi + w * (b.psi - a.psi);
        }
    }
    return 0.0;
}

double eval_psi(const InfluenceFunction& psi, double r) { return psi(r); }

double compute_sigma(const InfluenceFunction& psi, double r_max) {
    if (!(r_max > 0.0)) {
        throw ParameterError("compute_sigma: r_max must be positive, got " + fmt_double(r_max));
    }
    switch (psi.kind()) {
        case PsiKind::Reciprocal:
            // r / (1 + r) is increasing.
            return std::isinf(r_max) ? 1.0 : r_max / (1.0 + r_max);
        case PsiKind::PowerLaw:
            return power_law_sigma(psi.beta(), r_max);
        case PsiKind::Exponential:
            return r_max >= 1.0 ? std::exp(-1.0) : r_max * std::exp(-r_max);
        case PsiKind::Custom: {
            const double end = std::min(r_max, psi.domain_end());
            constexpr std::size_t kGrid = 10000;
            const double h = end / static_cast<double>(kGrid);
            double best = 0.0;
            double psi_max = 0.0;
            for (const auto& s : psi.table()) psi_max = std::max(psi_max, std::abs(s.psi));
            for (std::size_t k = 1; k <= kGrid; ++k) {
                const double r = (k == kGrid) ? end : h * static_cast<double>(k);
                best = std::max(best, psi(r) * r);
            }
            // |d/dr (psi(r) r)| <= L r + max|psi| on [0, end].
            const double slack = 0.5 * h * (psi.lipschitz_const() * end + psi_max);
            return best + slack;
        }
    }
    return kInf;
}

double rearrangement(const InfluenceFunction& psi, double u) {
    if (!(u >= 0.0)) {
        throw DomainError("rearrangement: argument must be nonnegative");
    }
    if (psi.kind() != PsiKind::Custom) {
        // The closed-form kinds are nonincreasing.
        return psi(u);
    }
    const double at_u = psi(u);
    const std::size_t k = segment_index(psi.table(), u);
    return std::min(psi.prefix_min_[k], at_u);
}

double psibar(const InfluenceFunction& psi, std::size_t n_agents, double r0,
              bool use_rearrangement) {
    if (n_agents < 2) {
        throw ParameterError("psibar: need at least two agents");
    }
    if (!(r0 >= 0.0)) {
        throw DomainError("psibar: r0 must be nonnegative");
    }
    const double value = use_rearrangement ? rearrangement(psi, 2.0 * r0) : psi(2.0 * r0);
    return value / static_cast<double>(n_agents - 1);
}

bool ValidationReport::ok() const {
    return std::all_of(checks.begin(), checks.end(),
                       [](const ValidationCheck& c) { return c.passed || !c.required; });
}

std::string ValidationReport::failures() const {
    std::string out;
    for (const auto& c : checks) {
        if (c.passed || !c.required) continue;
        if (!out.empty()) out += '\n';
        out += c.name + ": " + c.detail;
    }
    return out;
}

ValidationReport validate(const ModelParameters& params, const ValidationOptions& options) {
    ValidationReport report;
    auto add = [&report](std::string name, bool passed, std::string detail, bool required = true) {
        report.checks.push_back({std::move(name), passed, required, std::move(detail)});
    };

    add("n_agents", params.n_agents >= 2,
        "need at least 2 agents, got " + std::to_string(params.n_agents));
    add("dim", params.dim >= 1, "dimension must be at least 1");
    const bool speed_ok = params.speed > 0.0 && std::isfinite(params.speed);
    add("speed", speed_ok, "propagation speed must be positive and finite, got " +
                               fmt_double(params.speed));

    const InfluenceFunction& psi = params.psi;
    if (psi.kind() == PsiKind::PowerLaw) {
        add("power_law_beta", psi.beta() >= 0.5,
            "beta " + fmt_double(psi.beta()) + " < 0.5 makes psi(r) r unbounded");
    }

    add("normalization", psi.psi_at_zero() == 1.0,
        "psi(0) = " + fmt_double(psi.psi_at_zero()) + ", must be exactly 1");

    double r_max = options.r_max;
    if (!(r_max > 0.0)) {
        add("r_max", false, "r_max must be positive");
        return report;
    }
    if (psi.kind() == PsiKind::Custom && std::isfinite(r_max)) {
        add("table_coverage", psi.domain_end() >= r_max,
            "table ends at r = " + fmt_double(psi.domain_end()) + " < r_max " + fmt_double(r_max));
    }

    // Grid checks on [0, grid_end].
    double grid_end = std::isfinite(r_max) ? r_max : 100.0;
    grid_end = std::min(grid_end, psi.domain_end());
    const std::size_t n = std::max<std::size_t>(options.grid_points, 2);
    const double h = grid_end / static_cast<double>(n - 1);
    bool positive = true;
    bool monotone = true;
    bool lipschitz = true;
    std::string pos_detail, mono_detail, lip_detail;
    double prev_r = 0.0;
    double prev_psi = psi(0.0);
    if (!(prev_psi > 0.0)) {
        positive = false;
        pos_detail = "psi(0) <= 0";
    }
    for (std::size_t k = 1; k < n; ++k) {
        const double r = (k == n - 1) ? grid_end : h * static_cast<double>(k);
        const double v = psi(r);
        if (positive && !(v > 0.0)) {
            positive = false;
            pos_detail = "psi(" + fmt_double(r) + ") = " + fmt_double(v);
        }
        if (monotone && v > prev_psi) {
            monotone = false;
            mono_detail = "psi increases on [" + fmt_double(prev_r) + ", " + fmt_double(r) + "]";
        }
        const double bound = psi.lipschitz_const() * (r - prev_r);
        if (lipschitz && std::abs(v - prev_psi) > bound * (1.0 + 1e-12) + 1e-15) {
            lipschitz = false;
            lip_detail = "slope exceeds " + fmt_double(psi.lipschitz_const()) + " near r = " +
                         fmt_double(r);
        }
        prev_r = r;
        prev_psi = v;
    }
    add("positivity", positive, pos_detail);
    add("monotonicity", monotone, mono_detail, options.require_monotone);
    add("lipschitz", lipschitz, lip_detail);

    report.sigma = compute_sigma(psi, r_max);
    if (speed_ok) {
        add("sigma_below_speed", report.sigma < params.speed,
            "sigma " + fmt_double(report.sigma) + " >= c " + fmt_double(params.speed));
    }
    return report;
}

std::vector<PsiSample> load_psi_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw RangeError("cannot open psi table '" + path.string() + "'");
    }
    std::vector<PsiSample> table;
    std::string line;
    std::size_t line_no = 0;
    bool seen_data = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream fields(line);
        std::string a, b, extra;
        if (!(fields >> a)) continue;
        if (!(fields >> b) || (fields >> extra)) {
            throw ParameterError(path.string() + ":" + std::to_string(line_no) +
                                 ": expected two columns");
        }
        double r = 0.0, v = 0.0;
        try {
            std::size_t used_a = 0, used_b = 0;
            r = std::stod(a, &used_a);
            v = std::stod(b, &used_b);
            if (used_a != a.size() || used_b != b.size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            if (!seen_data && table.empty()) {
                seen_data = true;  // header line
                continue;
            }
            throw ParameterError(path.string() + ":" + std::to_string(line_no) +
                                 ": non-numeric value");
        }
        seen_data = true;
        table.push_back({r, v});
    }
    return table;
}

}  // namespace hkdelay
