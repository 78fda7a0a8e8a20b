#pragma once

// Influence functions psi(r) and the standing assumptions the consensus
// estimates rely on: psi(0) = 1, psi > 0, psi nonincreasing, psi Lipschitz,
// and sigma = sup_{r>0} psi(r) r strictly below the propagation speed c.

#include <cstddef>
#include <filesystem>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace hkdelay {

enum class PsiKind { Reciprocal, PowerLaw, Exponential, Custom };

std::string to_string(PsiKind kind);

/// Tabulated sample (r, psi(r)).
struct PsiSample {
    double r;
    double psi;
};

/// Immutable influence function with its certified constants.
class InfluenceFunction {
public:
    /// psi(r) = 1 / (1 + r)
    static InfluenceFunction reciprocal();
    /// psi(r) = (1 + r^2)^(-beta), beta > 0
    static InfluenceFunction power_law(double beta);
    /// psi(r) = exp(-r)
    static InfluenceFunction exponential();
    /// Piecewise-linear interpolation of `table`. The first sample must sit at
    /// r = 0 and r must be strictly increasing; psi(0) is not forced to 1 here
    /// so that validation can report it.
    static InfluenceFunction custom(std::vector<PsiSample> table);

    PsiKind kind() const noexcept { return kind_; }
    double beta() const noexcept { return beta_; }
    const std::vector<PsiSample>& table() const noexcept { return table_; }

    /// Global Lipschitz constant of psi on its domain.
    double lipschitz_const() const noexcept { return lipschitz_; }
    /// sup over the whole domain of psi(r) r (infinite for PowerLaw beta < 1/2).
    double sigma() const noexcept { return sigma_; }
    double psi_at_zero() const noexcept { return psi_at_zero_; }
    /// Largest admissible argument (infinite for the closed-form kinds).
    double domain_end() const noexcept { return domain_end_; }

    double operator()(double r) const;

private:
    InfluenceFunction() = default;

    PsiKind kind_ = PsiKind::Reciprocal;
    double beta_ = 0.0;
    std::vector<PsiSample> table_;
    std::vector<double> prefix_min_;
    double lipschitz_ = 0.0;
    double sigma_ = 0.0;
    double psi_at_zero_ = 1.0;
    double domain_end_ = std::numeric_limits<double>::infinity();

    friend double rearrangement(const InfluenceFunction& psi, double u);
};

/// Evaluates psi(r). Throws DomainError for r < 0, RangeError past a Custom table.
double eval_psi(const InfluenceFunction& psi, double r);

/// sup over (0, r_max] of psi(r) r. Closed form for the built-in kinds; for
/// Custom, a grid maximum plus half-grid Lipschitz slack. `r_max` may be
/// infinite; Custom tables are then (and otherwise) clipped to the table end.
double compute_sigma(const InfluenceFunction& psi, double r_max);

/// Psi(u) = min over [0, u] of psi.
double rearrangement(const InfluenceFunction& psi, double u);

/// psi(2 r0) / (N - 1): lower bound on each normalized interaction weight.
/// With `use_rearrangement` the nonincreasing rearrangement is used instead of psi.
double psibar(const InfluenceFunction& psi, std::size_t n_agents, double r0,
              bool use_rearrangement = true);

struct ModelParameters {
    std::size_t n_agents = 2;
    std::size_t dim = 1;
    double speed = 1.0;
    InfluenceFunction psi = InfluenceFunction::reciprocal();
};

struct ValidationCheck {
    std::string name;
    bool passed = true;
    bool required = true;
    std::string detail;
};

struct ValidationReport {
    std::vector<ValidationCheck> checks;
    /// sigma over (0, r_max] as used for the speed condition.
    double sigma = 0.0;

    bool ok() const;
    /// Details of the failed required checks, one per line.
    std::string failures() const;
};

struct ValidationOptions {
    /// Upper end of the sigma supremum; infinite means the global supremum.
    double r_max = std::numeric_limits<double>::infinity();
    std::size_t grid_points = 10000;
    /// When false a non-monotone psi is reported but not fatal, since the
    /// bounds remain valid with the nonincreasing rearrangement substituted.
    bool require_monotone = false;
};

/// Checks every standing assumption; failures are entries, never exceptions.
ValidationReport validate(const ModelParameters& params, const ValidationOptions& options = {});

/// Reads a two-column (r, psi) text table. Blank lines and '#' comments are
/// ignored; a leading non-numeric header line is skipped.
std::vector<PsiSample> load_psi_table(const std::filesystem::path& path);

}  // namespace hkdelay
