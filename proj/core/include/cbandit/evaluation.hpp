#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <vector>

#include "cbandit/types.hpp"

namespace cbandit {

enum class Cohort { treatment, holdout };

struct ScoredCustomer {
  ContextVector context;
  Cohort cohort = Cohort::treatment;
  ArmId recommended_arm = 1;
  double model_score = 0.0;
  // Holdout customers carry observed_arm = 0.
  std::optional<ArmId> observed_arm;
  double observed_outcome = 0.0;
};

/// Replay rule for off-policy evaluation: treatment customers are kept iff
/// the logged campaign matches the model recommendation; holdout customers
/// are always kept. Idempotent.
std::vector<ScoredCustomer> replay_filter(const std::vector<ScoredCustomer>& scored);

struct DecileRow {
  double treatment_mean = 0.0;
  double control_mean = 0.0;
  double cate = 0.0;  // treatment_mean - control_mean
  std::size_t treatment_count = 0;
  std::size_t control_count = 0;
};

/// rows[9] is decile 10 (top-ranked customers), rows[0] decile 1. A cohort
/// missing from a decile reports NaN means with a zero count.
struct DecileReport {
  std::array<DecileRow, 10> rows;
};

/// Ranks all customers jointly by descending model score (stable, so ties
/// keep input order), cuts at ceil(k*n/10) so cumulative reconstruction
/// matches lift values exactly, and reports per-decile cohort means.
DecileReport decile_report(const std::vector<ScoredCustomer>& filtered);

/// Mean outcome over the top ceil(rho*n) entries of one ranked outcome
/// sequence, per rho. The sequence must already be ranked best-first.
std::vector<double> lift_curve(const std::vector<double>& ranked_outcomes,
                               const std::vector<double>& rho_grid);

/// Pointwise treatment minus control difference over aligned grids.
std::vector<double> uplift_curve(const std::vector<double>& treatment_lift,
                                 const std::vector<double>& control_lift);

struct UpliftReport {
  std::vector<double> rho_grid;
  std::vector<double> treatment_lift;
  std::vector<double> control_lift;
  std::vector<double> uplift;
  DecileReport deciles;
};

/// Full offline report: one joint ranking, per-rho cohort means over the
/// top slice of that ranking (the cumulative view) plus the decile table
/// (the non-cumulative view of the same ranking).
UpliftReport build_uplift_report(const std::vector<ScoredCustomer>& filtered,
                                 const std::vector<double>& rho_grid);

struct PolicyComparison {
  // Fraction of grid points where a's uplift exceeds b's; ties count 1/2.
  double fraction_a_above = 0.0;
  double gap_at_001 = 0.0;  // uplift_a - uplift_b at rho = 0.01
  double gap_at_01 = 0.0;   // at rho = 0.1
  double gap_at_1 = 0.0;    // at rho = 1.0
};

PolicyComparison compare_policies(const UpliftReport& a, const UpliftReport& b);

/// {0.01, 0.02, ..., 1.00}
std::vector<double> default_rho_grid();

/// CSV emission, 6 fractional digits, fixed headers.
void write_decile_csv(const std::filesystem::path& path, const DecileReport& report);
void write_curve_csv(const std::filesystem::path& path, const UpliftReport& report);
UpliftReport read_curve_csv(const std::filesystem::path& path);

}  // namespace cbandit
