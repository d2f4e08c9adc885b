#include "cbandit/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace cbandit {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<std::size_t> ranked_order(const std::vector<ScoredCustomer>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return v[a].model_score > v[b].model_score;
  });
  return order;
}

std::size_t top_count(double rho, std::size_t n) {
  // ceil(rho*n), snapping to the nearest integer first so that rho = k/10
  // on a multiple-of-ten population never overshoots from float error.
  double t = rho * static_cast<double>(n);
  double nearest = std::nearbyint(t);
  if (std::abs(t - nearest) < 1e-9 * std::max(1.0, t)) t = nearest;
  return static_cast<std::size_t>(std::ceil(t));
}

}  // namespace

std::vector<ScoredCustomer> replay_filter(const std::vector<ScoredCustomer>& scored) {
  std::vector<ScoredCustomer> kept;
  kept.reserve(scored.size());
  for (const ScoredCustomer& c : scored) {
    if (c.cohort == Cohort::holdout) {
      kept.push_back(c);
    } else if (c.observed_arm && *c.observed_arm == c.recommended_arm) {
      kept.push_back(c);
    }
  }
  return kept;
}

DecileReport decile_report(const std::vector<ScoredCustomer>& filtered) {
  std::size_t n_treatment = 0, n_holdout = 0;
  for (const ScoredCustomer& c : filtered) {
    (c.cohort == Cohort::treatment ? n_treatment : n_holdout) += 1;
  }
  if (n_treatment < 10 || n_holdout < 10) {
    throw std::invalid_argument("decile_report needs >= 10 customers per cohort");
  }

  const std::vector<std::size_t> order = ranked_order(filtered);
  const std::size_t n = order.size();

  DecileReport report;
  std::size_t start = 0;
  for (int k = 1; k <= 10; ++k) {
    std::size_t end = (static_cast<std::size_t>(k) * n + 9) / 10;  // ceil(k*n/10)
    double t_sum = 0.0, c_sum = 0.0;
    std::size_t t_cnt = 0, c_cnt = 0;
    for (std::size_t i = start; i < end; ++i) {
      const ScoredCustomer& c = filtered[order[i]];
      if (c.cohort == Cohort::treatment) {
        t_sum += c.observed_outcome;
        ++t_cnt;
      } else {
        c_sum += c.observed_outcome;
        ++c_cnt;
      }
    }
    // k-th slice from the top is decile 11-k.
    DecileRow& row = report.rows[static_cast<std::size_t>(10 - k)];
    row.treatment_count = t_cnt;
    row.control_count = c_cnt;
    row.treatment_mean = t_cnt > 0 ? t_sum / static_cast<double>(t_cnt) : kNaN;
    row.control_mean = c_cnt > 0 ? c_sum / static_cast<double>(c_cnt) : kNaN;
    row.cate = row.treatment_mean - row.control_mean;
    start = end;
  }
  return report;
}

std::vector<double> lift_curve(const std::vector<double>& ranked_outcomes,
                               const std::vector<double>& rho_grid) {
  if (ranked_outcomes.empty()) {
    throw std::invalid_argument("lift_curve: empty cohort");
  }
  std::vector<double> prefix(ranked_outcomes.size() + 1, 0.0);
  for (std::size_t i = 0; i < ranked_outcomes.size(); ++i) {
    prefix[i + 1] = prefix[i] + ranked_outcomes[i];
  }
  std::vector<double> out;
  out.reserve(rho_grid.size());
  for (double rho : rho_grid) {
    if (!(rho > 0.0) || rho > 1.0) {
      throw std::invalid_argument("lift_curve: rho must lie in (0,1]");
    }
    std::size_t k = std::min(top_count(rho, ranked_outcomes.size()),
                             ranked_outcomes.size());
    out.push_back(prefix[k] / static_cast<double>(k));
  }
  return out;
}

std::vector<double> uplift_curve(const std::vector<double>& treatment_lift,
                                 const std::vector<double>& control_lift) {
  if (treatment_lift.size() != control_lift.size()) {
    throw std::invalid_argument("uplift_curve: grid mismatch");
  }
  std::vector<double> out(treatment_lift.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = treatment_lift[i] - control_lift[i];
  }
  return out;
}

UpliftReport build_uplift_report(const std::vector<ScoredCustomer>& filtered,
                                 const std::vector<double>& rho_grid) {
  if (filtered.empty()) {
    throw std::invalid_argument("build_uplift_report: no customers");
  }
  const std::vector<std::size_t> order = ranked_order(filtered);
  const std::size_t n = order.size();

  // Cumulative cohort sums over the joint ranking.
  std::vector<double> t_sum(n + 1, 0.0), c_sum(n + 1, 0.0);
  std::vector<std::size_t> t_cnt(n + 1, 0), c_cnt(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const ScoredCustomer& c = filtered[order[i]];
    t_sum[i + 1] = t_sum[i];
    c_sum[i + 1] = c_sum[i];
    t_cnt[i + 1] = t_cnt[i];
    c_cnt[i + 1] = c_cnt[i];
    if (c.cohort == Cohort::treatment) {
      t_sum[i + 1] += c.observed_outcome;
      ++t_cnt[i + 1];
    } else {
      c_sum[i + 1] += c.observed_outcome;
      ++c_cnt[i + 1];
    }
  }

  UpliftReport report;
  report.rho_grid = rho_grid;
  report.treatment_lift.reserve(rho_grid.size());
  report.control_lift.reserve(rho_grid.size());
  for (double rho : rho_grid) {
    if (!(rho > 0.0) || rho > 1.0) {
      throw std::invalid_argument("build_uplift_report: rho must lie in (0,1]");
    }
    std::size_t k = std::min(top_count(rho, n), n);
    report.treatment_lift.push_back(
        t_cnt[k] > 0 ? t_sum[k] / static_cast<double>(t_cnt[k]) : kNaN);
    report.control_lift.push_back(
        c_cnt[k] > 0 ? c_sum[k] / static_cast<double>(c_cnt[k]) : kNaN);
  }
  report.uplift = uplift_curve(report.treatment_lift, report.control_lift);
  report.deciles = decile_report(filtered);
  return report;
}

PolicyComparison compare_policies(const UpliftReport& a, const UpliftReport& b) {
  if (a.rho_grid.size() != b.rho_grid.size()) {
    throw std::invalid_argument("compare_policies: grid mismatch");
  }
  for (std::size_t i = 0; i < a.rho_grid.size(); ++i) {
    if (std::abs(a.rho_grid[i] - b.rho_grid[i]) > 1e-12) {
      throw std::invalid_argument("compare_policies: grid mismatch");
    }
  }
  PolicyComparison out;
  out.gap_at_001 = kNaN;
  out.gap_at_01 = kNaN;
  out.gap_at_1 = kNaN;
  double above = 0.0;
  std::size_t counted = 0;
  for (std::size_t i = 0; i < a.rho_grid.size(); ++i) {
    double ua = a.uplift[i];
    double ub = b.uplift[i];
    if (std::isnan(ua) || std::isnan(ub)) continue;
    ++counted;
    if (ua > ub) {
      above += 1.0;
    } else if (ua == ub) {
      above += 0.5;
    }
    double rho = a.rho_grid[i];
    if (std::abs(rho - 0.01) < 1e-12) out.gap_at_001 = ua - ub;
    if (std::abs(rho - 0.1) < 1e-12) out.gap_at_01 = ua - ub;
    if (std::abs(rho - 1.0) < 1e-12) out.gap_at_1 = ua - ub;
  }
  out.fraction_a_above = counted > 0 ? above / static_cast<double>(counted) : kNaN;
  return out;
}

std::vector<double> default_rho_grid() {
  std::vector<double> grid;
  grid.reserve(100);
  for (int i = 1; i <= 100; ++i) {
    grid.push_back(static_cast<double>(i) / 100.0);
  }
  return grid;
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  if (std::isnan(v)) {
    os << "nan";
  } else {
    os << std::fixed << std::setprecision(6) << v;
  }
  return os.str();
}

}  // namespace

void write_decile_csv(const std::filesystem::path& path,
                      const DecileReport& report) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << "decile,treatment_mean,control_mean,cate,treatment_count,control_count\n";
  for (int decile = 1; decile <= 10; ++decile) {
    const DecileRow& row = report.rows[static_cast<std::size_t>(decile - 1)];
    out << decile << ',' << fmt(row.treatment_mean) << ',' << fmt(row.control_mean)
        << ',' << fmt(row.cate) << ',' << row.treatment_count << ','
        << row.control_count << '\n';
  }
}

void write_curve_csv(const std::filesystem::path& path,
                     const UpliftReport& report) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << "rho,treatment_lift,control_lift,uplift\n";
  for (std::size_t i = 0; i < report.rho_grid.size(); ++i) {
    out << fmt(report.rho_grid[i]) << ',' << fmt(report.treatment_lift[i]) << ','
        << fmt(report.control_lift[i]) << ',' << fmt(report.uplift[i]) << '\n';
  }
}

UpliftReport read_curve_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
  std::string line;
  if (!std::getline(in, line) ||
      line != "rho,treatment_lift,control_lift,uplift") {
    throw std::runtime_error("not a curve table: " + path.string());
  }
  UpliftReport report;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream is(line);
    std::string cell;
    std::array<double, 4> vals{};
    for (int i = 0; i < 4; ++i) {
      if (!std::getline(is, cell, ',')) {
        throw std::runtime_error("short row in curve table");
      }
      vals[static_cast<std::size_t>(i)] =
          cell == "nan" ? kNaN : std::stod(cell);
    }
    report.rho_grid.push_back(vals[0]);
    report.treatment_lift.push_back(vals[1]);
    report.control_lift.push_back(vals[2]);
    report.uplift.push_back(vals[3]);
  }
  return report;
}

}  // namespace cbandit
