#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "eate/dgp.hpp"
#include "eate/estimators.hpp"
#include "eate/variance.hpp"

namespace eate {

/// a_n as a function of n: coef * n^exponent, clamped to [1, n]. Parsed from
/// "c", "c*n", "c*n^e" where c may itself be written "a^b".
struct ARule {
  double coef = 1.0;
  double exponent = 0.0;
  std::string label = "1";

  double operator()(Index n) const;
};

ARule parse_a_rule(const std::string& text);

enum class DesignChoice { Bernoulli, Complete, Paired };

const char* design_choice_name(DesignChoice d);
DesignChoice parse_design_choice(const std::string& name);

/// Bernoulli(1/2), Complete(n, floor(n/2)), or pairs of adjacent covariate ranks.
Design build_design(DesignChoice choice, Index n, const Eigen::VectorXd& covariate);

/// 10^v rounded to the nearest even integer.
Index round_even(double v);
/// n = round_even(10^(from + x/per_decade)) for x = 0 .. (to - from) * per_decade.
std::vector<Index> log_grid(double from_exp, double to_exp, int per_decade);

struct SimConfig {
  int schema = 1;
  DgpKind kind = DgpKind::Group;
  std::vector<ARule> a_rules{ARule{}};
  /// Only used by the adversarial construction.
  double lambda = 0.25;
  std::vector<DesignChoice> designs{DesignChoice::Bernoulli};
  std::vector<Index> n_grid{100};
  long reps = 2000;
  std::uint64_t seed = 20240101;
  std::vector<EstimatorKind> estimators{EstimatorKind::HT, EstimatorKind::Hajek};
  std::vector<InflationKind> variance_kinds;
  bool redraw_graph = true;
  bool fixed_latents = false;
  double alpha = 0.05;
  std::optional<double> eate_reference;

  void validate() const;
};

/// Strict JSON reader: unknown keys are ParseErrors anchored to their line.
SimConfig parse_sim_config(const std::string& text);
SimConfig read_sim_config(const std::string& path);

struct CellSpec {
  DgpKind kind;
  std::size_t rule_index;
  std::string a_rule;
  double a_n;
  DesignChoice design;
  Index n;
  std::string label;
  std::uint64_t id;
};

std::string cell_label(DgpKind kind, const std::string& a_rule, DesignChoice design, Index n);
std::vector<CellSpec> expand_cells(const SimConfig& config);

struct ReplicationRecord {
  std::size_t cell = 0;
  long rep = 0;
  /// Indexed like SimConfig::estimators; NaN marks an empty arm.
  std::vector<double> estimates;
  double v_ber = 0.0;
  /// Indexed like SimConfig::variance_kinds.
  std::vector<double> variances;
  double eate_reference = 1.0;
};

struct ExperimentResult {
  std::vector<CellSpec> cells;
  /// Cell-major, rep order inside each cell.
  std::vector<ReplicationRecord> records;
  /// RMSE per estimator of the no-interference Bernoulli cell at n = 100.
  std::vector<double> baseline_rmse;
};

/// Runs every cell. Replication r of a cell draws from stream_key(seed, cell id, r),
/// so results do not depend on `workers`.
ExperimentResult run_experiment(const SimConfig& config, int workers = 1);

/// Records of a single cell, without the baseline pass.
std::vector<ReplicationRecord> run_cell(const SimConfig& config, const CellSpec& cell,
                                        std::size_t cell_index, int workers = 1);

struct SummaryRow {
  std::string dgp;
  std::string design;
  Index n = 0;
  std::string a_rule;
  double a_n = 1.0;
  std::string estimator;
  double bias = 0.0;
  double sd = 0.0;
  double rmse = 0.0;
  double rmse_norm = 0.0;
  /// NaN when the kind was not requested.
  double cov_ber = 0.0, cov_avg = 0.0, cov_max = 0.0, cov_sr = 0.0;
  long reps = 0;
};

/// Aggregates per cell and estimator. sd is the population standard
/// deviation; coverage counts Chebyshev intervals around each estimate.
std::vector<SummaryRow> summarize(const SimConfig& config, const ExperimentResult& result);

void write_summary(std::ostream& out, const std::vector<SummaryRow>& rows);
void write_records(std::ostream& out, const SimConfig& config, const ExperimentResult& result);

/// Least-squares slope of log(y) on log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace eate
