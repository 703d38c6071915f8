#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "censlasso/aggregation.hpp"
#include "censlasso/normality.hpp"
#include "censlasso/survival_data.hpp"

namespace censlasso {

// BIC over lambda_grid(N) per group, or the fixed value N^(1/2 - 1/(10 j))
// with N the size of the data being fitted.
struct LambdaRule {
  bool bic_grid = true;
  int j = 1;

  double fixed_lambda(Eigen::Index n) const;
  std::string label() const;
  // "bic_grid" or "fixed:j"
  static LambdaRule parse(const std::string& text);
};

struct SimulationSpec {
  int M = 100;
  GenerationSpec generation = GenerationSpec::simulation_default(1000, 10);
  std::vector<LossKind> methods = {LossKind::expectile(0.5), LossKind::median(), LossKind::quantile(0.5)};
  std::vector<AggregationPlan> plans = {AggregationPlan{}};
  LambdaRule lambda_rule;
  std::uint64_t master_seed = 1;
  bool compare_full_data = false;
  // Replace the expectile and quantile indices by estimates from the latent
  // errors of each replication.
  bool estimate_tau = true;
  BicConfig bic;
  std::optional<double> censoring_bound;  // calibrated when absent
  int threads = 1;

  void validate() const;
};

// Pure function of (master_seed, replication).
std::uint64_t replication_seed(std::uint64_t master_seed, std::uint64_t replication);

double metric_false_zeros(const std::vector<Vector>& estimates, const IndexSet& active_set);
double metric_false_nonzeros(const std::vector<Vector>& estimates, const IndexSet& active_set, Eigen::Index p);

struct CoordinateNormality {
  int coordinate = 0;  // 0-based
  std::optional<NormalitySummary> summary;
  std::string error;
};

struct CellReport {
  std::string method;  // loss label as configured
  std::string plan;    // "K=5,w=2" or "full"
  int K = 1;
  int w = 1;
  int replications = 0;
  double false_zero_pct = 0.0;
  double false_nonzero_pct = 0.0;
  double l1_bias_active = 0.0;   // mean ||(beta_check - beta0)_A||_1
  double l2_error_active = 0.0;  // mean ||(beta_check - beta0)_A||_2
  double mean_lambda = 0.0;
  std::vector<Vector> estimates;                 // per successful replication
  std::vector<std::vector<double>> deviations;   // per active coordinate: sqrt(n)(beta_check_j - beta0_j)
  std::vector<CoordinateNormality> normality;
  std::vector<int> bic_histogram;                // counts of the selected grid index, all groups
  double mean_fit_seconds = 0.0;                 // not part of the deterministic report
};

struct SimulationReport {
  SimulationSpec spec;
  double censoring_bound = 0.0;
  double mean_censoring_rate = 0.0;
  double mean_tau_expectile = 0.0;
  double mean_tau_quantile = 0.0;
  std::vector<CellReport> cells;
  std::vector<std::uint64_t> failed_seeds;
  std::vector<std::string> failure_messages;
};

SimulationReport run_study(const SimulationSpec& spec);

// One summary line per cell.
void print_summary(const SimulationReport& report, std::ostream& out);

// report.json, selection.csv, deviations.csv, bic_histogram.csv and
// timings.csv. Everything except timings.csv is deterministic.
void write_report(const SimulationReport& report, const std::filesystem::path& dir);
std::string report_json(const SimulationReport& report);

struct BenchRow {
  int K = 1;
  double total_seconds = 0.0;
  std::vector<double> method_seconds;  // in spec.methods order
};

// One dataset from master_seed; K = 1 first, then every plan with K > 1.
// Each method runs the full split-tune-vote pipeline.
std::vector<BenchRow> timing_benchmark(const SimulationSpec& spec);

// Columns K,total,<method labels>.
void write_bench_csv(const std::vector<BenchRow>& rows, const SimulationSpec& spec, std::ostream& out);

}  // namespace censlasso
