#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "censlasso/solvers.hpp"

namespace censlasso {

enum class BicPenalty { LogNOverN, LogNuOverNu };

BicPenalty parse_bic_penalty(const std::string& text);
std::string to_string(BicPenalty mode);

struct BicConfig {
  BicPenalty penalty_mode = BicPenalty::LogNOverN;
  std::vector<double> grid;  // empty: lambda_grid(n)
  // Composite quantile only: log of the averaged weighted absolute residuals
  // in place of the normalized loss.
  bool composite_log_variant = false;

  void validate() const;
};

struct BicEntry {
  double lambda = 0.0;
  double score = 0.0;
  int support_size = 0;
  bool failed = false;
  std::string error;
  EstimatorResult result;
};

struct BicPath {
  std::vector<BicEntry> entries;
  int best_index = -1;
  EstimatorResult unpenalized;

  const EstimatorResult& best() const;
};

// lambda_j = n^(1/2 - 1/(10 j)), j = 1..count.
std::vector<double> lambda_grid(Eigen::Index n, int count = 20);

// loss(result) / loss(unpenalized) + |support(result)| log(m) / m with
// m = n or the number of events.
double bic_score(const SurvivalDataset& data, const IpcwWeights& weights, const EstimatorResult& result,
                 const EstimatorResult& unpenalized, const LossKind& loss, const BicConfig& config);

// One unpenalized fit, then one adaptive-LASSO fit per grid value. Grid
// points are evaluated on up to `threads` workers; failed points are kept
// in the path with failed = true and never selected. Ties go to the
// smallest lambda.
BicPath select_lambda(const SurvivalDataset& data, const IpcwWeights& weights, const FitConfig& config,
                      const BicConfig& bic, int threads = 1);

// Columns lambda,score,support_size.
void write_path_csv(const BicPath& path, std::ostream& out);

}  // namespace censlasso
