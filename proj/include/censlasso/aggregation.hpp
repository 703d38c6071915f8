#pragma once

#include <string>
#include <vector>

#include "censlasso/solvers.hpp"
#include "censlasso/tuning.hpp"

namespace censlasso {

enum class KmScope { PerGroup, Global };

KmScope parse_km_scope(const std::string& text);
std::string to_string(KmScope scope);

// Fixed vote threshold or w = floor(sqrt(K)).
struct VoteThreshold {
  bool sqrt_rule = true;
  int value = 1;

  int resolve(int K) const;
  static VoteThreshold fixed(int w) { return {false, w}; }
  static VoteThreshold sqrt_k() { return {true, 1}; }
  // "sqrt" or a positive integer.
  static VoteThreshold parse(const std::string& text);
};

struct AggregationPlan {
  int K = 1;
  VoteThreshold w = VoteThreshold::sqrt_k();
  bool per_group_tuning = true;  // BIC per group; otherwise FitConfig::lambda
  KmScope km_scope = KmScope::PerGroup;

  void validate() const;
  // "K=5,w=2"
  std::string label() const;
};

struct GroupAssignment {
  std::vector<std::vector<int>> groups;  // 0-based row indices
  Eigen::Index n_used = 0;
  Eigen::Index dropped = 0;
  std::string warning;  // non-empty when trailing rows were dropped
};

// U_k = {k, K + k, 2K + k, ...}; the last n mod K rows are dropped.
GroupAssignment interleaved_split(Eigen::Index n, int K);

// Per-coordinate count of groups whose support contains the coordinate.
IntVector vote_counts(const std::vector<IndexSet>& supports, Eigen::Index p);

// { j : count_j >= w }
IndexSet vote_support(const std::vector<IndexSet>& supports, int w);

// Mean over all K groups (zeros included) on the voted support, 0 elsewhere.
Vector aggregate(const std::vector<EstimatorResult>& group_results, const IndexSet& voted_support, int K);

struct AggregatedResult {
  IndexSet voted_support;
  Vector beta_check;
  std::vector<EstimatorResult> group_results;
  IntVector vote_counts;
  std::vector<double> group_lambdas;
  std::vector<int> group_bic_index;  // -1 with a shared lambda
  int K = 1;
  int w = 1;
  Eigen::Index n_used = 0;
  std::string warning;
};

// Split, weight (per km_scope), fit beta_tilde and beta_hat per group,
// vote and average. Groups run on up to `threads` workers; with K = 1 the
// thread budget goes to the lambda grid instead. Any group failure aborts.
AggregatedResult fit_aggregated(const SurvivalDataset& data, const AggregationPlan& plan, const FitConfig& config,
                                const BicConfig& bic = {}, int threads = 1);

}  // namespace censlasso
