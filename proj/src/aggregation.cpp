#include "censlasso/aggregation.hpp"

#include <cmath>
#include <optional>

#include "censlasso/errors.hpp"
#include "censlasso/parallel.hpp"

namespace censlasso {

KmScope parse_km_scope(const std::string& text) {
  if (text == "per_group") return KmScope::PerGroup;
  if (text == "global") return KmScope::Global;
  throw Error(ErrorCode::InvalidSpec, "unknown km_scope '" + text + "'");
}

std::string to_string(KmScope scope) { return scope == KmScope::PerGroup ? "per_group" : "global"; }

int VoteThreshold::resolve(int K) const {
  if (!sqrt_rule) return value;
  return std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(K)) + 1e-12)));
}

VoteThreshold VoteThreshold::parse(const std::string& text) {
  if (text == "sqrt" || text == "sqrt_K") return sqrt_k();
  try {
    std::size_t used = 0;
    const int v = std::stoi(text, &used);
    if (used == text.size() && v >= 1) return fixed(v);
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::InvalidSpec, "vote threshold must be 'sqrt' or a positive integer, got '" + text + "'");
}

void AggregationPlan::validate() const {
  if (K < 1) throw Error(ErrorCode::InvalidK, "K must be >= 1");
  const int wv = w.resolve(K);
  if (wv < 1 || wv > K) throw Error(ErrorCode::InvalidSpec, "vote threshold must satisfy 1 <= w <= K");
}

std::string AggregationPlan::label() const {
  return "K=" + std::to_string(K) + ",w=" + std::to_string(w.resolve(K));
}

GroupAssignment interleaved_split(Eigen::Index n, int K) {
  if (K < 1) throw Error(ErrorCode::InvalidK, "K must be >= 1");
  if (K > n) throw Error(ErrorCode::InvalidK, "K = " + std::to_string(K) + " exceeds n = " + std::to_string(n));
  GroupAssignment out;
  const Eigen::Index size = n / K;
  out.n_used = size * K;
  out.dropped = n - out.n_used;
  if (out.dropped > 0) {
    out.warning = "dropping the last " + std::to_string(out.dropped) + " observation(s) so that K divides n";
  }
  out.groups.resize(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) {
    auto& g = out.groups[static_cast<std::size_t>(k)];
    g.reserve(static_cast<std::size_t>(size));
    for (Eigen::Index r = 0; r < size; ++r) g.push_back(static_cast<int>(r * K + k));
  }
  return out;
}

IntVector vote_counts(const std::vector<IndexSet>& supports, Eigen::Index p) {
  IntVector counts = IntVector::Zero(p);
  for (const auto& s : supports) {
    for (int j : s) {
      if (j < 0 || j >= p) throw Error(ErrorCode::DimensionMismatch, "support index out of range");
      ++counts[j];
    }
  }
  return counts;
}

IndexSet vote_support(const std::vector<IndexSet>& supports, int w) {
  int p = 0;
  for (const auto& s : supports) {
    for (int j : s) p = std::max(p, j + 1);
  }
  const IntVector counts = vote_counts(supports, p);
  IndexSet out;
  for (int j = 0; j < p; ++j) {
    if (counts[j] >= w) out.push_back(j);
  }
  return out;
}

Vector aggregate(const std::vector<EstimatorResult>& group_results, const IndexSet& voted_support, int K) {
  if (group_results.empty() || static_cast<int>(group_results.size()) != K) {
    throw Error(ErrorCode::DimensionMismatch, "expected one result per group");
  }
  const Eigen::Index p = group_results.front().beta.size();
  Vector sum = Vector::Zero(p);
  for (const auto& r : group_results) {
    if (r.beta.size() != p) throw Error(ErrorCode::DimensionMismatch, "group results differ in dimension");
    sum += r.beta;
  }
  Vector out = Vector::Zero(p);
  for (int j : voted_support) {
    if (j < 0 || j >= p) throw Error(ErrorCode::DimensionMismatch, "voted index out of range");
    out[j] = sum[j] / static_cast<double>(K);
  }
  return out;
}

AggregatedResult fit_aggregated(const SurvivalDataset& data, const AggregationPlan& plan, const FitConfig& config,
                                const BicConfig& bic, int threads) {
  plan.validate();
  config.validate();
  const GroupAssignment split = interleaved_split(data.n(), plan.K);
  const std::optional<double> floor =
      config.weight_floor > 0.0 ? std::optional<double>(config.weight_floor) : std::nullopt;

  IpcwWeights global;
  if (plan.km_scope == KmScope::Global) global = ipcw_weights(data, fit_censoring_km(data), floor);

  AggregatedResult out;
  out.K = plan.K;
  out.w = plan.w.resolve(plan.K);
  out.n_used = split.n_used;
  out.warning = split.warning;
  out.group_results.resize(static_cast<std::size_t>(plan.K));
  out.group_lambdas.assign(static_cast<std::size_t>(plan.K), config.lambda);
  out.group_bic_index.assign(static_cast<std::size_t>(plan.K), -1);

  const int group_threads = plan.K == 1 ? 1 : threads;
  const int grid_threads = plan.K == 1 ? threads : 1;
  parallel_for(plan.K, group_threads, [&](int k) {
    const auto& rows = split.groups[static_cast<std::size_t>(k)];
    const SurvivalDataset group = data.subset(rows);
    IpcwWeights weights;
    if (plan.km_scope == KmScope::Global) {
      weights.floor_used = global.floor_used;
      weights.w.resize(static_cast<Eigen::Index>(rows.size()));
      for (std::size_t i = 0; i < rows.size(); ++i) weights.w[static_cast<Eigen::Index>(i)] = global.w[rows[i]];
    } else {
      weights = ipcw_weights(group, fit_censoring_km(group), floor);
    }
    const auto slot = static_cast<std::size_t>(k);
    if (plan.per_group_tuning) {
      BicPath path = select_lambda(group, weights, config, bic, grid_threads);
      out.group_bic_index[slot] = path.best_index;
      out.group_results[slot] = path.best();
      out.group_lambdas[slot] = out.group_results[slot].lambda;
    } else {
      const EstimatorResult pilot = fit_unpenalized(group, weights, config.loss, config);
      out.group_results[slot] = fit_adaptive_lasso(group, weights, config, pilot.beta);
    }
  });

  std::vector<IndexSet> supports;
  supports.reserve(out.group_results.size());
  for (const auto& r : out.group_results) supports.push_back(r.support);
  out.vote_counts = vote_counts(supports, data.p());
  for (Eigen::Index j = 0; j < data.p(); ++j) {
    if (out.vote_counts[j] >= out.w) out.voted_support.push_back(static_cast<int>(j));
  }
  out.beta_check = aggregate(out.group_results, out.voted_support, plan.K);
  return out;
}

}  // namespace censlasso
