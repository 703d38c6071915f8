#include "censlasso/tuning.hpp"

#include <cmath>
#include <ostream>

#include "censlasso/errors.hpp"
#include "censlasso/parallel.hpp"

namespace censlasso {

BicPenalty parse_bic_penalty(const std::string& text) {
  if (text == "log_n_over_n" || text == "n") return BicPenalty::LogNOverN;
  if (text == "log_nu_over_nu" || text == "nu") return BicPenalty::LogNuOverNu;
  throw Error(ErrorCode::InvalidSpec, "unknown BIC penalty '" + text + "'");
}

std::string to_string(BicPenalty mode) {
  return mode == BicPenalty::LogNOverN ? "log_n_over_n" : "log_nu_over_nu";
}

void BicConfig::validate() const {
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 0.0) || !std::isfinite(grid[i])) throw Error(ErrorCode::InvalidSpec, "grid values must be finite and >= 0");
    if (i > 0 && !(grid[i] > grid[i - 1])) throw Error(ErrorCode::InvalidSpec, "grid must be strictly increasing");
  }
}

const EstimatorResult& BicPath::best() const {
  if (best_index < 0) throw Error(ErrorCode::NoConvergence, "no grid point produced a fit");
  return entries[static_cast<std::size_t>(best_index)].result;
}

std::vector<double> lambda_grid(Eigen::Index n, int count) {
  if (n < 2) throw Error(ErrorCode::InvalidSpec, "lambda grid needs n >= 2");
  if (count < 1) throw Error(ErrorCode::InvalidSpec, "lambda grid needs at least one point");
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(count));
  for (int j = 1; j <= count; ++j) grid.push_back(std::pow(static_cast<double>(n), 0.5 - 1.0 / (10.0 * j)));
  return grid;
}

namespace {

double penalty_term(const SurvivalDataset& data, std::size_t support_size, BicPenalty mode) {
  const double m = static_cast<double>(mode == BicPenalty::LogNOverN ? data.n() : data.events());
  if (m < 1.0) throw Error(ErrorCode::DegenerateWeights, "BIC penalty needs at least one event");
  return static_cast<double>(support_size) * std::log(m) / m;
}

double composite_log_fit(const SurvivalDataset& data, const IpcwWeights& weights, const EstimatorResult& result) {
  const Vector fitted = data.x() * result.beta;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    if (weights.w[i] == 0.0) continue;
    const double base = std::log(data.y()[i]) - fitted[i];
    for (Eigen::Index l = 0; l < result.intercepts.size(); ++l) {
      acc += weights.w[i] * std::abs(base - result.intercepts[l]);
    }
  }
  const double denom = static_cast<double>(data.n()) * static_cast<double>(std::max<Eigen::Index>(1, result.intercepts.size()));
  if (!(acc > 0.0)) throw Error(ErrorCode::ZeroNormalizer, "composite BIC: zero absolute residuals");
  return std::log(acc / denom);
}

}  // namespace

double bic_score(const SurvivalDataset& data, const IpcwWeights& weights, const EstimatorResult& result,
                 const EstimatorResult& unpenalized, const LossKind& loss, const BicConfig& config) {
  const double pen = penalty_term(data, result.support.size(), config.penalty_mode);
  if (config.composite_log_variant) {
    if (loss.family() != LossFamily::CompositeQuantile) {
      throw Error(ErrorCode::InvalidSpec, "the log BIC variant applies to the composite quantile loss only");
    }
    return composite_log_fit(data, weights, result) + pen;
  }
  const double base = loss_value(data, weights, loss, unpenalized.beta, unpenalized.intercepts);
  if (!(base > 0.0)) throw Error(ErrorCode::ZeroNormalizer, "BIC normalizer is zero");
  return loss_value(data, weights, loss, result.beta, result.intercepts) / base + pen;
}

BicPath select_lambda(const SurvivalDataset& data, const IpcwWeights& weights, const FitConfig& config,
                      const BicConfig& bic, int threads) {
  config.validate();
  bic.validate();
  const std::vector<double> grid = bic.grid.empty() ? lambda_grid(data.n()) : bic.grid;

  BicPath path;
  path.unpenalized = fit_unpenalized(data, weights, config.loss, config);
  path.entries.resize(grid.size());
  parallel_for(static_cast<int>(grid.size()), threads, [&](int j) {
    BicEntry& e = path.entries[static_cast<std::size_t>(j)];
    e.lambda = grid[static_cast<std::size_t>(j)];
    try {
      FitConfig c = config;
      c.lambda = e.lambda;
      e.result = fit_adaptive_lasso(data, weights, c, path.unpenalized.beta);
      e.support_size = static_cast<int>(e.result.support.size());
      e.score = bic_score(data, weights, e.result, path.unpenalized, config.loss, bic);
    } catch (const Error& err) {
      e.failed = true;
      e.error = err.what();
    }
  });
  for (std::size_t j = 0; j < path.entries.size(); ++j) {
    const BicEntry& e = path.entries[j];
    if (e.failed) continue;
    if (path.best_index < 0 || e.score < path.entries[static_cast<std::size_t>(path.best_index)].score) {
      path.best_index = static_cast<int>(j);
    }
  }
  return path;
}

void write_path_csv(const BicPath& path, std::ostream& out) {
  const auto old = out.precision(17);
  out << "lambda,score,support_size\n";
  for (const BicEntry& e : path.entries) {
    if (e.failed) {
      out << e.lambda << ",nan,\n";
    } else {
      out << e.lambda << ',' << e.score << ',' << e.support_size << '\n';
    }
  }
  out.precision(old);
}

}  // namespace censlasso
