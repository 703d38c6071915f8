#pragma once

#include "censlasso/kaplan_meier.hpp"
#include "censlasso/losses.hpp"
#include "censlasso/survival_data.hpp"

namespace censlasso {

struct FitConfig {
  LossKind loss = LossKind::median();
  double lambda = 0.0;
  double gamma = 1.0;      // adaptive weight power
  int max_iter = 10000;    // coordinate-descent sweeps
  double tol = 1e-8;       // max coordinate change at convergence
  double weight_floor = 0.0;  // IPCW floor used by pipelines; 0 means 1/n_fit
  double beta_floor = 1e-10;  // floor on |beta_tilde_j| in the adaptive weights
  bool fit_intercept = false;

  void validate() const;
};

struct EstimatorResult {
  Vector beta;
  // Composite quantile: one intercept per level. Otherwise one entry when an
  // intercept is fitted, none when it is not.
  Vector intercepts;
  IndexSet support;
  double objective = 0.0;
  double lambda = 0.0;
  int iterations = 0;
  bool converged = false;
  // Duality gap for the check-loss families, max subgradient violation for
  // the expectile family.
  double kkt_residual = 0.0;
};

// omega_j = max(|beta_tilde_j|, beta_floor)^(-gamma)
Vector adaptive_weights(const Vector& beta_tilde, double gamma, double beta_floor);

// Minimizer of sum_i w_i rho(log Y_i - [b] - X_i' beta). Check-loss families
// go through the interior-point LP; the expectile family through coordinate
// descent.
EstimatorResult fit_unpenalized(const SurvivalDataset& data, const IpcwWeights& weights, const LossKind& loss,
                                const FitConfig& config);

// Adaptive-LASSO estimator with penalty lambda * sum_j omega_j |beta_j| and
// omega computed from beta_tilde. Intercepts are never penalized.
EstimatorResult fit_adaptive_lasso(const SurvivalDataset& data, const IpcwWeights& weights, const FitConfig& config,
                                   const Vector& beta_tilde);

// Weighted empirical loss plus lambda * sum_j adaptive_weights_j |beta_j|.
double objective_value(const SurvivalDataset& data, const IpcwWeights& weights, const LossKind& loss, double lambda,
                       const Vector& adaptive_weights, const Vector& beta, const Vector& intercepts);

// objective_value without the penalty.
double loss_value(const SurvivalDataset& data, const IpcwWeights& weights, const LossKind& loss, const Vector& beta,
                  const Vector& intercepts);

}  // namespace censlasso
