#include "censlasso/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "censlasso/check_loss_lp.hpp"
#include "censlasso/errors.hpp"

namespace censlasso {

void FitConfig::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw Error(ErrorCode::InvalidSpec, "lambda must be finite and >= 0");
  if (!(gamma > 0.0)) throw Error(ErrorCode::InvalidSpec, "gamma must be > 0");
  if (!(tol > 0.0)) throw Error(ErrorCode::InvalidSpec, "tol must be > 0");
  if (!(beta_floor > 0.0)) throw Error(ErrorCode::InvalidSpec, "beta_floor must be > 0");
  if (max_iter < 1) throw Error(ErrorCode::InvalidSpec, "max_iter must be >= 1");
  if (weight_floor < 0.0) throw Error(ErrorCode::InvalidSpec, "weight_floor must be >= 0");
}

Vector adaptive_weights(const Vector& beta_tilde, double gamma, double beta_floor) {
  Vector out(beta_tilde.size());
  for (Eigen::Index j = 0; j < beta_tilde.size(); ++j) {
    out[j] = std::pow(std::max(std::abs(beta_tilde[j]), beta_floor), -gamma);
  }
  return out;
}

namespace {

// Rows with positive IPCW weight; the others contribute nothing.
struct WeightedRows {
  Vector response;  // log Y
  Matrix x;
  Vector w;
};

WeightedRows weighted_rows(const SurvivalDataset& data, const IpcwWeights& weights) {
  if (weights.w.size() != data.n()) throw Error(ErrorCode::DimensionMismatch, "one weight per observation required");
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    if (weights.w[i] < 0.0 || !std::isfinite(weights.w[i])) {
      throw Error(ErrorCode::DegenerateWeights, "weights must be finite and non-negative");
    }
    if (weights.w[i] > 0.0) keep.push_back(i);
  }
  if (keep.empty()) throw Error(ErrorCode::DegenerateWeights, "all weights are zero");
  WeightedRows rows;
  const auto m = static_cast<Eigen::Index>(keep.size());
  rows.response.resize(m);
  rows.x.resize(m, data.p());
  rows.w.resize(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const auto i = keep[static_cast<std::size_t>(k)];
    rows.response[k] = std::log(data.y()[i]);
    rows.x.row(k) = data.x().row(i);
    rows.w[k] = weights.w[i];
  }
  return rows;
}

int intercept_count(const LossKind& loss, bool fit_intercept) {
  if (loss.family() == LossFamily::CompositeQuantile) return loss.levels();
  return fit_intercept ? 1 : 0;
}

// ---------------------------------------------------------------------------
// Check-loss families via the interior-point LP.

EstimatorResult fit_check_loss(const WeightedRows& rows, const LossKind& loss, bool fit_intercept,
                               const Vector& penalty) {
  const Eigen::Index m = rows.x.rows();
  const Eigen::Index p = rows.x.cols();
  const int nint = intercept_count(loss, fit_intercept);
  const auto taus = loss.taus();
  const auto levels = static_cast<Eigen::Index>(taus.size());

  // A coordinate whose penalty weight exceeds the largest possible loss
  // subgradient is zero at every minimizer; drop it from the LP.
  const double tau_max = *std::max_element(taus.begin(), taus.end());
  const double slope_bound = static_cast<double>(levels) * std::max(tau_max, 1.0 - taus.front());
  std::vector<int> free_cols;
  for (Eigen::Index j = 0; j < p; ++j) {
    const double bound = slope_bound * (rows.w.array() * rows.x.col(j).array().abs()).sum();
    if (!(penalty[j] > bound)) free_cols.push_back(static_cast<int>(j));
  }
  const auto pf = static_cast<Eigen::Index>(free_cols.size());

  std::vector<int> pen_cols;
  for (Eigen::Index k = 0; k < pf; ++k) {
    if (penalty[free_cols[static_cast<std::size_t>(k)]] > 0.0) pen_cols.push_back(static_cast<int>(k));
  }
  const Eigen::Index q = nint + pf;
  const bool single_intercept = loss.family() != LossFamily::CompositeQuantile && nint == 1;
  const Eigen::Index data_rows = m * levels;
  if (pen_cols.empty() && data_rows < q) {
    throw Error(ErrorCode::DegenerateWeights, "fewer weighted observations than unknown coefficients");
  }

  CheckLossProblem pb;
  const auto total_rows = data_rows + static_cast<Eigen::Index>(pen_cols.size());
  pb.design = Matrix::Zero(total_rows, q);
  pb.response.resize(total_rows);
  pb.tau.resize(total_rows);
  for (Eigen::Index l = 0; l < levels; ++l) {
    for (Eigen::Index i = 0; i < m; ++i) {
      const Eigen::Index row = l * m + i;
      const double wi = rows.w[i];
      if (nint > 0) pb.design(row, single_intercept ? 0 : l) = wi;
      for (Eigen::Index k = 0; k < pf; ++k) {
        pb.design(row, nint + k) = wi * rows.x(i, free_cols[static_cast<std::size_t>(k)]);
      }
      pb.response[row] = wi * rows.response[i];
      pb.tau[row] = taus[static_cast<std::size_t>(l)];
    }
  }
  // c |b| = rho_{1/2}(0 - 2 c b): one pseudo-row per penalized coordinate.
  for (std::size_t u = 0; u < pen_cols.size(); ++u) {
    const Eigen::Index row = data_rows + static_cast<Eigen::Index>(u);
    const int k = pen_cols[u];
    pb.design(row, nint + k) = 2.0 * penalty[free_cols[static_cast<std::size_t>(k)]];
    pb.response[row] = 0.0;
    pb.tau[row] = 0.5;
  }

  const CheckLossSolution sol = solve_check_loss(pb);

  EstimatorResult res;
  res.intercepts = sol.coef.head(nint);
  res.beta = Vector::Zero(p);
  for (Eigen::Index k = 0; k < pf; ++k) {
    double b = sol.coef[nint + k];
    if (std::abs(b) < 1e-10) b = 0.0;
    res.beta[free_cols[static_cast<std::size_t>(k)]] = b;
  }
  res.iterations = sol.iterations;
  res.converged = sol.converged;
  res.kkt_residual = std::max(0.0, sol.gap());
  return res;
}

// ---------------------------------------------------------------------------
// Expectile family: sign-pattern Newton steps on a Gram-matrix lasso, then
// exact cyclic coordinate descent on the true objective.

struct ExpectileProblem {
  const Matrix& x;  // m x q (intercept column first when fitted)
  const Vector& y;
  const Vector& w;
  const Vector& pen;  // q
  double tau;

  double loss_at(const Vector& r) const {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < r.size(); ++i) acc += w[i] * expectile_loss(tau, r[i]);
    return acc;
  }
  double objective(const Vector& b, const Vector& r) const { return loss_at(r) + pen.dot(b.cwiseAbs()); }
  double level(double r) const { return r >= 0.0 ? tau : 1.0 - tau; }
};

double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

// argmin_b  b'Gb - 2 h'b + sum pen |b|, warm-started at b.
void gram_lasso(const Matrix& g, const Vector& h, const Vector& pen, Vector& b, double tol, int max_sweeps) {
  Vector gb = g * b;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double max_change = 0.0;
    for (Eigen::Index k = 0; k < b.size(); ++k) {
      const double gkk = g(k, k);
      double nb = 0.0;
      if (gkk > 0.0) nb = soft_threshold(h[k] - gb[k] + gkk * b[k], 0.5 * pen[k]) / gkk;
      const double d = nb - b[k];
      if (d != 0.0) {
        gb += d * g.col(k);
        b[k] = nb;
        max_change = std::max(max_change, std::abs(d));
      }
    }
    if (max_change < tol) return;
  }
}

// Exact minimizer over t of sum_i w_i rho(s_i - x_i t) + pen |t|.
double coordinate_minimizer(const ExpectileProblem& pb, const Vector& s, Eigen::Index col, double start,
                            std::vector<char>& pattern, std::vector<char>& next_pattern) {
  const auto xc = pb.x.col(col);
  const double pen = pb.pen[col];
  const Eigen::Index m = s.size();
  // D(t) = d/dt of the smooth part; nondecreasing. Fills pattern with 1{s - x t >= 0}.
  const auto eval = [&](double t, std::vector<char>& pat, double& slope) {
    double d = 0.0, sl = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      const double r = s[i] - xc[i] * t;
      const bool pos = r >= 0.0;
      pat[static_cast<std::size_t>(i)] = pos ? 1 : 0;
      const double c = pb.w[i] * (pos ? pb.tau : 1.0 - pb.tau);
      d -= 2.0 * c * xc[i] * r;
      sl += 2.0 * c * xc[i] * xc[i];
    }
    slope = sl;
    return d;
  };

  double slope0 = 0.0;
  const double d0 = eval(0.0, pattern, slope0);
  if (!(slope0 > 0.0)) return 0.0;
  double sign = 0.0;
  if (d0 < -pen) {
    sign = 1.0;
  } else if (d0 > pen) {
    sign = -1.0;
  } else {
    return 0.0;
  }
  // Root of g(t) = D(t) + sign * pen on the side sign * t > 0.
  double lo = sign > 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  double hi = sign > 0 ? std::numeric_limits<double>::infinity() : 0.0;
  double t = (start * sign > 0.0) ? start : 0.0;
  double slope = 0.0;
  double g = eval(t, pattern, slope) + sign * pen;
  for (int it = 0; it < 200; ++it) {
    if (g == 0.0) return t;
    if (g < 0.0) {
      lo = t;
    } else {
      hi = t;
    }
    double tn = t - g / slope;
    if (!(tn > lo && tn < hi)) {
      if (std::isfinite(lo) && std::isfinite(hi)) {
        tn = 0.5 * (lo + hi);
      } else if (std::isfinite(lo)) {
        tn = lo + 2.0 * std::max(1.0, std::abs(lo));
      } else {
        tn = hi - 2.0 * std::max(1.0, std::abs(hi));
      }
    }
    double sn = 0.0;
    const double gn = eval(tn, next_pattern, sn) + sign * pen;
    if (next_pattern == pattern && tn == t - g / slope) return tn;  // same linear piece: exact root
    if (std::isfinite(lo) && std::isfinite(hi) && (hi - lo) <= 1e-15 * std::max(1.0, std::abs(tn))) return tn;
    t = tn;
    g = gn;
    slope = sn;
    std::swap(pattern, next_pattern);
  }
  return t;
}

double max_kkt_violation(const ExpectileProblem& pb, const Vector& b, const Vector& r) {
  Vector gvec(r.size());
  for (Eigen::Index i = 0; i < r.size(); ++i) gvec[i] = pb.w[i] * expectile_grad(pb.tau, r[i]);
  const Vector grad = pb.x.transpose() * gvec;
  double worst = 0.0;
  for (Eigen::Index k = 0; k < b.size(); ++k) {
    const double v = b[k] != 0.0 ? std::abs(grad[k] + pb.pen[k] * (b[k] > 0 ? 1.0 : -1.0))
                                 : std::max(0.0, std::abs(grad[k]) - pb.pen[k]);
    worst = std::max(worst, v);
  }
  return worst;
}

EstimatorResult fit_expectile(const WeightedRows& rows, double tau, bool fit_intercept, const Vector& penalty,
                              const Vector& start, const FitConfig& config) {
  const Eigen::Index m = rows.x.rows();
  const Eigen::Index p = rows.x.cols();
  const int nint = fit_intercept ? 1 : 0;
  const Eigen::Index q = p + nint;
  if (!(penalty.array() > 0.0).any() && m < q) {
    throw Error(ErrorCode::DegenerateWeights, "fewer weighted observations than unknown coefficients");
  }
  Matrix x(m, q);
  if (nint) x.col(0).setOnes();
  x.rightCols(p) = rows.x;
  Vector pen(q);
  if (nint) pen[0] = 0.0;
  pen.tail(p) = penalty;
  const ExpectileProblem pb{x, rows.response, rows.w, pen, tau};

  Vector b = Vector::Zero(q);
  if (start.size() == p) b.tail(p) = start;
  Vector r = rows.response - x * b;
  int iterations = 0;

  // Stage 1: freeze the residual sign pattern, solve the weighted lasso
  // exactly, stop once the pattern reproduces itself.
  for (int outer = 0; outer < 100; ++outer) {
    ++iterations;
    Vector cw(m);
    for (Eigen::Index i = 0; i < m; ++i) cw[i] = rows.w[i] * pb.level(r[i]);
    const Matrix xc = x.array().colwise() * cw.array();
    const Matrix g = x.transpose() * xc;
    const Vector h = xc.transpose() * rows.response;
    Vector bn = b;
    gram_lasso(g, h, pen, bn, 0.01 * config.tol, 100000);
    const Vector rn = rows.response - x * bn;
    bool same = true;
    for (Eigen::Index i = 0; i < m && same; ++i) same = (rn[i] >= 0.0) == (r[i] >= 0.0);
    if (same) {
      b = bn;
      r = rn;
      break;
    }
    const double f0 = pb.objective(b, r);
    const Vector d = bn - b;
    double t = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 40; ++ls, t *= 0.5) {
      const Vector bt = b + t * d;
      const Vector rt = rows.response - x * bt;
      if (pb.objective(bt, rt) < f0) {
        b = bt;
        r = rt;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }

  // Stage 2: cyclic coordinate descent with exact one-dimensional minimization.
  std::vector<char> pat(static_cast<std::size_t>(m)), pat2(static_cast<std::size_t>(m));
  double f_prev = pb.objective(b, r);
  bool converged = false;
  for (int sweep = 0; sweep < config.max_iter; ++sweep) {
    ++iterations;
    double max_change = 0.0;
    for (Eigen::Index k = 0; k < q; ++k) {
      const Vector s = r + x.col(k) * b[k];
      const double nb = coordinate_minimizer(pb, s, k, b[k], pat, pat2);
      const double d = nb - b[k];
      if (d != 0.0) {
        r = s - x.col(k) * nb;
        b[k] = nb;
        max_change = std::max(max_change, std::abs(d));
      }
    }
    const double f = pb.objective(b, r);
    if (f > f_prev + 1e-10 * (1.0 + std::abs(f_prev))) {
      throw std::logic_error("coordinate descent increased the expectile objective");
    }
    f_prev = f;
    if (max_change < config.tol) {
      converged = true;
      break;
    }
  }

  EstimatorResult res;
  res.intercepts = b.head(nint);
  res.beta = b.tail(p);
  res.iterations = iterations;
  res.converged = converged;
  res.kkt_residual = max_kkt_violation(pb, b, r);
  return res;
}

EstimatorResult fit_with_penalty(const SurvivalDataset& data, const IpcwWeights& weights, const LossKind& loss,
                                 const FitConfig& config, const Vector& penalty, const Vector& start) {
  config.validate();
  const WeightedRows rows = weighted_rows(data, weights);
  EstimatorResult res = loss.is_check_loss()
                            ? fit_check_loss(rows, loss, config.fit_intercept, penalty)
                            : fit_expectile(rows, loss.tau(), config.fit_intercept, penalty, start, config);
  res.support = nonzero_support(res.beta);
  return res;
}

}  // namespace

EstimatorResult fit_unpenalized(const SurvivalDataset& data, const IpcwWeights& weights, const LossKind& loss,
                                const FitConfig& config) {
  const Vector zero = Vector::Zero(data.p());
  EstimatorResult res = fit_with_penalty(data, weights, loss, config, zero, Vector());
  res.lambda = 0.0;
  res.objective = objective_value(data, weights, loss, 0.0, zero, res.beta, res.intercepts);
  return res;
}

EstimatorResult fit_adaptive_lasso(const SurvivalDataset& data, const IpcwWeights& weights, const FitConfig& config,
                                   const Vector& beta_tilde) {
  if (beta_tilde.size() != data.p()) throw Error(ErrorCode::DimensionMismatch, "beta_tilde must have length p");
  config.validate();
  const Vector omega = adaptive_weights(beta_tilde, config.gamma, config.beta_floor);
  const Vector penalty = config.lambda * omega;
  EstimatorResult res = fit_with_penalty(data, weights, config.loss, config, penalty, beta_tilde);
  res.lambda = config.lambda;
  res.objective = objective_value(data, weights, config.loss, config.lambda, omega, res.beta, res.intercepts);
  return res;
}

double objective_value(const SurvivalDataset& data, const IpcwWeights& weights, const LossKind& loss, double lambda,
                       const Vector& adaptive_weights, const Vector& beta, const Vector& intercepts) {
  if (beta.size() != data.p() || adaptive_weights.size() != data.p() || weights.w.size() != data.n()) {
    throw Error(ErrorCode::DimensionMismatch, "objective_value: dimensions disagree");
  }
  const auto taus = loss.taus();
  const bool composite = loss.family() == LossFamily::CompositeQuantile;
  if (composite ? intercepts.size() != loss.levels() : intercepts.size() > 1) {
    throw Error(ErrorCode::DimensionMismatch, "objective_value: wrong number of intercepts");
  }
  const Vector fitted = data.x() * beta;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    const double wi = weights.w[i];
    if (wi == 0.0) continue;
    const double base = std::log(data.y()[i]) - fitted[i];
    if (composite) {
      for (std::size_t l = 0; l < taus.size(); ++l) {
        acc += wi * check_loss(taus[l], base - intercepts[static_cast<Eigen::Index>(l)]);
      }
    } else {
      const double u = intercepts.size() == 1 ? base - intercepts[0] : base;
      acc += wi * family_loss(loss, u);
    }
  }
  return acc + lambda * adaptive_weights.dot(beta.cwiseAbs());
}

double loss_value(const SurvivalDataset& data, const IpcwWeights& weights, const LossKind& loss, const Vector& beta,
                  const Vector& intercepts) {
  return objective_value(data, weights, loss, 0.0, Vector::Zero(data.p()), beta, intercepts);
}

}  // namespace censlasso
