#pragma once

#include <span>
#include <string>
#include <vector>

namespace censlasso {

enum class LossFamily { Median, Quantile, CompositeQuantile, Expectile, LeastSquares };

// Loss family plus its index. Construct through the named factories so the
// index invariants are checked.
class LossKind {
 public:
  static LossKind median();
  static LossKind quantile(double tau);
  static LossKind composite_quantile(int levels);
  static LossKind expectile(double tau);
  static LossKind least_squares();

  // Accepts "median", "quantile[:tau]", "composite[:J]", "expectile[:tau]",
  // "ls". Missing indices default to 0.5 (J = 10 for composite).
  static LossKind parse(const std::string& text);

  LossFamily family() const { return family_; }
  double tau() const { return tau_; }
  int levels() const { return levels_; }

  // tau_j = j / (1 + J) for the composite family; {tau} otherwise.
  std::vector<double> taus() const;
  // True for the check-loss families solved by linear programming.
  bool is_check_loss() const;
  // Family name without index: "median", "quantile", ...
  std::string name() const;
  // Family name with index, e.g. "quantile:0.3".
  std::string label() const;

  LossKind with_tau(double tau) const;

 private:
  LossKind(LossFamily f, double tau, int levels) : family_(f), tau_(tau), levels_(levels) {}
  LossFamily family_;
  double tau_;
  int levels_;
};

// rho_tau(u) = u (tau - 1{u <= 0}).
double check_loss(double tau, double u);

// rho_tau(u) = |tau - 1{u < 0}| u^2 and its derivatives with respect to a
// shift t of the residual, d/dt rho(u - t) at t = 0:
//   g_tau(u) = -2 tau u 1{u >= 0} - 2 (1 - tau) u 1{u < 0}
//   h_tau(u) =  2 tau 1{u >= 0} + 2 (1 - tau) 1{u < 0}
double expectile_loss(double tau, double u);
double expectile_grad(double tau, double u);
double expectile_hess(double tau, double u);

// Per-observation loss of a single-index family at residual u. For the
// composite family use check_loss on each level instead.
double family_loss(const LossKind& loss, double u);

// sum eps 1{eps < 0} / (sum eps 1{eps < 0} - sum eps 1{eps > 0}).
// Throws DegenerateSample when the residuals do not take both signs.
double estimate_expectile_index(std::span<const double> residuals);

// Empirical CDF at zero, (1/n) sum 1{eps < 0}.
double estimate_quantile_index(std::span<const double> residuals);

}  // namespace censlasso
