#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "censlasso/survival_data.hpp"

namespace censlasso {

// Right-continuous step function estimating the censoring survival
// G(t) = P(C > t). Equal to 1 before the first jump.
class CensoringSurvivalCurve {
 public:
  CensoringSurvivalCurve() = default;
  CensoringSurvivalCurve(std::vector<double> jump_times, std::vector<double> values, Eigen::Index n_fit);

  double evaluate(double t) const;

  const std::vector<double>& jump_times() const { return jump_times_; }
  const std::vector<double>& values() const { return values_; }
  Eigen::Index n_fit() const { return n_fit_; }

 private:
  std::vector<double> jump_times_;
  std::vector<double> values_;
  Eigen::Index n_fit_ = 0;
};

// Product-limit estimate of the censoring survival function. Censorings are
// the "deaths"; at tied times events are ranked before censorings.
CensoringSurvivalCurve fit_censoring_km(const SurvivalDataset& data);

struct IpcwWeights {
  Vector w;
  double floor_used = 0.0;
};

// w_i = delta_i / max(G(Y_i), floor). The default floor is 1 / n_fit.
IpcwWeights ipcw_weights(const SurvivalDataset& data, const CensoringSurvivalCurve& curve,
                         std::optional<double> floor = std::nullopt);

// Two columns, `time,survival`, starting with the (0, 1) anchor.
void write_curve_csv(const CensoringSurvivalCurve& curve, std::ostream& out);

}  // namespace censlasso
