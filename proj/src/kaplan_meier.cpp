#include "censlasso/kaplan_meier.hpp"

#include <algorithm>
#include <iomanip>
#include <numeric>
#include <ostream>

#include "censlasso/errors.hpp"

namespace censlasso {

CensoringSurvivalCurve::CensoringSurvivalCurve(std::vector<double> jump_times, std::vector<double> values,
                                               Eigen::Index n_fit)
    : jump_times_(std::move(jump_times)), values_(std::move(values)), n_fit_(n_fit) {
  if (jump_times_.size() != values_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "curve needs one value per jump time");
  }
}

double CensoringSurvivalCurve::evaluate(double t) const {
  // Last jump time <= t.
  const auto it = std::upper_bound(jump_times_.begin(), jump_times_.end(), t);
  if (it == jump_times_.begin()) return 1.0;
  return values_[static_cast<std::size_t>(it - jump_times_.begin() - 1)];
}

CensoringSurvivalCurve fit_censoring_km(const SurvivalDataset& data) {
  const Eigen::Index n = data.n();
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  const auto& y = data.y();
  const auto& delta = data.delta();
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (y[a] != y[b]) return y[a] < y[b];
    return delta[a] > delta[b];
  });

  std::vector<double> times, values;
  double surv = 1.0;
  for (Eigen::Index rank = 1; rank <= n; ++rank) {
    const int i = order[static_cast<std::size_t>(rank - 1)];
    if (delta[i] == 1) continue;
    const double remaining = static_cast<double>(n - rank);
    surv *= remaining / (remaining + 1.0);
    if (!times.empty() && times.back() == y[i]) {
      values.back() = surv;
    } else {
      times.push_back(y[i]);
      values.push_back(surv);
    }
  }
  return CensoringSurvivalCurve(std::move(times), std::move(values), n);
}

IpcwWeights ipcw_weights(const SurvivalDataset& data, const CensoringSurvivalCurve& curve,
                         std::optional<double> floor) {
  const double fl = floor.value_or(1.0 / static_cast<double>(std::max<Eigen::Index>(curve.n_fit(), 1)));
  if (!(fl > 0.0)) throw Error(ErrorCode::InvalidSpec, "weight floor must be > 0");
  IpcwWeights out;
  out.floor_used = fl;
  out.w = Vector::Zero(data.n());
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    if (data.delta()[i] == 1) out.w[i] = 1.0 / std::max(curve.evaluate(data.y()[i]), fl);
  }
  if (!(out.w.array() > 0.0).any()) {
    throw Error(ErrorCode::DegenerateWeights, "no uncensored observation: all IPCW weights are zero");
  }
  return out;
}

void write_curve_csv(const CensoringSurvivalCurve& curve, std::ostream& out) {
  out << "time,survival\n" << std::setprecision(17) << 0 << ',' << 1 << '\n';
  for (std::size_t k = 0; k < curve.jump_times().size(); ++k) {
    out << curve.jump_times()[k] << ',' << curve.values()[k] << '\n';
  }
}

}  // namespace censlasso
