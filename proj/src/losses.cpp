#include "censlasso/losses.hpp"

#include <cmath>
#include <sstream>

#include "censlasso/errors.hpp"

namespace censlasso {

namespace {

void require_open_unit(double tau, const char* what) {
  if (!(tau > 0.0 && tau < 1.0)) {
    throw Error(ErrorCode::InvalidSpec, std::string(what) + " index must lie strictly inside (0, 1)");
  }
}

}  // namespace

LossKind LossKind::median() { return LossKind(LossFamily::Median, 0.5, 1); }

LossKind LossKind::quantile(double tau) {
  require_open_unit(tau, "quantile");
  return LossKind(LossFamily::Quantile, tau, 1);
}

LossKind LossKind::composite_quantile(int levels) {
  if (levels < 1) throw Error(ErrorCode::InvalidSpec, "composite quantile needs J >= 1");
  return LossKind(LossFamily::CompositeQuantile, 0.5, levels);
}

LossKind LossKind::expectile(double tau) {
  require_open_unit(tau, "expectile");
  return LossKind(LossFamily::Expectile, tau, 1);
}

LossKind LossKind::least_squares() { return LossKind(LossFamily::LeastSquares, 0.5, 1); }

LossKind LossKind::parse(const std::string& text) {
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  const bool has_arg = colon != std::string::npos;
  const std::string arg = has_arg ? text.substr(colon + 1) : std::string();
  const auto number = [&](double fallback) {
    if (!has_arg) return fallback;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(arg, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != arg.size() || arg.empty()) throw Error(ErrorCode::InvalidSpec, "bad loss index in '" + text + "'");
    return v;
  };
  if (head == "median") return median();
  if (head == "quantile") return quantile(number(0.5));
  if (head == "expectile") return expectile(number(0.5));
  if (head == "ls" || head == "least_squares") return least_squares();
  if (head == "composite" || head == "composite_quantile") {
    const double j = number(10.0);
    if (j != std::floor(j)) throw Error(ErrorCode::InvalidSpec, "composite J must be an integer");
    return composite_quantile(static_cast<int>(j));
  }
  throw Error(ErrorCode::InvalidSpec, "unknown loss family '" + text + "'");
}

std::vector<double> LossKind::taus() const {
  if (family_ != LossFamily::CompositeQuantile) return {tau_};
  std::vector<double> out;
  for (int j = 1; j <= levels_; ++j) out.push_back(static_cast<double>(j) / (1.0 + levels_));
  return out;
}

bool LossKind::is_check_loss() const {
  return family_ == LossFamily::Median || family_ == LossFamily::Quantile ||
         family_ == LossFamily::CompositeQuantile;
}

std::string LossKind::name() const {
  switch (family_) {
    case LossFamily::Median: return "median";
    case LossFamily::Quantile: return "quantile";
    case LossFamily::CompositeQuantile: return "composite";
    case LossFamily::Expectile: return "expectile";
    case LossFamily::LeastSquares: return "ls";
  }
  return "unknown";
}

std::string LossKind::label() const {
  std::ostringstream os;
  os << name();
  if (family_ == LossFamily::Quantile || family_ == LossFamily::Expectile) os << ':' << tau_;
  if (family_ == LossFamily::CompositeQuantile) os << ':' << levels_;
  return os.str();
}

LossKind LossKind::with_tau(double tau) const {
  switch (family_) {
    case LossFamily::Quantile: return quantile(tau);
    case LossFamily::Expectile: return expectile(tau);
    default: return *this;
  }
}

double check_loss(double tau, double u) { return u * (tau - (u <= 0.0 ? 1.0 : 0.0)); }

double expectile_loss(double tau, double u) { return std::abs(tau - (u < 0.0 ? 1.0 : 0.0)) * u * u; }

double expectile_grad(double tau, double u) {
  return u >= 0.0 ? -2.0 * tau * u : -2.0 * (1.0 - tau) * u;
}

double expectile_hess(double tau, double u) { return u >= 0.0 ? 2.0 * tau : 2.0 * (1.0 - tau); }

double family_loss(const LossKind& loss, double u) {
  switch (loss.family()) {
    case LossFamily::Median:
    case LossFamily::Quantile:
      return check_loss(loss.tau(), u);
    case LossFamily::Expectile:
    case LossFamily::LeastSquares:
      return expectile_loss(loss.tau(), u);
    case LossFamily::CompositeQuantile: {
      double acc = 0.0;
      for (double t : loss.taus()) acc += check_loss(t, u);
      return acc;
    }
  }
  return 0.0;
}

double estimate_expectile_index(std::span<const double> residuals) {
  double neg = 0.0, pos = 0.0;
  for (double e : residuals) {
    if (e < 0.0) neg += e;
    if (e > 0.0) pos += e;
  }
  if (neg == 0.0 || pos == 0.0) {
    throw Error(ErrorCode::DegenerateSample, "expectile index needs residuals of both signs");
  }
  return neg / (neg - pos);
}

double estimate_quantile_index(std::span<const double> residuals) {
  if (residuals.empty()) throw Error(ErrorCode::DegenerateSample, "quantile index needs residuals");
  std::size_t below = 0;
  for (double e : residuals) below += e < 0.0 ? 1 : 0;
  return static_cast<double>(below) / static_cast<double>(residuals.size());
}

}  // namespace censlasso
