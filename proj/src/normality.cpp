#include "censlasso/normality.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "censlasso/errors.hpp"

namespace censlasso {

namespace {

double log_normal_cdf(double z) { return std::log(0.5 * std::erfc(-z / std::sqrt(2.0))); }

}  // namespace

double anderson_darling_p_value(double a) {
  double p = 0.0;
  if (a >= 0.6) {
    p = std::exp(1.2937 - 5.709 * a + 0.0186 * a * a);
  } else if (a >= 0.34) {
    p = std::exp(0.9177 - 4.279 * a - 1.38 * a * a);
  } else if (a >= 0.2) {
    p = 1.0 - std::exp(-8.318 + 42.796 * a - 59.938 * a * a);
  } else {
    p = 1.0 - std::exp(-13.436 + 101.14 * a - 223.73 * a * a);
  }
  return std::clamp(p, 0.0, 1.0);
}

NormalitySummary normality_summary(std::span<const double> values) {
  const auto n = static_cast<int>(values.size());
  if (n < kMinNormalitySamples) {
    throw Error(ErrorCode::TooFewSamples, "normality test needs at least 20 values, got " + std::to_string(n));
  }
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1));
  if (!(sd > 0.0) || !std::isfinite(sd)) throw Error(ErrorCode::TooFewSamples, "normality test on zero-variance data");

  std::vector<double> z(values.begin(), values.end());
  for (double& v : z) v = (v - mean) / sd;
  std::sort(z.begin(), z.end());
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    const double lo = log_normal_cdf(z[static_cast<std::size_t>(i)]);
    const double hi = log_normal_cdf(-z[static_cast<std::size_t>(n - 1 - i)]);
    s += (2.0 * (i + 1) - 1.0) * (lo + hi);
  }
  const double a2 = -n - s / n;
  const double dn = n;
  const double a_star = a2 * (1.0 + 0.75 / dn + 2.25 / (dn * dn));

  NormalitySummary out;
  out.mean = mean;
  out.std_dev = sd;
  out.ad_statistic = a_star;
  out.p_value = anderson_darling_p_value(a_star);
  out.n = n;
  return out;
}

}  // namespace censlasso
