#pragma once

#include <span>

namespace censlasso {

struct NormalitySummary {
  double mean = 0.0;
  double std_dev = 0.0;
  double ad_statistic = 0.0;  // A*^2, small-sample adjusted
  double p_value = 0.0;
  int n = 0;
};

inline constexpr int kMinNormalitySamples = 20;

// Anderson-Darling test for normality with estimated mean and variance.
// Throws TooFewSamples for fewer than 20 values or zero variance.
NormalitySummary normality_summary(std::span<const double> values);

// p-value of the adjusted statistic A*^2 (D'Agostino and Stephens).
double anderson_darling_p_value(double a_star);

}  // namespace censlasso
