#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "censlasso/types.hpp"

namespace censlasso {

// One right-censored record: follow-up time y = min(T, C), event flag
// delta = 1{T <= C} and the covariate row.
struct Observation {
  double y = 0.0;
  int delta = 0;
  std::vector<double> x;
};

// Column-oriented, validated, immutable collection of observations.
class SurvivalDataset {
 public:
  // Throws Error(NonPositiveTime / NonBinaryDelta / DimensionMismatch /
  // InvalidSpec) when an invariant does not hold.
  SurvivalDataset(Vector y, IntVector delta, Matrix x);

  static SurvivalDataset from_observations(std::span<const Observation> rows);

  Eigen::Index n() const { return y_.size(); }
  Eigen::Index p() const { return x_.cols(); }
  Eigen::Index events() const { return delta_.sum(); }

  const Vector& y() const { return y_; }
  const IntVector& delta() const { return delta_; }
  const Matrix& x() const { return x_; }
  Vector log_y() const { return y_.array().log().matrix(); }

  Observation observation(Eigen::Index i) const;

  // Rows in the given order; indices are 0-based.
  SurvivalDataset subset(std::span<const int> rows) const;

 private:
  Vector y_;
  IntVector delta_;
  Matrix x_;
};

SurvivalDataset parse_csv(std::istream& in, const std::string& source = "<stream>");
SurvivalDataset load_csv(const std::filesystem::path& path);
// Header `y,delta,x1,...,xp`; floats printed with 17 significant digits.
void write_csv(const SurvivalDataset& data, std::ostream& out);
void write_csv(const SurvivalDataset& data, const std::filesystem::path& path);

enum class ErrorFamily { StandardGumbel };

// Design of the synthetic AFT study:
//   log T = intercept + X beta0 + eps,  X_ij ~ N(design_mean, 1),
//   eps ~ max-Gumbel(0, 1),  C ~ U[0, c1].
struct GenerationSpec {
  int n = 1000;
  int p = 10;
  Vector beta0;
  double intercept = 0.0;
  double design_mean = 1.0;
  ErrorFamily error_family = ErrorFamily::StandardGumbel;
  double target_censoring_rate = 0.25;
  std::uint64_t seed = 1;

  IndexSet active_set() const;
  void validate() const;

  // beta0 = (1, -2, 0, ..., 0), Gaussian design with mean 1, 25% censoring.
  static GenerationSpec simulation_default(int n, int p, std::uint64_t seed = 1);
};

inline constexpr double kNoCensoring = std::numeric_limits<double>::infinity();

// Generated data together with the latent quantities behind it.
struct LatentSample {
  SurvivalDataset data;
  Vector failure_time;    // T
  Vector censoring_time;  // C (infinite when no censoring)
  Vector errors;          // eps
};

// Draw order per observation: x_1..x_p, eps, then the censoring uniform.
// A censoring bound of kNoCensoring produces delta = 1 everywhere.
LatentSample generate_latent(const GenerationSpec& spec, double censoring_bound);
SurvivalDataset generate_dataset(const GenerationSpec& spec, double censoring_bound);

// Inverse-transform draw from the max-Gumbel law F(x) = exp(-exp(-x)).
double sample_standard_gumbel(std::mt19937_64& rng);

// Expected censoring fraction P(C < T) for C ~ U[0, c1], averaged over the
// supplied failure times: mean(min(T, c1)) / c1.
double expected_censoring_fraction(const Vector& failure_times, double censoring_bound);

inline constexpr int kCalibrationSampleSize = 200000;
inline constexpr std::uint64_t kCalibrationSeed = 0x6a09e667f3bcc908ULL;

// Bisection on log(c1) against a fixed internal calibration sample so that
// the censoring fraction is within `tol` of `target_rate`.
double calibrate_censoring_bound(const GenerationSpec& spec, double target_rate,
                                 double tol = 1e-3);

}  // namespace censlasso
