#include "censlasso/survival_data.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "censlasso/errors.hpp"

namespace censlasso {

SurvivalDataset::SurvivalDataset(Vector y, IntVector delta, Matrix x)
    : y_(std::move(y)), delta_(std::move(delta)), x_(std::move(x)) {
  if (y_.size() < 1) throw Error(ErrorCode::InvalidSpec, "dataset must hold at least one observation");
  if (delta_.size() != y_.size() || x_.rows() != y_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "y, delta and x must have the same number of rows");
  }
  for (Eigen::Index i = 0; i < y_.size(); ++i) {
    if (!(y_[i] > 0.0) || !std::isfinite(y_[i])) {
      throw Error(ErrorCode::NonPositiveTime, "row " + std::to_string(i + 1) + ": y must be finite and > 0");
    }
    if (delta_[i] != 0 && delta_[i] != 1) {
      throw Error(ErrorCode::NonBinaryDelta, "row " + std::to_string(i + 1) + ": delta must be 0 or 1");
    }
  }
  if (!x_.allFinite()) throw Error(ErrorCode::InvalidSpec, "covariates must be finite");
}

SurvivalDataset SurvivalDataset::from_observations(std::span<const Observation> rows) {
  if (rows.empty()) throw Error(ErrorCode::InvalidSpec, "dataset must hold at least one observation");
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto p = static_cast<Eigen::Index>(rows.front().x.size());
  Vector y(n);
  IntVector delta(n);
  Matrix x(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    if (static_cast<Eigen::Index>(row.x.size()) != p) {
      throw Error(ErrorCode::RaggedRow, "row " + std::to_string(i + 1) + " has a different covariate count");
    }
    y[i] = row.y;
    delta[i] = row.delta;
    for (Eigen::Index j = 0; j < p; ++j) x(i, j) = row.x[static_cast<std::size_t>(j)];
  }
  return SurvivalDataset(std::move(y), std::move(delta), std::move(x));
}

Observation SurvivalDataset::observation(Eigen::Index i) const {
  Observation o;
  o.y = y_[i];
  o.delta = delta_[i];
  o.x.resize(static_cast<std::size_t>(p()));
  for (Eigen::Index j = 0; j < p(); ++j) o.x[static_cast<std::size_t>(j)] = x_(i, j);
  return o;
}

SurvivalDataset SurvivalDataset::subset(std::span<const int> rows) const {
  const auto m = static_cast<Eigen::Index>(rows.size());
  Vector y(m);
  IntVector delta(m);
  Matrix x(m, p());
  for (Eigen::Index k = 0; k < m; ++k) {
    const int i = rows[static_cast<std::size_t>(k)];
    if (i < 0 || i >= n()) throw Error(ErrorCode::DimensionMismatch, "subset index out of range");
    y[k] = y_[i];
    delta[k] = delta_[i];
    x.row(k) = x_.row(i);
  }
  return SurvivalDataset(std::move(y), std::move(delta), std::move(x));
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    const auto b = field.find_first_not_of(" \t");
    const auto e = field.find_last_not_of(" \t");
    out.push_back(b == std::string::npos ? std::string() : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

}  // namespace

SurvivalDataset parse_csv(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::Io, source + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // UTF-8 BOM
  const auto header = split_fields(line);

  const auto find = [&](const std::string& name) -> int {
    const auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : static_cast<int>(it - header.begin());
  };
  const int y_col = find("y");
  const int d_col = find("delta");
  if (y_col < 0) throw Error(ErrorCode::MissingColumn, source + ": header lacks column 'y'");
  if (d_col < 0) throw Error(ErrorCode::MissingColumn, source + ": header lacks column 'delta'");

  std::vector<int> x_cols;
  for (int k = 1;; ++k) {
    const int c = find("x" + std::to_string(k));
    if (c < 0) break;
    x_cols.push_back(c);
  }
  if (x_cols.size() + 2 != header.size()) {
    throw Error(ErrorCode::MissingColumn,
                source + ": covariate columns must be named x1..xp without gaps");
  }

  std::vector<Observation> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto fields = split_fields(line);
    const std::string where = source + ":" + std::to_string(line_no);
    if (fields.size() != header.size()) {
      throw Error(ErrorCode::RaggedRow, where + ": expected " + std::to_string(header.size()) +
                                            " fields, found " + std::to_string(fields.size()));
    }
    Observation o;
    const auto& dfield = fields[static_cast<std::size_t>(d_col)];
    if (dfield == "0") {
      o.delta = 0;
    } else if (dfield == "1") {
      o.delta = 1;
    } else {
      throw Error(ErrorCode::NonBinaryDelta, where + ": delta must be 0 or 1, got '" + dfield + "'");
    }
    if (!parse_double(fields[static_cast<std::size_t>(y_col)], o.y)) {
      throw Error(ErrorCode::RaggedRow, where + ": y is not a number");
    }
    if (!(o.y > 0.0) || !std::isfinite(o.y)) {
      throw Error(ErrorCode::NonPositiveTime, where + ": y must be > 0");
    }
    o.x.resize(x_cols.size());
    for (std::size_t j = 0; j < x_cols.size(); ++j) {
      if (!parse_double(fields[static_cast<std::size_t>(x_cols[j])], o.x[j]) || !std::isfinite(o.x[j])) {
        throw Error(ErrorCode::RaggedRow, where + ": x" + std::to_string(j + 1) + " is not a finite number");
      }
    }
    rows.push_back(std::move(o));
  }
  if (rows.empty()) throw Error(ErrorCode::Io, source + ": no data rows");
  return SurvivalDataset::from_observations(rows);
}

SurvivalDataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
  return parse_csv(in, path.string());
}

void write_csv(const SurvivalDataset& data, std::ostream& out) {
  out << "y,delta";
  for (Eigen::Index j = 0; j < data.p(); ++j) out << ",x" << (j + 1);
  out << '\n' << std::setprecision(17);
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    out << data.y()[i] << ',' << data.delta()[i];
    for (Eigen::Index j = 0; j < data.p(); ++j) out << ',' << data.x()(i, j);
    out << '\n';
  }
}

void write_csv(const SurvivalDataset& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
  write_csv(data, out);
}

IndexSet GenerationSpec::active_set() const { return nonzero_support(beta0); }

void GenerationSpec::validate() const {
  if (n < 1) throw Error(ErrorCode::InvalidSpec, "generation: n must be >= 1");
  if (p < 1) throw Error(ErrorCode::InvalidSpec, "generation: p must be >= 1");
  if (beta0.size() != p) throw Error(ErrorCode::InvalidSpec, "generation: beta0 must have length p");
  if (!beta0.allFinite() || !std::isfinite(intercept) || !std::isfinite(design_mean)) {
    throw Error(ErrorCode::InvalidSpec, "generation: coefficients must be finite");
  }
  if (!(target_censoring_rate >= 0.0 && target_censoring_rate < 1.0)) {
    throw Error(ErrorCode::InvalidSpec, "generation: target_censoring_rate must lie in [0, 1)");
  }
}

GenerationSpec GenerationSpec::simulation_default(int n, int p, std::uint64_t seed) {
  GenerationSpec spec;
  spec.n = n;
  spec.p = p;
  spec.beta0 = Vector::Zero(p);
  if (p >= 1) spec.beta0[0] = 1.0;
  if (p >= 2) spec.beta0[1] = -2.0;
  spec.seed = seed;
  return spec;
}

double sample_standard_gumbel(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double u = 0.0;
  do {
    u = unif(rng);
  } while (u <= 0.0);
  return -std::log(-std::log(u));
}

LatentSample generate_latent(const GenerationSpec& spec, double censoring_bound) {
  spec.validate();
  if (!(censoring_bound > 0.0)) throw Error(ErrorCode::InvalidSpec, "censoring bound must be > 0");
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> design(spec.design_mean, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  const Eigen::Index n = spec.n;
  Matrix x(n, spec.p);
  Vector eps(n), t(n), c(n), y(n);
  IntVector delta(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < spec.p; ++j) x(i, j) = design(rng);
    eps[i] = sample_standard_gumbel(rng);
    const double u = unif(rng);
    t[i] = std::exp(spec.intercept + x.row(i).dot(spec.beta0) + eps[i]);
    c[i] = std::isinf(censoring_bound) ? censoring_bound : censoring_bound * u;
    delta[i] = t[i] <= c[i] ? 1 : 0;
    y[i] = std::min(t[i], c[i]);
  }
  // exp() can underflow to 0 for extreme draws; keep y strictly positive.
  for (Eigen::Index i = 0; i < n; ++i) y[i] = std::max(y[i], std::numeric_limits<double>::min());
  return LatentSample{SurvivalDataset(std::move(y), std::move(delta), std::move(x)), std::move(t),
                      std::move(c), std::move(eps)};
}

SurvivalDataset generate_dataset(const GenerationSpec& spec, double censoring_bound) {
  return generate_latent(spec, censoring_bound).data;
}

double expected_censoring_fraction(const Vector& failure_times, double censoring_bound) {
  if (std::isinf(censoring_bound)) return 0.0;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < failure_times.size(); ++i) {
    acc += std::min(failure_times[i], censoring_bound);
  }
  return acc / (censoring_bound * static_cast<double>(failure_times.size()));
}

double calibrate_censoring_bound(const GenerationSpec& spec, double target_rate, double tol) {
  if (!(target_rate > 0.0 && target_rate < 1.0)) {
    throw Error(ErrorCode::InvalidSpec, "calibration target rate must lie in (0, 1)");
  }
  if (!(tol > 0.0)) throw Error(ErrorCode::InvalidSpec, "calibration tolerance must be > 0");
  GenerationSpec cal = spec;
  cal.n = kCalibrationSampleSize;
  cal.seed = kCalibrationSeed;
  const Vector t = generate_latent(cal, kNoCensoring).failure_time;

  const auto rate = [&](double log_c) { return expected_censoring_fraction(t, std::exp(log_c)); };

  // rate() is non-increasing in c1; find lo with rate >= target, hi with rate <= target.
  double lo = 0.0, hi = 0.0;
  int guard = 0;
  while (rate(hi) > target_rate) {
    hi += 1.0;
    if (++guard > 700) throw Error(ErrorCode::NoConvergence, "cannot bracket the censoring bound from above");
  }
  guard = 0;
  while (rate(lo) < target_rate) {
    lo -= 1.0;
    if (++guard > 700) throw Error(ErrorCode::NoConvergence, "cannot bracket the censoring bound from below");
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double r = rate(mid);
    if (std::abs(r - target_rate) <= tol) return std::exp(mid);
    if (r > target_rate) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  throw Error(ErrorCode::NoConvergence, "censoring-bound bisection did not reach the tolerance");
}

}  // namespace censlasso
