#include "censlasso/simulation.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "censlasso/errors.hpp"
#include "censlasso/parallel.hpp"

namespace censlasso {

using ordered_json = nlohmann::ordered_json;

double LambdaRule::fixed_lambda(Eigen::Index n) const {
  return std::pow(static_cast<double>(n), 0.5 - 1.0 / (10.0 * j));
}

std::string LambdaRule::label() const { return bic_grid ? "bic_grid" : "fixed:" + std::to_string(j); }

LambdaRule LambdaRule::parse(const std::string& text) {
  if (text == "bic_grid" || text == "bic") return {};
  if (text.rfind("fixed:", 0) == 0) {
    try {
      std::size_t used = 0;
      const std::string tail = text.substr(6);
      const int j = std::stoi(tail, &used);
      if (used == tail.size() && j >= 1) return {false, j};
    } catch (const std::exception&) {
    }
  }
  throw Error(ErrorCode::InvalidSpec, "lambda_rule must be 'bic_grid' or 'fixed:j' with j >= 1, got '" + text + "'");
}

void SimulationSpec::validate() const {
  if (M < 1) throw Error(ErrorCode::InvalidSpec, "M must be >= 1");
  if (methods.empty()) throw Error(ErrorCode::InvalidSpec, "at least one method is required");
  if (plans.empty()) throw Error(ErrorCode::InvalidSpec, "at least one aggregation plan is required");
  if (threads < 1) throw Error(ErrorCode::InvalidSpec, "threads must be >= 1");
  generation.validate();
  for (const auto& plan : plans) {
    plan.validate();
    if (plan.K > generation.n) throw Error(ErrorCode::InvalidK, "K exceeds n in plan " + plan.label());
  }
  bic.validate();
  if (censoring_bound && !(*censoring_bound > 0.0)) throw Error(ErrorCode::InvalidSpec, "c1 must be > 0");
}

std::uint64_t replication_seed(std::uint64_t master_seed, std::uint64_t replication) {
  const auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(master_seed) ^ (replication * 0xd1b54a32d192ed03ULL + 1));
}

double metric_false_zeros(const std::vector<Vector>& estimates, const IndexSet& active_set) {
  if (active_set.empty()) throw Error(ErrorCode::EmptyActiveSet, "false-zero rate needs a non-empty active set");
  if (estimates.empty()) throw Error(ErrorCode::TooFewSamples, "no estimates");
  double acc = 0.0;
  for (const auto& b : estimates) {
    int missed = 0;
    for (int j : active_set) {
      if (j >= b.size()) throw Error(ErrorCode::DimensionMismatch, "active index out of range");
      if (b[j] == 0.0) ++missed;
    }
    acc += static_cast<double>(missed) / static_cast<double>(active_set.size());
  }
  return 100.0 * acc / static_cast<double>(estimates.size());
}

double metric_false_nonzeros(const std::vector<Vector>& estimates, const IndexSet& active_set, Eigen::Index p) {
  std::vector<char> active(static_cast<std::size_t>(p), 0);
  for (int j : active_set) {
    if (j < 0 || j >= p) throw Error(ErrorCode::DimensionMismatch, "active index out of range");
    active[static_cast<std::size_t>(j)] = 1;
  }
  const auto inactive = p - static_cast<Eigen::Index>(active_set.size());
  if (inactive < 1) throw Error(ErrorCode::FullActiveSet, "false-non-zero rate needs an inactive coordinate");
  if (estimates.empty()) throw Error(ErrorCode::TooFewSamples, "no estimates");
  double acc = 0.0;
  for (const auto& b : estimates) {
    if (b.size() != p) throw Error(ErrorCode::DimensionMismatch, "estimate has the wrong length");
    int spurious = 0;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (!active[static_cast<std::size_t>(j)] && b[j] != 0.0) ++spurious;
    }
    acc += static_cast<double>(spurious) / static_cast<double>(inactive);
  }
  return 100.0 * acc / static_cast<double>(estimates.size());
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct CellSpec {
  LossKind method;
  AggregationPlan plan;
  std::string plan_label;
};

std::vector<CellSpec> cell_specs(const SimulationSpec& spec) {
  std::vector<CellSpec> cells;
  for (const auto& m : spec.methods) {
    for (const auto& plan : spec.plans) cells.push_back({m, plan, plan.label()});
    if (spec.compare_full_data) {
      AggregationPlan full;
      full.K = 1;
      full.w = VoteThreshold::fixed(1);
      cells.push_back({m, full, "full"});
    }
  }
  return cells;
}

std::string method_label(const LossKind& loss, bool estimate) {
  const bool estimated = loss.family() == LossFamily::Expectile || loss.family() == LossFamily::Quantile;
  return estimate && estimated ? loss.name() + ":estimated" : loss.label();
}

LossKind resolve_loss(const LossKind& loss, bool estimate, double tau_e, double tau_q) {
  if (!estimate) return loss;
  if (loss.family() == LossFamily::Expectile) return loss.with_tau(tau_e);
  if (loss.family() == LossFamily::Quantile) return loss.with_tau(tau_q);
  return loss;
}

double resolve_censoring_bound(const SimulationSpec& spec) {
  if (spec.censoring_bound) return *spec.censoring_bound;
  if (spec.generation.target_censoring_rate == 0.0) return kNoCensoring;
  return calibrate_censoring_bound(spec.generation, spec.generation.target_censoring_rate);
}

struct CellRun {
  Vector beta;
  double lambda_mean = 0.0;
  std::vector<int> bic_index;
  double seconds = 0.0;
  Eigen::Index n_used = 0;
};

AggregatedResult run_pipeline(const SurvivalDataset& data, const LossKind& loss, AggregationPlan plan,
                              const SimulationSpec& spec, int threads) {
  FitConfig cfg;
  cfg.loss = loss;
  plan.per_group_tuning = spec.lambda_rule.bic_grid;
  if (!spec.lambda_rule.bic_grid) cfg.lambda = spec.lambda_rule.fixed_lambda(data.n() / plan.K);
  return fit_aggregated(data, plan, cfg, spec.bic, threads);
}

struct ReplicationRun {
  bool ok = false;
  std::uint64_t seed = 0;
  std::string error;
  double censoring_rate = 0.0;
  double tau_e = kNaN;
  double tau_q = kNaN;
  std::vector<CellRun> cells;
};

template <class T>
T mean_of(const std::vector<T>& v) {
  T acc = 0;
  for (const T& x : v) acc += x;
  return v.empty() ? T(0) : acc / static_cast<T>(v.size());
}

}  // namespace

SimulationReport run_study(const SimulationSpec& spec) {
  spec.validate();
  const double c1 = resolve_censoring_bound(spec);
  const auto cells = cell_specs(spec);
  const IndexSet active = spec.generation.active_set();
  const Eigen::Index p = spec.generation.p;

  std::vector<ReplicationRun> runs(static_cast<std::size_t>(spec.M));
  parallel_for(spec.M, spec.threads, [&](int m) {
    ReplicationRun& run = runs[static_cast<std::size_t>(m)];
    run.seed = replication_seed(spec.master_seed, static_cast<std::uint64_t>(m));
    try {
      GenerationSpec g = spec.generation;
      g.seed = run.seed;
      const LatentSample latent = generate_latent(g, c1);
      const auto& data = latent.data;
      run.censoring_rate = 1.0 - static_cast<double>(data.events()) / static_cast<double>(data.n());
      const std::span<const double> eps(latent.errors.data(), static_cast<std::size_t>(latent.errors.size()));
      if (spec.estimate_tau) {
        run.tau_e = estimate_expectile_index(eps);
        run.tau_q = estimate_quantile_index(eps);
      }
      run.cells.resize(cells.size());
      for (std::size_t c = 0; c < cells.size(); ++c) {
        const LossKind loss = resolve_loss(cells[c].method, spec.estimate_tau, run.tau_e, run.tau_q);
        const auto t0 = std::chrono::steady_clock::now();
        const AggregatedResult res = run_pipeline(data, loss, cells[c].plan, spec, 1);
        const auto t1 = std::chrono::steady_clock::now();
        CellRun& out = run.cells[c];
        out.beta = res.beta_check;
        out.lambda_mean = mean_of(res.group_lambdas);
        out.bic_index = res.group_bic_index;
        out.seconds = std::chrono::duration<double>(t1 - t0).count();
        out.n_used = res.n_used;
      }
      run.ok = true;
    } catch (const Error& e) {
      run.ok = false;
      run.error = e.what();
      run.cells.clear();
    }
  });

  SimulationReport report;
  report.spec = spec;
  report.censoring_bound = c1;
  std::vector<double> rates, taus_e, taus_q;
  for (const auto& run : runs) {
    if (!run.ok) {
      report.failed_seeds.push_back(run.seed);
      report.failure_messages.push_back(run.error);
      continue;
    }
    rates.push_back(run.censoring_rate);
    taus_e.push_back(run.tau_e);
    taus_q.push_back(run.tau_q);
  }
  report.mean_censoring_rate = rates.empty() ? kNaN : mean_of(rates);
  report.mean_tau_expectile = spec.estimate_tau && !taus_e.empty() ? mean_of(taus_e) : kNaN;
  report.mean_tau_quantile = spec.estimate_tau && !taus_q.empty() ? mean_of(taus_q) : kNaN;

  const std::size_t bins = spec.bic.grid.empty() ? 20 : spec.bic.grid.size();
  for (std::size_t c = 0; c < cells.size(); ++c) {
    CellReport cell;
    cell.method = method_label(cells[c].method, spec.estimate_tau);
    cell.plan = cells[c].plan_label;
    cell.K = cells[c].plan.K;
    cell.w = cells[c].plan.w.resolve(cells[c].plan.K);
    cell.deviations.resize(active.size());
    cell.bic_histogram.assign(spec.lambda_rule.bic_grid ? bins : 0, 0);
    double l1 = 0.0, l2 = 0.0, lam = 0.0, secs = 0.0;
    for (const auto& run : runs) {
      if (!run.ok) continue;
      const CellRun& r = run.cells[c];
      cell.estimates.push_back(r.beta);
      double a1 = 0.0, a2 = 0.0;
      const double root_n = std::sqrt(static_cast<double>(r.n_used));
      for (std::size_t a = 0; a < active.size(); ++a) {
        const double d = r.beta[active[a]] - spec.generation.beta0[active[a]];
        a1 += std::abs(d);
        a2 += d * d;
        cell.deviations[a].push_back(root_n * d);
      }
      l1 += a1;
      l2 += std::sqrt(a2);
      lam += r.lambda_mean;
      secs += r.seconds;
      for (int idx : r.bic_index) {
        if (idx >= 0 && static_cast<std::size_t>(idx) < cell.bic_histogram.size()) {
          ++cell.bic_histogram[static_cast<std::size_t>(idx)];
        }
      }
    }
    cell.replications = static_cast<int>(cell.estimates.size());
    if (cell.replications > 0) {
      const double reps = cell.replications;
      cell.l1_bias_active = l1 / reps;
      cell.l2_error_active = l2 / reps;
      cell.mean_lambda = lam / reps;
      cell.mean_fit_seconds = secs / reps;
      try {
        cell.false_zero_pct = metric_false_zeros(cell.estimates, active);
      } catch (const Error&) {
        cell.false_zero_pct = kNaN;
      }
      try {
        cell.false_nonzero_pct = metric_false_nonzeros(cell.estimates, active, p);
      } catch (const Error&) {
        cell.false_nonzero_pct = kNaN;
      }
    } else {
      cell.false_zero_pct = cell.false_nonzero_pct = cell.l1_bias_active = cell.l2_error_active = kNaN;
    }
    for (std::size_t a = 0; a < active.size(); ++a) {
      CoordinateNormality cn;
      cn.coordinate = active[a];
      try {
        cn.summary = normality_summary(cell.deviations[a]);
      } catch (const Error& e) {
        cn.error = e.what();
      }
      cell.normality.push_back(std::move(cn));
    }
    report.cells.push_back(std::move(cell));
  }
  return report;
}

void print_summary(const SimulationReport& report, std::ostream& out) {
  const auto old = out.flags();
  out << std::fixed << std::setprecision(4);
  for (const auto& c : report.cells) {
    out << c.method << " [" << c.plan << "] reps=" << c.replications << " false_zero%=" << c.false_zero_pct
        << " false_nonzero%=" << c.false_nonzero_pct << " l1_bias=" << c.l1_bias_active
        << " l2_err=" << c.l2_error_active << '\n';
  }
  if (!report.failed_seeds.empty()) out << "failed replications: " << report.failed_seeds.size() << '\n';
  out.flags(old);
}

namespace {

ordered_json number_or_null(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

ordered_json spec_json(const SimulationSpec& s) {
  ordered_json g;
  g["n"] = s.generation.n;
  g["p"] = s.generation.p;
  g["beta0"] = std::vector<double>(s.generation.beta0.data(), s.generation.beta0.data() + s.generation.beta0.size());
  g["intercept"] = s.generation.intercept;
  g["design_mean"] = s.generation.design_mean;
  g["error_family"] = "standard_gumbel";
  g["target_censoring_rate"] = s.generation.target_censoring_rate;
  ordered_json j;
  j["M"] = s.M;
  j["generation"] = g;
  std::vector<std::string> methods;
  for (const auto& m : s.methods) methods.push_back(method_label(m, s.estimate_tau));
  j["methods"] = methods;
  std::vector<std::string> plans;
  for (const auto& p : s.plans) plans.push_back(p.label());
  j["plans"] = plans;
  j["km_scope"] = to_string(s.plans.front().km_scope);
  j["lambda_rule"] = s.lambda_rule.label();
  j["bic_penalty"] = to_string(s.bic.penalty_mode);
  j["master_seed"] = s.master_seed;
  j["compare_full_data"] = s.compare_full_data;
  j["estimate_tau"] = s.estimate_tau;
  return j;
}

}  // namespace

std::string report_json(const SimulationReport& r) {
  ordered_json j;
  j["spec"] = spec_json(r.spec);
  j["censoring_bound"] = number_or_null(r.censoring_bound);
  j["mean_censoring_rate"] = number_or_null(r.mean_censoring_rate);
  j["mean_tau_expectile"] = number_or_null(r.mean_tau_expectile);
  j["mean_tau_quantile"] = number_or_null(r.mean_tau_quantile);
  ordered_json cells = ordered_json::array();
  for (const auto& c : r.cells) {
    ordered_json cj;
    cj["method"] = c.method;
    cj["plan"] = c.plan;
    cj["K"] = c.K;
    cj["w"] = c.w;
    cj["replications"] = c.replications;
    cj["false_zero_pct"] = number_or_null(c.false_zero_pct);
    cj["false_nonzero_pct"] = number_or_null(c.false_nonzero_pct);
    cj["l1_bias_active"] = number_or_null(c.l1_bias_active);
    cj["l2_error_active"] = number_or_null(c.l2_error_active);
    cj["mean_lambda"] = number_or_null(c.mean_lambda);
    Vector mean = Vector::Zero(r.spec.generation.p);
    for (const auto& b : c.estimates) mean += b;
    if (!c.estimates.empty()) mean /= static_cast<double>(c.estimates.size());
    cj["mean_estimate"] = std::vector<double>(mean.data(), mean.data() + mean.size());
    ordered_json norm = ordered_json::array();
    for (const auto& n : c.normality) {
      ordered_json nj;
      nj["coordinate"] = n.coordinate + 1;
      if (n.summary) {
        nj["mean"] = n.summary->mean;
        nj["std_dev"] = n.summary->std_dev;
        nj["ad_statistic"] = n.summary->ad_statistic;
        nj["p_value"] = n.summary->p_value;
      } else {
        nj["error"] = n.error;
      }
      norm.push_back(nj);
    }
    cj["normality"] = norm;
    cj["bic_histogram"] = c.bic_histogram;
    cells.push_back(cj);
  }
  j["cells"] = cells;
  j["failed_seeds"] = r.failed_seeds;
  j["failure_messages"] = r.failure_messages;
  return j.dump(2) + "\n";
}

void write_report(const SimulationReport& report, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::vector<fs::path> written;
  const auto open = [&](const std::string& name) {
    const fs::path path = dir / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    written.push_back(path);
    out << std::setprecision(12);
    return out;
  };
  try {
    fs::create_directories(dir);
    {
      auto out = open("report.json");
      out << report_json(report);
    }
    {
      auto out = open("selection.csv");
      out << "method,plan,K,w,replications,false_zero_pct,false_nonzero_pct,l1_bias_active,l2_error_active\n";
      for (const auto& c : report.cells) {
        out << c.method << ",\"" << c.plan << "\"," << c.K << ',' << c.w << ',' << c.replications << ','
            << c.false_zero_pct << ',' << c.false_nonzero_pct << ',' << c.l1_bias_active << ','
            << c.l2_error_active << '\n';
      }
    }
    {
      auto out = open("deviations.csv");
      out << "method,plan,replication,coordinate,deviation\n";
      const IndexSet active = report.spec.generation.active_set();
      for (const auto& c : report.cells) {
        for (std::size_t a = 0; a < c.deviations.size(); ++a) {
          for (std::size_t m = 0; m < c.deviations[a].size(); ++m) {
            out << c.method << ",\"" << c.plan << "\"," << m << ',' << active[a] + 1 << ',' << c.deviations[a][m]
                << '\n';
          }
        }
      }
    }
    {
      auto out = open("bic_histogram.csv");
      out << "method,plan,j,count\n";
      for (const auto& c : report.cells) {
        for (std::size_t j = 0; j < c.bic_histogram.size(); ++j) {
          out << c.method << ",\"" << c.plan << "\"," << j + 1 << ',' << c.bic_histogram[j] << '\n';
        }
      }
    }
    {
      auto out = open("timings.csv");
      out << "method,plan,mean_fit_seconds\n";
      for (const auto& c : report.cells) out << c.method << ",\"" << c.plan << "\"," << c.mean_fit_seconds << '\n';
    }
  } catch (...) {
    std::error_code ec;
    for (const auto& path : written) fs::remove(path, ec);
    throw;
  }
}

std::vector<BenchRow> timing_benchmark(const SimulationSpec& spec) {
  spec.validate();
  const double c1 = resolve_censoring_bound(spec);
  GenerationSpec g = spec.generation;
  g.seed = replication_seed(spec.master_seed, 0);
  const LatentSample latent = generate_latent(g, c1);
  const std::span<const double> eps(latent.errors.data(), static_cast<std::size_t>(latent.errors.size()));
  const double tau_e = spec.estimate_tau ? estimate_expectile_index(eps) : 0.5;
  const double tau_q = spec.estimate_tau ? estimate_quantile_index(eps) : 0.5;

  std::vector<AggregationPlan> plans;
  AggregationPlan base;
  base.K = 1;
  base.w = VoteThreshold::fixed(1);
  base.km_scope = spec.plans.front().km_scope;
  plans.push_back(base);
  for (const auto& plan : spec.plans) {
    bool seen = false;
    for (const auto& q : plans) seen = seen || q.K == plan.K;
    if (!seen) plans.push_back(plan);
  }

  std::vector<BenchRow> rows;
  for (const auto& plan : plans) {
    BenchRow row;
    row.K = plan.K;
    for (const auto& m : spec.methods) {
      const LossKind loss = resolve_loss(m, spec.estimate_tau, tau_e, tau_q);
      const auto t0 = std::chrono::steady_clock::now();
      run_pipeline(latent.data, loss, plan, spec, spec.threads);
      const auto t1 = std::chrono::steady_clock::now();
      const double s = std::chrono::duration<double>(t1 - t0).count();
      row.method_seconds.push_back(s);
      row.total_seconds += s;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_bench_csv(const std::vector<BenchRow>& rows, const SimulationSpec& spec, std::ostream& out) {
  out << "K,total";
  for (const auto& m : spec.methods) out << ',' << m.label();
  out << '\n';
  const auto old = out.precision(6);
  for (const auto& r : rows) {
    out << r.K << ',' << r.total_seconds;
    for (double s : r.method_seconds) out << ',' << s;
    out << '\n';
  }
  out.precision(old);
}

}  // namespace censlasso
