#include "censlasso/cli.hpp"

#include <CLI11.hpp>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <optional>
#include <ostream>

#include "censlasso/aggregation.hpp"
#include "censlasso/config.hpp"
#include "censlasso/errors.hpp"
#include "censlasso/kaplan_meier.hpp"
#include "censlasso/parallel.hpp"
#include "censlasso/simulation.hpp"
#include "censlasso/tuning.hpp"

namespace censlasso {

namespace {

using ordered_json = nlohmann::ordered_json;

std::vector<int> one_based(const IndexSet& s) {
  std::vector<int> out;
  out.reserve(s.size());
  for (int j : s) out.push_back(j + 1);
  return out;
}

std::vector<double> to_std(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

ordered_json result_json(const EstimatorResult& r) {
  ordered_json j;
  j["beta"] = to_std(r.beta);
  j["intercepts"] = to_std(r.intercepts);
  j["support"] = one_based(r.support);
  j["objective"] = r.objective;
  j["lambda"] = r.lambda;
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  j["kkt_residual"] = r.kkt_residual;
  return j;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path + "'");
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  auto out = open_output(path);
  out << text;
  if (!out) throw Error(ErrorCode::Io, "failed writing '" + path + "'");
}

std::optional<std::uint64_t> env_seed() {
  const char* raw = std::getenv("CENSLASSO_SEED");
  if (raw == nullptr || *raw == '\0') return std::nullopt;
  const std::string text(raw);
  std::uint64_t v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw Error(ErrorCode::InvalidSpec, "CENSLASSO_SEED must be an unsigned integer, got '" + text + "'");
  }
  return v;
}

// Flags shared by the data-driven commands, layered over the [fit] section.
struct FitFlags {
  std::string data;
  std::string output;
  std::string config;
  std::string method;
  double lambda = 0.0;
  bool bic = false;
  std::string bic_penalty;
  double gamma = 1.0;
  double weight_floor = 0.0;
  bool fit_intercept = false;
  int K = 1;
  std::string w;
  std::string km_scope;
  int grid_size = 20;
  int threads = 0;

  CLI::Option* lambda_opt = nullptr;
  CLI::Option* bic_opt = nullptr;
  CLI::Option* gamma_opt = nullptr;
  CLI::Option* weight_floor_opt = nullptr;
  CLI::Option* intercept_opt = nullptr;
  CLI::Option* K_opt = nullptr;
};

void add_fit_flags(CLI::App* cmd, FitFlags& f, bool penalty_choice) {
  cmd->add_option("--data,-d", f.data, "Dataset CSV with header y,delta,x1,...,xp")->required();
  cmd->add_option("--config,-c", f.config, "INI file; its [fit] section supplies defaults");
  cmd->add_option("--method,-m", f.method, "median | quantile[:tau] | composite[:J] | expectile[:tau] | ls");
  f.gamma_opt = cmd->add_option("--gamma", f.gamma, "Adaptive weight power");
  f.weight_floor_opt = cmd->add_option("--weight-floor", f.weight_floor, "Floor on G(Y) in the IPCW weights");
  f.intercept_opt = cmd->add_flag("--fit-intercept", f.fit_intercept, "Fit an unpenalized intercept");
  cmd->add_option("--bic-penalty", f.bic_penalty, "log_n_over_n | log_nu_over_nu");
  cmd->add_option("--threads,-t", f.threads, "Worker threads (default: available cores)");
  if (penalty_choice) {
    f.lambda_opt = cmd->add_option("--lambda", f.lambda, "Fixed penalty level");
    f.bic_opt = cmd->add_flag("--bic", f.bic, "Choose lambda by BIC over the default grid (default)");
    f.lambda_opt->excludes(f.bic_opt);
  }
}

struct Resolved {
  FitSection section;
  bool use_bic = true;
  int threads = 1;
};

Resolved resolve(const FitFlags& f) {
  Resolved r;
  std::optional<int> config_threads;
  if (!f.config.empty()) {
    const ConfigFile cfg = load_config(f.config);
    r.section = cfg.fit;
    if (cfg.has_threads) config_threads = cfg.simulation.threads;
  }
  FitSection& s = r.section;
  if (!f.method.empty()) s.fit.loss = LossKind::parse(f.method);
  if (f.gamma_opt && f.gamma_opt->count()) s.fit.gamma = f.gamma;
  if (f.weight_floor_opt && f.weight_floor_opt->count()) s.fit.weight_floor = f.weight_floor;
  if (f.intercept_opt && f.intercept_opt->count()) s.fit.fit_intercept = f.fit_intercept;
  if (!f.bic_penalty.empty()) s.bic.penalty_mode = parse_bic_penalty(f.bic_penalty);
  if (f.K_opt && f.K_opt->count()) s.plan.K = f.K;
  if (!f.w.empty()) s.plan.w = VoteThreshold::parse(f.w);
  if (!f.km_scope.empty()) s.plan.km_scope = parse_km_scope(f.km_scope);
  if (f.lambda_opt && f.lambda_opt->count()) {
    s.lambda = f.lambda;
  } else if (f.bic_opt && f.bic_opt->count()) {
    s.lambda.reset();
  }
  r.use_bic = !s.lambda.has_value();
  if (s.lambda) s.fit.lambda = *s.lambda;
  s.fit.validate();
  s.plan.validate();
  r.threads = f.threads > 0 ? f.threads : config_threads.value_or(default_thread_count());
  return r;
}

IpcwWeights weights_for(const SurvivalDataset& data, const FitConfig& fit) {
  const std::optional<double> floor = fit.weight_floor > 0.0 ? std::optional<double>(fit.weight_floor) : std::nullopt;
  return ipcw_weights(data, fit_censoring_km(data), floor);
}

int cmd_fit(const FitFlags& f, std::ostream& out) {
  const Resolved r = resolve(f);
  const SurvivalDataset data = load_csv(f.data);
  const IpcwWeights weights = weights_for(data, r.section.fit);
  ordered_json j;
  j["method"] = r.section.fit.loss.label();
  if (r.use_bic) {
    const BicPath path = select_lambda(data, weights, r.section.fit, r.section.bic, r.threads);
    j["result"] = result_json(path.best());
    j["bic"] = {{"penalty", to_string(r.section.bic.penalty_mode)},
                {"best_index", path.best_index + 1},
                {"score", path.entries[static_cast<std::size_t>(path.best_index)].score}};
  } else {
    const EstimatorResult pilot = fit_unpenalized(data, weights, r.section.fit.loss, r.section.fit);
    j["result"] = result_json(fit_adaptive_lasso(data, weights, r.section.fit, pilot.beta));
  }
  write_text(f.output, j.dump(2) + "\n");
  out << "support:";
  for (int s : j["result"]["support"].get<std::vector<int>>()) out << ' ' << s;
  out << '\n';
  return kExitOk;
}

int cmd_aggregate(const FitFlags& f, std::ostream& out, std::ostream& err) {
  const Resolved r = resolve(f);
  const SurvivalDataset data = load_csv(f.data);
  AggregationPlan plan = r.section.plan;
  plan.per_group_tuning = r.use_bic;
  const AggregatedResult res = fit_aggregated(data, plan, r.section.fit, r.section.bic, r.threads);
  if (!res.warning.empty()) err << "warning: " << res.warning << '\n';
  ordered_json j;
  j["method"] = r.section.fit.loss.label();
  j["K"] = res.K;
  j["w"] = res.w;
  j["km_scope"] = to_string(plan.km_scope);
  j["n_used"] = res.n_used;
  j["beta_check"] = to_std(res.beta_check);
  j["voted_support"] = one_based(res.voted_support);
  j["vote_counts"] = std::vector<int>(res.vote_counts.data(), res.vote_counts.data() + res.vote_counts.size());
  ordered_json groups = ordered_json::array();
  for (std::size_t k = 0; k < res.group_results.size(); ++k) {
    groups.push_back({{"support", one_based(res.group_results[k].support)},
                      {"lambda", res.group_lambdas[k]},
                      {"bic_index", res.group_bic_index[k] < 0 ? ordered_json(nullptr)
                                                                : ordered_json(res.group_bic_index[k] + 1)}});
  }
  j["groups"] = groups;
  write_text(f.output, j.dump(2) + "\n");
  out << "voted support:";
  for (int s : res.voted_support) out << ' ' << s + 1;
  out << '\n';
  return kExitOk;
}

int cmd_tune(const FitFlags& f, std::ostream& out) {
  const Resolved r = resolve(f);
  const SurvivalDataset data = load_csv(f.data);
  const IpcwWeights weights = weights_for(data, r.section.fit);
  BicConfig bic = r.section.bic;
  bic.grid = lambda_grid(data.n(), f.grid_size);
  const BicPath path = select_lambda(data, weights, r.section.fit, bic, r.threads);
  auto file = open_output(f.output);
  write_path_csv(path, file);
  out << "best j=" << path.best_index + 1 << " lambda=" << path.entries[static_cast<std::size_t>(path.best_index)].lambda
      << '\n';
  return kExitOk;
}

int cmd_km(const std::string& data_path, const std::string& output) {
  const SurvivalDataset data = load_csv(data_path);
  const CensoringSurvivalCurve curve = fit_censoring_km(data);
  auto file = open_output(output);
  write_curve_csv(curve, file);
  return kExitOk;
}

struct SimFlags {
  std::string config;
  std::string output;
  int threads = 0;
  std::uint64_t seed = 0;
  int M = 0;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* M_opt = nullptr;
};

SimulationSpec resolve_sim(const SimFlags& f) {
  ConfigFile cfg = load_config(f.config);
  SimulationSpec spec = cfg.simulation;
  if (const auto s = env_seed()) spec.master_seed = *s;
  if (f.seed_opt && f.seed_opt->count()) spec.master_seed = f.seed;
  if (f.M_opt && f.M_opt->count()) spec.M = f.M;
  if (f.threads > 0) {
    spec.threads = f.threads;
  } else if (!cfg.has_threads) {
    spec.threads = default_thread_count();
  }
  spec.validate();
  return spec;
}

void add_sim_flags(CLI::App* cmd, SimFlags& f, const std::string& output_help) {
  cmd->add_option("--config,-c", f.config, "INI file with [generation] and [simulation] sections")->required();
  cmd->add_option("--output,-o", f.output, output_help)->required();
  cmd->add_option("--threads,-t", f.threads, "Worker threads (default: available cores)");
  f.seed_opt = cmd->add_option("--master-seed", f.seed, "Overrides master_seed and CENSLASSO_SEED");
  f.M_opt = cmd->add_option("--M", f.M, "Number of replications");
}

int cmd_simulate(const SimFlags& f, std::ostream& out) {
  const SimulationSpec spec = resolve_sim(f);
  const SimulationReport report = run_study(spec);
  write_report(report, f.output);
  print_summary(report, out);
  return kExitOk;
}

int cmd_bench(const SimFlags& f, std::ostream& out) {
  const SimulationSpec spec = resolve_sim(f);
  const auto rows = timing_benchmark(spec);
  auto file = open_output(f.output);
  write_bench_csv(rows, spec, file);
  write_bench_csv(rows, spec, out);
  return kExitOk;
}

int cmd_generate(const SimFlags& f, std::ostream& out) {
  const ConfigFile cfg = load_config(f.config);
  const SimulationSpec& spec = cfg.simulation;
  GenerationSpec g = spec.generation;
  if (const auto s = env_seed()) g.seed = *s;
  if (f.seed_opt && f.seed_opt->count()) g.seed = f.seed;
  double c1 = kNoCensoring;
  if (spec.censoring_bound) {
    c1 = *spec.censoring_bound;
  } else if (g.target_censoring_rate > 0.0) {
    c1 = calibrate_censoring_bound(g, g.target_censoring_rate);
  }
  const SurvivalDataset data = generate_dataset(g, c1);
  write_csv(data, std::filesystem::path(f.output));
  out << "n=" << data.n() << " p=" << data.p() << " events=" << data.events() << " c1=" << c1 << '\n';
  return kExitOk;
}

int exit_code(const Error& e) {
  switch (category(e.code())) {
    case ErrorCategory::Parse: return kExitParse;
    case ErrorCategory::Config: return kExitConfig;
    case ErrorCategory::Solver: return kExitSolver;
  }
  return kExitSolver;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Censored adaptive-LASSO estimation with divide-and-conquer aggregation", "censlasso"};
  app.require_subcommand(1);

  FitFlags fit_f, agg_f, tune_f;
  auto* fit = app.add_subcommand("fit", "Fit one adaptive-LASSO estimator and write its JSON result");
  add_fit_flags(fit, fit_f, true);
  fit->add_option("--output,-o", fit_f.output, "Result JSON path")->required();

  auto* agg = app.add_subcommand("aggregate", "Split into K interleaved groups, vote and average");
  add_fit_flags(agg, agg_f, true);
  agg_f.K_opt = agg->add_option("-K,--groups", agg_f.K, "Number of groups");
  agg->add_option("-w,--vote", agg_f.w, "Vote threshold: integer or 'sqrt'");
  agg->add_option("--km-scope", agg_f.km_scope, "per_group | global");
  agg->add_option("--output,-o", agg_f.output, "Result JSON path")->required();

  auto* tune = app.add_subcommand("tune", "Write the BIC path over the lambda grid as CSV");
  add_fit_flags(tune, tune_f, false);
  tune->add_option("--grid-size", tune_f.grid_size, "Number of grid points")->check(CLI::PositiveNumber);
  tune->add_option("--output,-o", tune_f.output, "Path CSV")->required();

  std::string km_data, km_out;
  auto* km = app.add_subcommand("km", "Write the censoring Kaplan-Meier curve as CSV");
  km->add_option("--data,-d", km_data, "Dataset CSV")->required();
  km->add_option("--output,-o", km_out, "Curve CSV")->required();

  SimFlags sim_f, bench_f, gen_f;
  auto* sim = app.add_subcommand("simulate", "Run a Monte Carlo study");
  add_sim_flags(sim, sim_f, "Output directory");
  auto* bench = app.add_subcommand("bench", "Time the pipeline for K = 1 and each configured K");
  add_sim_flags(bench, bench_f, "Timing CSV");
  auto* gen = app.add_subcommand("generate", "Write one synthetic dataset from a [generation] section");
  gen->add_option("--config,-c", gen_f.config, "INI file")->required();
  gen->add_option("--output,-o", gen_f.output, "Dataset CSV")->required();
  gen_f.seed_opt = gen->add_option("--seed", gen_f.seed, "Overrides the generation seed");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kExitOk;
    }
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    if (*fit) return cmd_fit(fit_f, out);
    if (*agg) return cmd_aggregate(agg_f, out, err);
    if (*tune) return cmd_tune(tune_f, out);
    if (*km) return cmd_km(km_data, km_out);
    if (*sim) return cmd_simulate(sim_f, out);
    if (*bench) return cmd_bench(bench_f, out);
    if (*gen) return cmd_generate(gen_f, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitSolver;
  }
  return kExitConfig;
}

}  // namespace censlasso
