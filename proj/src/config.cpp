#include "censlasso/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "censlasso/errors.hpp"

namespace censlasso {

namespace pt = boost::property_tree;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "inf" || t == "infinity") return std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw Error(ErrorCode::InvalidSpec, key + ": expected a number, got '" + text + "'");
  }
  return v;
}

long long to_int(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  long long v = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw Error(ErrorCode::InvalidSpec, key + ": expected an integer, got '" + text + "'");
  }
  return v;
}

std::uint64_t to_u64(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  std::uint64_t v = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw Error(ErrorCode::InvalidSpec, key + ": expected an unsigned integer, got '" + text + "'");
  }
  return v;
}

bool to_bool(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw Error(ErrorCode::InvalidSpec, key + ": expected a boolean, got '" + text + "'");
}

void check_keys(const pt::ptree& section, const std::string& name, const std::set<std::string>& allowed) {
  for (const auto& [key, value] : section) {
    if (!allowed.count(key)) throw Error(ErrorCode::InvalidSpec, "unknown key '" + key + "' in [" + name + "]");
    (void)value;
  }
}

}  // namespace

Vector parse_vector(const std::string& text, int length) {
  const auto items = split(text, ',');
  if (static_cast<int>(items.size()) > length) {
    throw Error(ErrorCode::InvalidSpec, "beta0 has more entries than p");
  }
  Vector v = Vector::Zero(length);
  for (std::size_t i = 0; i < items.size(); ++i) v[static_cast<Eigen::Index>(i)] = to_double("beta0", items[i]);
  return v;
}

std::vector<AggregationPlan> parse_plans(const std::string& text) {
  std::vector<AggregationPlan> plans;
  for (const auto& item : split(text, ',')) {
    AggregationPlan plan;
    const auto colon = item.find(':');
    const long long k = to_int("plans", item.substr(0, colon));
    if (k < 1) throw Error(ErrorCode::InvalidK, "K must be >= 1");
    plan.K = static_cast<int>(k);
    if (colon != std::string::npos) plan.w = VoteThreshold::parse(trim(item.substr(colon + 1)));
    plan.validate();
    plans.push_back(plan);
  }
  if (plans.empty()) throw Error(ErrorCode::InvalidSpec, "plans must list at least one K");
  return plans;
}

std::vector<LossKind> parse_methods(const std::string& text) {
  std::vector<LossKind> out;
  for (const auto& item : split(text, ',')) out.push_back(LossKind::parse(item));
  if (out.empty()) throw Error(ErrorCode::InvalidSpec, "methods must list at least one loss");
  return out;
}

ConfigFile parse_config(std::istream& in, const std::string& source) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorCode::InvalidSpec, source + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  for (const auto& [name, section] : tree) {
    if (name != "generation" && name != "simulation" && name != "fit") {
      throw Error(ErrorCode::InvalidSpec, source + ": unknown section [" + name + "]");
    }
    (void)section;
  }

  ConfigFile cfg;
  SimulationSpec& sim = cfg.simulation;
  if (const auto gen = tree.get_child_optional("generation")) {
    check_keys(*gen, "generation",
               {"n", "p", "beta0", "intercept", "design_mean", "error_family", "target_censoring_rate", "seed", "c1"});
    GenerationSpec& g = sim.generation;
    if (auto v = gen->get_optional<std::string>("n")) g.n = static_cast<int>(to_int("n", *v));
    if (auto v = gen->get_optional<std::string>("p")) g.p = static_cast<int>(to_int("p", *v));
    if (g.p < 1) throw Error(ErrorCode::InvalidSpec, "p must be >= 1");
    if (auto v = gen->get_optional<std::string>("beta0")) {
      g.beta0 = parse_vector(*v, g.p);
    } else {
      g.beta0 = GenerationSpec::simulation_default(std::max(g.n, 1), g.p).beta0;
    }
    if (auto v = gen->get_optional<std::string>("intercept")) g.intercept = to_double("intercept", *v);
    if (auto v = gen->get_optional<std::string>("design_mean")) g.design_mean = to_double("design_mean", *v);
    if (auto v = gen->get_optional<std::string>("error_family")) {
      if (trim(*v) != "standard_gumbel") throw Error(ErrorCode::InvalidSpec, "error_family must be standard_gumbel");
    }
    if (auto v = gen->get_optional<std::string>("target_censoring_rate")) {
      g.target_censoring_rate = to_double("target_censoring_rate", *v);
    }
    if (auto v = gen->get_optional<std::string>("seed")) g.seed = to_u64("seed", *v);
    if (auto v = gen->get_optional<std::string>("c1")) sim.censoring_bound = to_double("c1", *v);
  }
  if (const auto s = tree.get_child_optional("simulation")) {
    check_keys(*s, "simulation",
               {"M", "methods", "plans", "lambda_rule", "master_seed", "compare_full_data", "estimate_tau",
                "bic_penalty", "km_scope", "threads"});
    if (auto v = s->get_optional<std::string>("M")) {
      const long long m = to_int("M", *v);
      if (m < 1) throw Error(ErrorCode::InvalidSpec, "M must be >= 1");
      sim.M = static_cast<int>(m);
    }
    if (auto v = s->get_optional<std::string>("methods")) sim.methods = parse_methods(*v);
    if (auto v = s->get_optional<std::string>("plans")) sim.plans = parse_plans(*v);
    if (auto v = s->get_optional<std::string>("lambda_rule")) sim.lambda_rule = LambdaRule::parse(trim(*v));
    if (auto v = s->get_optional<std::string>("master_seed")) {
      sim.master_seed = to_u64("master_seed", *v);
      cfg.has_master_seed = true;
    }
    if (auto v = s->get_optional<std::string>("compare_full_data")) {
      sim.compare_full_data = to_bool("compare_full_data", *v);
    }
    if (auto v = s->get_optional<std::string>("estimate_tau")) sim.estimate_tau = to_bool("estimate_tau", *v);
    if (auto v = s->get_optional<std::string>("bic_penalty")) sim.bic.penalty_mode = parse_bic_penalty(trim(*v));
    if (auto v = s->get_optional<std::string>("km_scope")) {
      const KmScope scope = parse_km_scope(trim(*v));
      for (auto& plan : sim.plans) plan.km_scope = scope;
    }
    if (auto v = s->get_optional<std::string>("threads")) {
      const long long t = to_int("threads", *v);
      if (t < 1) throw Error(ErrorCode::InvalidSpec, "threads must be >= 1");
      sim.threads = static_cast<int>(t);
      cfg.has_threads = true;
    }
  }
  if (const auto f = tree.get_child_optional("fit")) {
    check_keys(*f, "fit",
               {"method", "lambda", "gamma", "tol", "max_iter", "beta_floor", "weight_floor", "fit_intercept",
                "bic_penalty", "K", "w", "km_scope"});
    FitSection& fs = cfg.fit;
    if (auto v = f->get_optional<std::string>("method")) fs.fit.loss = LossKind::parse(trim(*v));
    if (auto v = f->get_optional<std::string>("lambda")) fs.lambda = to_double("lambda", *v);
    if (auto v = f->get_optional<std::string>("gamma")) fs.fit.gamma = to_double("gamma", *v);
    if (auto v = f->get_optional<std::string>("tol")) fs.fit.tol = to_double("tol", *v);
    if (auto v = f->get_optional<std::string>("max_iter")) fs.fit.max_iter = static_cast<int>(to_int("max_iter", *v));
    if (auto v = f->get_optional<std::string>("beta_floor")) fs.fit.beta_floor = to_double("beta_floor", *v);
    if (auto v = f->get_optional<std::string>("weight_floor")) fs.fit.weight_floor = to_double("weight_floor", *v);
    if (auto v = f->get_optional<std::string>("fit_intercept")) fs.fit.fit_intercept = to_bool("fit_intercept", *v);
    if (auto v = f->get_optional<std::string>("bic_penalty")) fs.bic.penalty_mode = parse_bic_penalty(trim(*v));
    if (auto v = f->get_optional<std::string>("K")) fs.plan.K = static_cast<int>(to_int("K", *v));
    if (auto v = f->get_optional<std::string>("w")) fs.plan.w = VoteThreshold::parse(trim(*v));
    if (auto v = f->get_optional<std::string>("km_scope")) fs.plan.km_scope = parse_km_scope(trim(*v));
    fs.fit.validate();
    fs.plan.validate();
  }
  sim.validate();
  return cfg;
}

ConfigFile load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open config file " + path.string());
  return parse_config(in, path.string());
}

}  // namespace censlasso
