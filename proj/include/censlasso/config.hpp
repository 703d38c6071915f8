#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "censlasso/simulation.hpp"
#include "censlasso/solvers.hpp"

namespace censlasso {

// Values from the [fit] section; unset keys keep their defaults.
struct FitSection {
  FitConfig fit;
  std::optional<double> lambda;  // shared lambda instead of BIC
  BicConfig bic;
  AggregationPlan plan;
};

// INI text with sections [generation], [simulation] and [fit]. Unknown
// keys are rejected. Throws Io for unreadable files and InvalidSpec for
// malformed values.
struct ConfigFile {
  SimulationSpec simulation;
  FitSection fit;
  bool has_master_seed = false;
  bool has_threads = false;
};

ConfigFile parse_config(std::istream& in, const std::string& source = "<stream>");
ConfigFile load_config(const std::filesystem::path& path);

// "5:sqrt,25:2" or "5,25" (w = floor(sqrt(K)) when omitted).
std::vector<AggregationPlan> parse_plans(const std::string& text);
std::vector<LossKind> parse_methods(const std::string& text);
Vector parse_vector(const std::string& text, int length);

}  // namespace censlasso
