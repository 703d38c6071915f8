#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace censlasso {

inline constexpr int kExitOk = 0;
inline constexpr int kExitParse = 2;
inline constexpr int kExitSolver = 3;
inline constexpr int kExitConfig = 4;

// Arguments exclude the program name. Returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace censlasso
