#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace egocf::trainkit {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

// Subcommands: gen-data, augment-text, augment-video, train, eval, gradcheck,
// audit, ablate. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace egocf::trainkit
