#pragma once

// bflsim command line: run, verify-chain, keygen-bench, sig-bench, show-config.
// Every simulation flag has a config-file key of the same name; flags win.

#include <ostream>
#include <string>
#include <vector>

namespace pqbfl::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitRuntime = 2;
inline constexpr int kExitVerify = 3;

// Environment variable naming the default output directory.
inline constexpr const char* kOutEnv = "BFLSIM_OUT";

// `args` excludes the program name. Returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pqbfl::cli
