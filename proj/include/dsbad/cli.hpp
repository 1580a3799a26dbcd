#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dsbad {

// Exit codes of the dsbad tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitPartial = 2;

/// Entry point of the `dsbad` command-line tool; args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dsbad
