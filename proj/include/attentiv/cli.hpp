#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace attentiv::cli {

// Default TCP port for serve/replay; ATTENTIV_PORT overrides it.
inline constexpr int kDefaultPort = 7820;

// attentiv <train|evaluate|crossval|roc|extract|serve|replay> [flags]
// Returns 0 on success, exit_code(kind) for a library error, and the
// parameter exit code for a command-line error.
int run(int argc, const char* const* argv);

// Same, with args excluding the program name and output redirected.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace attentiv::cli
