// ctfkit/commands.hpp
//
// The command-line front end as a library so tests can drive it in-process.
//
// Exit codes:
//   0  success
//   1  unexpected failure
//   2  configuration or usage error
//   3  degenerate metric (zero envelope, zero training transfer)
//   4  I/O error
//   5  numeric error (non-finite results)

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ctfkit {

inline constexpr const char* version_string = "0.1.0";

/// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

} // namespace ctfkit
