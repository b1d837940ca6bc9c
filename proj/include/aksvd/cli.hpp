#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace aksvd {

inline constexpr const char* kVersion = "0.1.0";

/// Exit codes: 0 success, 2 configuration or input error, 3 numerical failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Every configuration key the CLI understands.
const std::vector<std::string>& known_config_keys();

}  // namespace aksvd
