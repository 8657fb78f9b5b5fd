#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace vsum {

/// Entry point of the `vsum` command. `args` excludes the program name.
/// Returns 0 on success, 2 for configuration errors, 3 for data errors and
/// 4 for training divergence.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace vsum
