#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace scss {

/// Entry point of the `scss` tool. args excludes the program name.
/// Returns 0 on success, 1 on a runtime error and 2 on a usage error.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace scss
