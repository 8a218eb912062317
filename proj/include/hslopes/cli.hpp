#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hslopes::cli {

/// Exit codes of the hslopes binary.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitConfigError = 2;

/// Run one command line (without the program name). Reports go to `out`
/// unless --output names a file; `in` feeds `extract` when no input file is
/// given.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err);

}  // namespace hslopes::cli
