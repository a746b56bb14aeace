#pragma once

#include <iosfwd>

namespace gsn::cli {

/// Entry point of the `gsn` command line. Returns the process exit code:
/// 0 on success, 1 on a module or verification failure, 2 on bad usage.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gsn::cli
