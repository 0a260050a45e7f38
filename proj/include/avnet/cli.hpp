#pragma once

#include <iosfwd>

namespace avnet {

/// Entry point of the `avnet` tool. Exit codes: 0 success, 1 validation or
/// usage error, 2 when every result is infeasible, 3 on verify failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace avnet
