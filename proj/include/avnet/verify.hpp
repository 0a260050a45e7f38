#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace avnet {

struct CheckResult {
    std::string name;
    bool passed{false};
    std::string detail;
};

/// Solver-vs-oracle comparisons and the queueing cross-check. `size` is
/// "tiny" (quick) or "full"; anything else throws ValidationError.
std::vector<CheckResult> run_verification(const std::string& size);

}  // namespace avnet
