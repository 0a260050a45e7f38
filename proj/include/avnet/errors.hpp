#pragma once

#include <stdexcept>
#include <string>

namespace avnet {

/// Input that breaks a documented invariant (config, scenario, CLI values).
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Scenario generation could not satisfy its placement constraints.
class GenerationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller broke an operation's precondition.
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace avnet
