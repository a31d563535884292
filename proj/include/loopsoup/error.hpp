#pragma once

#include <stdexcept>
#include <string>

namespace loopsoup
{

/// Input outside the documented domain of an operation (bad graph, |q|>1, ...).
struct DomainError : std::invalid_argument
{
    using std::invalid_argument::invalid_argument;
};

/// Exhaustive enumeration refused because the instance is too large.
struct GuardExceeded : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

/// A sampler exceeded its discrete step budget.
struct StepBudgetExceeded : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

/// Linear algebra failure that a valid graph should never produce.
struct NumericalError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

/// Malformed input file.
struct ParseError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

} // namespace loopsoup
