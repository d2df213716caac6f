#pragma once

#include "punq/ast.hpp"
#include "punq/canonical.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace punq {

struct EvalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Non-value superposition with no applicable rule; only untyped inputs
/// can reach this.
struct StuckError : EvalError {
    SupRef offender;
    StuckError(std::string msg, SupRef s) : EvalError(std::move(msg)), offender(std::move(s)) {}
};

struct BudgetError : EvalError {
    using EvalError::EvalError;
};

struct StepTrace {
    /// One entry per counted step: rule name and the canonical
    /// superposition after the step.
    std::vector<std::pair<std::string, SupRef>> steps;
    long count() const { return static_cast<long>(steps.size()); }
    std::string format() const;
};

/// One step of the deterministic strategy: canonicalize, then reduce every
/// non-value summand by its leftmost applicable rule in parallel. Returns
/// nothing when the input is already a value. The returned superposition is
/// canonical. Throws StuckError on stuck non-values.
std::optional<std::pair<SupRef, std::string>> step(const SupRef &s);

long default_budget(const SupRef &s);

/// Iterate `step` to a value, recording the trace. Throws BudgetError when
/// the budget runs out (message carries the trace prefix length).
std::pair<SupRef, StepTrace> eval(const SupRef &s, long budget);
SupRef eval_value(const SupRef &s, long budget = -1); // -1: default budget

} // namespace punq
