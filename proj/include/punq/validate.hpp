#pragma once

#include "punq/checker.hpp"

#include <string>

namespace punq {

struct ValidationReport {
    bool ok = true;
    int nodes = 0;
    std::string first_error;
};

/// Re-checks every node of an accepted derivation against the typing rules
/// with code independent of the search: rule-shape constraints, premise and
/// conclusion type relationships, and all recorded side conditions
/// (subtyping facts re-decided, unit norms recomputed, orthogonality facts
/// re-discharged through the standalone fragment operations).
ValidationReport validate_derivation(const DerivationRef &d, OrthoMode mode,
                                     const Program *defs = nullptr);

} // namespace punq
