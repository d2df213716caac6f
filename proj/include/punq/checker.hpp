#pragma once

#include "punq/ast.hpp"
#include "punq/canonical.hpp"
#include "punq/parser.hpp"
#include "punq/types.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace punq {

/// Which orthogonality fragment backs the side conditions of the quantum
/// conditional and superposition-introduction rules.
struct OrthoMode {
    enum Kind { Empty, Times, UntypedBounded } kind = Times;
    int depth = 2; // substitution depth for UntypedBounded

    static OrthoMode empty() { return {Empty, 0}; }
    static OrthoMode times() { return {Times, 0}; }
    static OrthoMode untyped(int depth) { return {UntypedBounded, depth}; }
    std::string to_string() const;
};

/// Variable discipline. Linear variables are consumed exactly once.
/// Exponential binders start dormant and only become usable once a
/// paragraph introduction moves them into the premise context (or as the
/// single variable of a non-linear application argument).
enum class Zone { Linear, ExpDormant, ExpActive };

struct CtxEntry {
    std::string name;
    TypeRef type;
    Zone zone;
};

/// Dual contexts for the open-term entry point.
struct Contexts {
    std::vector<std::pair<std::string, TypeRef>> exponential;
    std::vector<std::pair<std::string, TypeRef>> linear;
};

struct SideCondition {
    enum Kind { Ortho, Norm, Subtype } kind;
    SupRef lhs, rhs;  // Ortho operands
    TypeRef at;       // Ortho candidate type / Subtype rhs
    TypeRef sub_lhs;  // Subtype lhs
    std::vector<Amplitude> amps; // Norm coefficients
};

struct Derivation;
using DerivationRef = std::shared_ptr<const Derivation>;

/// One node per applied rule; `ctx` snapshots the visible variables at the
/// node so the replay validator can re-check context discipline.
struct Derivation {
    std::string rule;
    SupRef subject;
    TypeRef type;
    std::vector<CtxEntry> ctx;
    std::vector<DerivationRef> premises;
    std::vector<SideCondition> side;
    std::string note;
};

struct CheckResult {
    bool ok = false;
    DerivationRef derivation; // on success
    std::string reason;       // on rejection
    std::string where;        // offending subterm (printed)
    std::string to_json() const;
};

class Checker {
  public:
    explicit Checker(OrthoMode mode = OrthoMode::times(), const Program *defs = nullptr,
                     long eval_budget = -1);

    /// CHK(t, A) for closed t (definition references allowed when a
    /// program was supplied).
    CheckResult check(const SupRef &s, const TypeRef &a);
    /// Library entry accepting open terms under explicit dual contexts.
    CheckResult check_open(const SupRef &s, const TypeRef &a, const Contexts &ctx);

    const OrthoMode &mode() const { return mode_; }

  private:
    friend struct CheckerImpl;
    OrthoMode mode_;
    const Program *defs_;
    long eval_budget_;
};

/// ORTHO over closed superpositions: evaluate both and test the inner
/// product. Throws std::invalid_argument on open input and BudgetError when
/// reduction does not finish (non-membership in the fragment).
bool ortho_empty(const SupRef &t, const SupRef &s, long budget = -1);

/// ORTHO with recursive pair decomposition; open operands allowed, leaves
/// fall back to the closed check. "Not established" is a negative answer.
bool ortho_times(const SupRef &t, const SupRef &s, long budget = -1);

/// Bounded approximation of the untyped fragment: enumerates closed
/// basis-value substitutions up to the given structural depth and runs the
/// reduce-then-test check against candidate ground type q. Unsound relative
/// to the unbounded quantifier by construction.
bool ortho_untyped_bounded(const SupRef &t, const SupRef &s, const TypeRef &q, int depth,
                           long budget = -1);

} // namespace punq
