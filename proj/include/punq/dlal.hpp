#pragma once

#include "punq/ast.hpp"
#include "punq/types.hpp"

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace punq {

struct DlalNode;
using DlalRef = std::shared_ptr<const DlalNode>;

enum class DlalTag { Var, Free, Lam, App, Star };

/// Untyped lambda terms extended with the inert constant *, de Bruijn
/// indexed; * never reduces.
struct DlalNode {
    DlalTag tag;
    int index = 0;       // Var
    std::string name;    // Free / Lam display
    DlalRef a, b;        // Lam body in a; App fun/arg

    explicit DlalNode(DlalTag t) : tag(t) {}
};

DlalRef d_var(int index);
DlalRef d_free(const std::string &name);
DlalRef d_lam(const std::string &display, DlalRef body);
DlalRef d_app(DlalRef f, DlalRef a);
DlalRef d_star();
DlalRef d_tt(); // \x.\y.x
DlalRef d_ff(); // \x.\y.y

int dlal_compare(const DlalRef &x, const DlalRef &y);
bool dlal_equal(const DlalRef &x, const DlalRef &y);
long dlal_size(const DlalRef &t);
std::string dlal_to_string(const DlalRef &t);

/// Finite set of terms, deduplicated up to alpha-equivalence and kept
/// sorted; the size of a set is the size of its largest member.
struct DlalTermSet {
    std::vector<DlalRef> members; // sorted, unique

    void insert(DlalRef t);
    bool contains(const DlalRef &t) const;
    size_t count() const { return members.size(); }
    long size() const;
    /// subset modulo the inert constant: this within other + {*}
    bool subset_star(const DlalTermSet &other) const;
    bool equal_star(const DlalTermSet &other) const;
    std::string to_string() const;
};

/// One call-by-value step; two-argument Church-boolean applications
/// project in a single step. Returns nothing on normal forms.
std::optional<DlalRef> dlal_step(const DlalRef &t);

/// Set-lifted reduction: every reducible member steps once, normal members
/// stay, result deduplicated.
DlalTermSet dlal_step_all(const DlalTermSet &s);
bool dlal_normal(const DlalTermSet &s);

struct UntranslatableError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Type encoding into the {X, -o, =>, $, forall} fragment: erases #, maps B
/// and x to their second-order encodings.
TypeRef encode_type(const TypeRef &a);
bool is_dlal_type(const TypeRef &a);

/// Duplication count of a function position: for lambda values the number
/// of binder occurrences in the translated body (at least 1); variable
/// heads are linear when their recorded type peels to -o; closed non-value
/// heads are evaluated first. Requires checker annotations on binders.
long eta(const SupRef &head, long eval_budget = -1);

/// The term translation: sums become unions, zero scalings become {*},
/// conditionals abstract the linear variables of their branches. Requires a
/// checked program (binder annotations drive variable kinds); throws
/// UntranslatableError on variable-headed non-linear applications.
DlalTermSet translate(const SupRef &s, long eval_budget = -1);

struct DominationEntry {
    long punq_step;  // index into the trace (0 = initial program)
    long dlal_steps; // least n with translation within S_n (+ {*})
};

struct DominationReport {
    bool ok = false;
    long started_at = 0;    // first translatable trace entry
    long punq_steps = 0;    // counted PUNQ steps from started_at
    long dlal_steps = 0;    // set-steps to normal form
    std::vector<DominationEntry> entries;
    std::string message;
    std::string format() const;
};

/// Runs the program's trace and its translation's set-trace side by side,
/// locating each trace entry's translation inside the set reduction and
/// checking that PUNQ never outruns the set.
DominationReport step_domination_check(const SupRef &program, long budget = -1);

} // namespace punq
