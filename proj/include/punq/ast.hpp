#pragma once

#include "punq/amplitude.hpp"
#include "punq/types.hpp"

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace punq {

struct TermNode;
struct SupNode;
using TermRef = std::shared_ptr<const TermNode>;
using SupRef = std::shared_ptr<const SupNode>;

enum class TermTag {
    Var,  // bound variable (de Bruijn index, 0 = innermost binder)
    Free, // free variable / reference to a named definition
    Ket0,
    Ket1,
    If,      // cond is a Term, branches are Superpositions
    Lam,     // one binder, body Superposition
    App,     // fun/arg Terms
    Pair,    // left/right Terms
    LetPair, // scrutinee Term, body Superposition under two binders
};

enum class SupTag { Single, Zero, Scaled, Sum };

/// Binder bookkeeping: `display` is the user-facing name, `uid` a stable
/// unique id used by the DLAL translation to address binder occurrences.
struct Binder {
    std::string display;
    long uid = 0;
};

struct TermNode {
    TermTag tag;
    int index = 0;        // Var
    std::string name;     // Free
    TermRef t1, t2;       // If cond / App fun,arg / Pair l,r / LetPair scrutinee
    SupRef s1, s2;        // If branches / Lam body / LetPair body
    std::optional<TypeRef> annot; // Lam annotation
    Binder b1, b2;        // Lam: b1; LetPair: b1 (first component, index 1), b2 (second, index 0)

    // Set once by the checker on the accepted derivation; shared reducts
    // inherit the annotation, which the DLAL translation relies on.
    mutable std::optional<bool> lam_linear; // Lam: true for -o binders, false for =>
    mutable TypeRef bind_type1, bind_type2; // binder types assigned at check time

    explicit TermNode(TermTag t) : tag(t) {}
};

struct SupNode {
    SupTag tag;
    TermRef term;   // Single
    Amplitude amp;  // Scaled
    SupRef a, b;    // Scaled body in a; Sum children in a,b

    explicit SupNode(SupTag t) : tag(t) {}
};

// --- constructors (plain, no sugar) ---
TermRef term_var(int index);
TermRef term_free(const std::string &name);
TermRef term_ket0();
TermRef term_ket1();
TermRef term_if(TermRef cond, SupRef then_branch, SupRef else_branch);
TermRef term_lam(const std::string &display, std::optional<TypeRef> annot, SupRef body);
TermRef term_app(TermRef fun, TermRef arg);
TermRef term_pair(TermRef l, TermRef r);
TermRef term_let(const std::string &x, const std::string &y, TermRef scrutinee, SupRef body);

SupRef sup_term(TermRef t);
SupRef sup_zero();
SupRef sup_scaled(Amplitude a, SupRef s);
SupRef sup_sum(SupRef a, SupRef b);

// --- sugar-distributing constructors (the Fig.-2 elaboration) ---
// Each accepts superpositions in term positions and pushes them out to a
// sum of term-level constructs; plain single-term inputs build plain nodes.
SupRef mk_if(SupRef cond, SupRef then_branch, SupRef else_branch);
SupRef mk_app(SupRef fun, SupRef arg); // bilinear (head distribution backs rule AppV)
SupRef mk_pair(SupRef l, SupRef r);    // bilinear
SupRef mk_let(const std::string &x, const std::string &y, SupRef scrutinee, SupRef body);

/// Convenience: abstract the free variable `name` into a new Lam binder.
SupRef lam(const std::string &name, SupRef body_with_free);
SupRef lam(const std::string &name, TypeRef annot, SupRef body_with_free);
/// let (x, y) = scrutinee in body, where body uses Free(x)/Free(y).
SupRef let_pair(const std::string &x, const std::string &y, SupRef scrutinee, SupRef body_with_frees);

// --- predicates / metrics ---
bool is_basis_value(const TermRef &t);
/// Structural value check: every leaf of the superposition spine is a
/// basis value (0 and scalings/sums of values included).
bool is_value(const SupRef &s);
bool is_closed(const SupRef &s);

/// The size metric |.| (max over superposed summands).
long term_size(const TermRef &t);
long sup_size(const SupRef &s);

std::set<std::string> free_vars(const SupRef &s);
std::set<std::string> free_vars(const TermRef &t);

// --- comparison (alpha-equivalence via de Bruijn skeletons; binder
// display names and Lam annotations are ignored) ---
int term_compare(const TermRef &x, const TermRef &y);
int sup_compare(const SupRef &x, const SupRef &y);
bool term_equal(const TermRef &x, const TermRef &y);
bool sup_equal(const SupRef &x, const SupRef &y);

// --- substitution ---
/// Beta-substitution of a binder group: replaces indices 0..k-1 (k =
/// vals.size(), vals[0] = outermost of the group) and decrements the
/// remaining free indices by k. Capture-avoiding by construction.
SupRef subst_group(const SupRef &body, const std::vector<TermRef> &vals);
/// Open a binder body by replacing its bound variables with free names.
SupRef open_with_frees(const SupRef &body, const std::vector<std::string> &names);
/// Bind occurrences of a free name to de Bruijn index `depth` (relative to
/// the top of `s`); used when closing binders.
SupRef bind_free(const SupRef &s, const std::string &name, int depth);
/// Substitute a term for a free variable.
SupRef subst_free(const SupRef &s, const std::string &name, const TermRef &value);
TermRef subst_free_term(const TermRef &t, const std::string &name, const TermRef &value);
/// Substitute a superposition for a free variable using the summandwise
/// rule  t<sum a_i . v_i / x> = sum a_i . t[v_i/x]; the identity when
/// `name` does not occur.
SupRef subst_free_sup(const SupRef &s, const std::string &name, const SupRef &value);

// --- printing ---
std::string term_to_string(const TermRef &t);
std::string sup_to_string(const SupRef &s);

/// Fresh uid source for binders constructed outside the parser.
long next_binder_uid();

} // namespace punq
