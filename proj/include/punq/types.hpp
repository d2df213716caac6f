#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace punq {

struct TypeNode;
using TypeRef = std::shared_ptr<const TypeNode>;

enum class TypeTag {
    Bool,     // B
    VarBound, // de Bruijn index into enclosing foralls
    VarFree,  // named free type variable
    LinArrow, // A -o B
    IntArrow, // A => B
    Prod,     // A * B
    Sharp,    // #Q, Q must be ground
    Para,     // $A, the paragraph/stratification modality
    Forall,   // forall X. A (nameless binder, display name retained)
};

struct TypeNode {
    TypeTag tag;
    TypeRef a, b;        // children (a = body for Forall/Sharp/Para)
    int index = 0;       // VarBound
    std::string name;    // VarFree / Forall display name

    TypeNode(TypeTag t) : tag(t) {}
};

TypeRef t_bool();
TypeRef t_var(int index);
TypeRef t_free(const std::string &name);
TypeRef t_lin(TypeRef a, TypeRef b);
TypeRef t_int(TypeRef a, TypeRef b);
TypeRef t_prod(TypeRef a, TypeRef b);
TypeRef t_sharp(TypeRef q); // throws std::invalid_argument unless q is ground
TypeRef t_para(TypeRef a);
TypeRef t_forall(const std::string &display, TypeRef body);
/// Right-nested B^n (n >= 1).
TypeRef t_bools(int n);

/// Ground types Q := B | #Q | $Q | Q*Q.
bool is_ground(const TypeRef &t);

bool type_equal(const TypeRef &x, const TypeRef &y);
int type_compare(const TypeRef &x, const TypeRef &y);
int type_size(const TypeRef &t);
std::string type_to_string(const TypeRef &t);

/// The bang endomorphism: erases # through products, $ and forall;
/// identity on arrows, B and variables.
TypeRef bang(const TypeRef &t);

/// Decides the subtyping preorder (reflexivity, transitivity, contra/
/// covariant arrows, covariant product/$/forall, and the ground axioms
/// Q <= #Q, ##Q <= #Q, Q <= #!(Q), #$Q <= $#Q).
bool subtype(const TypeRef &a, const TypeRef &b);

/// Polarity-aware substitution of `c` for the free variable `name`.
/// Positive occurrences receive c, negative ones (domains of =>) !(c).
/// Entry point substitutes at positive polarity, i.e. A[C/X].
TypeRef subst_type(const TypeRef &a, const std::string &name, const TypeRef &c, bool positive = true);

/// Substitute for de Bruijn index 0 of a Forall body (positive polarity
/// entry, used by forall-elimination). `c` must be closed.
TypeRef open_forall(const TypeRef &forall_type, const TypeRef &c);
/// Replace bound index 0 with a fresh free variable (forall-introduction).
TypeRef open_forall_free(const TypeRef &forall_type, const std::string &fresh);
/// Inverse of open_forall_free: rebind the named free variable.
TypeRef close_forall(const TypeRef &body, const std::string &name, const std::string &display);

/// card(Q): dimension of the ground type Q (product of 2 per B leaf).
/// Throws std::invalid_argument on non-ground input.
unsigned long card(const TypeRef &q);

/// Strip leading $ layers; returns stripped count.
TypeRef strip_paras(const TypeRef &t, int &count);
TypeRef wrap_paras(TypeRef t, int count);

} // namespace punq
