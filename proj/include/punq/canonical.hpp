#pragma once

#include "punq/ast.hpp"

#include <vector>

namespace punq {

/// A superposition in canonical form: pairwise distinct terms with nonzero
/// amplitudes, sorted by the total term order. The empty list is the null
/// vector.
struct CanonicalForm {
    std::vector<std::pair<Amplitude, TermRef>> terms;

    bool is_zero() const { return terms.empty(); }
    bool is_single_unit() const { return terms.size() == 1 && terms[0].first.is_one(); }
    SupRef to_sup() const;
};

CanonicalForm canonicalize(const SupRef &s);

/// Equivalence under the vector-space axioms: equal canonical forms.
bool equiv(const SupRef &a, const SupRef &b);

/// Inner product over canonical forms, sum_{ij} conj(a_i) b_j delta(t_i,t_j)
/// with a structural Kronecker delta (lambda bodies compared syntactically
/// after alpha-normalization). Intended for closed values; also usable on
/// canonical coefficient vectors of arbitrary superpositions.
Amplitude inner_product(const SupRef &v, const SupRef &w);
Amplitude inner_product(const CanonicalForm &v, const CanonicalForm &w);

RealAlg norm_sq(const SupRef &v);

std::string canonical_to_string(const CanonicalForm &cf);

} // namespace punq
