#include "punq/canonical.hpp"

#include <algorithm>
#include <sstream>

namespace punq {

namespace {

void flatten(const SupRef &s, const Amplitude &scale, std::vector<std::pair<Amplitude, TermRef>> &out) {
    switch (s->tag) {
    case SupTag::Single: out.emplace_back(scale, s->term); break;
    case SupTag::Zero: break;
    case SupTag::Scaled: flatten(s->a, scale * s->amp, out); break;
    case SupTag::Sum:
        flatten(s->a, scale, out);
        flatten(s->b, scale, out);
        break;
    }
}

} // namespace

CanonicalForm canonicalize(const SupRef &s) {
    std::vector<std::pair<Amplitude, TermRef>> flat;
    flatten(s, Amplitude::one(), flat);
    std::stable_sort(flat.begin(), flat.end(),
                     [](const auto &x, const auto &y) { return term_compare(x.second, y.second) < 0; });
    CanonicalForm cf;
    for (auto &entry : flat) {
        if (!cf.terms.empty() && term_equal(cf.terms.back().second, entry.second)) {
            cf.terms.back().first = cf.terms.back().first + entry.first;
            if (cf.terms.back().first.is_zero()) cf.terms.pop_back();
        } else {
            if (entry.first.is_zero()) continue;
            cf.terms.push_back(entry);
        }
    }
    return cf;
}

SupRef CanonicalForm::to_sup() const {
    if (terms.empty()) return sup_zero();
    SupRef acc;
    for (auto &[a, t] : terms) {
        SupRef piece = sup_term(t);
        if (!a.is_one()) piece = sup_scaled(a, piece);
        acc = acc ? sup_sum(acc, piece) : piece;
    }
    return acc;
}

bool equiv(const SupRef &a, const SupRef &b) {
    CanonicalForm ca = canonicalize(a);
    CanonicalForm cb = canonicalize(b);
    if (ca.terms.size() != cb.terms.size()) return false;
    for (size_t i = 0; i < ca.terms.size(); ++i) {
        if (ca.terms[i].first != cb.terms[i].first) return false;
        if (!term_equal(ca.terms[i].second, cb.terms[i].second)) return false;
    }
    return true;
}

Amplitude inner_product(const CanonicalForm &v, const CanonicalForm &w) {
    // Both lists are sorted by the term order, so the Kronecker delta
    // reduces to a linear merge.
    Amplitude acc = Amplitude::zero();
    size_t i = 0, j = 0;
    while (i < v.terms.size() && j < w.terms.size()) {
        int c = term_compare(v.terms[i].second, w.terms[j].second);
        if (c < 0)
            ++i;
        else if (c > 0)
            ++j;
        else {
            acc = acc + v.terms[i].first.conj() * w.terms[j].first;
            ++i;
            ++j;
        }
    }
    return acc;
}

Amplitude inner_product(const SupRef &v, const SupRef &w) {
    return inner_product(canonicalize(v), canonicalize(w));
}

RealAlg norm_sq(const SupRef &v) {
    CanonicalForm cf = canonicalize(v);
    RealAlg acc;
    for (auto &[a, t] : cf.terms) acc = acc + a.norm_sq();
    return acc;
}

std::string canonical_to_string(const CanonicalForm &cf) { return sup_to_string(cf.to_sup()); }

} // namespace punq
