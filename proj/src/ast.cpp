#include "punq/ast.hpp"

#include "punq/canonical.hpp"

#include <atomic>
#include <sstream>
#include <stdexcept>

namespace punq {

namespace {
std::atomic<long> g_binder_uid{1};
}

long next_binder_uid() { return g_binder_uid.fetch_add(1); }

namespace {

std::shared_ptr<TermNode> mk_term(TermTag t) { return std::make_shared<TermNode>(t); }
std::shared_ptr<SupNode> mk_sup(SupTag t) { return std::make_shared<SupNode>(t); }

} // namespace

TermRef term_var(int index) {
    auto n = mk_term(TermTag::Var);
    n->index = index;
    return n;
}

TermRef term_free(const std::string &name) {
    auto n = mk_term(TermTag::Free);
    n->name = name;
    return n;
}

TermRef term_ket0() {
    static TermRef k = mk_term(TermTag::Ket0);
    return k;
}

TermRef term_ket1() {
    static TermRef k = mk_term(TermTag::Ket1);
    return k;
}

TermRef term_if(TermRef cond, SupRef then_branch, SupRef else_branch) {
    auto n = mk_term(TermTag::If);
    n->t1 = std::move(cond);
    n->s1 = std::move(then_branch);
    n->s2 = std::move(else_branch);
    return n;
}

TermRef term_lam(const std::string &display, std::optional<TypeRef> annot, SupRef body) {
    auto n = mk_term(TermTag::Lam);
    n->b1 = Binder{display, next_binder_uid()};
    n->annot = std::move(annot);
    n->s1 = std::move(body);
    return n;
}

TermRef term_app(TermRef fun, TermRef arg) {
    auto n = mk_term(TermTag::App);
    n->t1 = std::move(fun);
    n->t2 = std::move(arg);
    return n;
}

TermRef term_pair(TermRef l, TermRef r) {
    auto n = mk_term(TermTag::Pair);
    n->t1 = std::move(l);
    n->t2 = std::move(r);
    return n;
}

TermRef term_let(const std::string &x, const std::string &y, TermRef scrutinee, SupRef body) {
    auto n = mk_term(TermTag::LetPair);
    n->b1 = Binder{x, next_binder_uid()};
    n->b2 = Binder{y, next_binder_uid()};
    n->t1 = std::move(scrutinee);
    n->s1 = std::move(body);
    return n;
}

SupRef sup_term(TermRef t) {
    auto n = mk_sup(SupTag::Single);
    n->term = std::move(t);
    return n;
}

SupRef sup_zero() {
    static SupRef z = mk_sup(SupTag::Zero);
    return z;
}

SupRef sup_scaled(Amplitude a, SupRef s) {
    auto n = mk_sup(SupTag::Scaled);
    n->amp = std::move(a);
    n->a = std::move(s);
    return n;
}

SupRef sup_sum(SupRef a, SupRef b) {
    auto n = mk_sup(SupTag::Sum);
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

// ---------------------------------------------------------------------------
// Sugar distribution
// ---------------------------------------------------------------------------

namespace {

SupRef from_weighted(std::vector<std::pair<Amplitude, TermRef>> parts) {
    if (parts.empty()) return sup_zero();
    SupRef acc;
    for (auto &p : parts) {
        SupRef piece = sup_term(p.second);
        if (!p.first.is_one()) piece = sup_scaled(p.first, piece);
        acc = acc ? sup_sum(acc, piece) : piece;
    }
    return acc;
}

} // namespace

SupRef mk_if(SupRef cond, SupRef then_branch, SupRef else_branch) {
    if (cond->tag == SupTag::Single)
        return sup_term(term_if(cond->term, std::move(then_branch), std::move(else_branch)));
    CanonicalForm cf = canonicalize(cond);
    std::vector<std::pair<Amplitude, TermRef>> parts;
    parts.reserve(cf.terms.size());
    for (auto &[a, t] : cf.terms) parts.emplace_back(a, term_if(t, then_branch, else_branch));
    return from_weighted(std::move(parts));
}

SupRef mk_app(SupRef fun, SupRef arg) {
    if (fun->tag == SupTag::Single && arg->tag == SupTag::Single)
        return sup_term(term_app(fun->term, arg->term));
    CanonicalForm cf = canonicalize(fun);
    CanonicalForm ca = canonicalize(arg);
    std::vector<std::pair<Amplitude, TermRef>> parts;
    parts.reserve(cf.terms.size() * ca.terms.size());
    for (auto &[af, tf] : cf.terms)
        for (auto &[aa, ta] : ca.terms) parts.emplace_back(af * aa, term_app(tf, ta));
    return from_weighted(std::move(parts));
}

SupRef mk_pair(SupRef l, SupRef r) {
    if (l->tag == SupTag::Single && r->tag == SupTag::Single)
        return sup_term(term_pair(l->term, r->term));
    CanonicalForm cl = canonicalize(l);
    CanonicalForm cr = canonicalize(r);
    std::vector<std::pair<Amplitude, TermRef>> parts;
    parts.reserve(cl.terms.size() * cr.terms.size());
    for (auto &[al, tl] : cl.terms)
        for (auto &[ar, tr] : cr.terms) parts.emplace_back(al * ar, term_pair(tl, tr));
    return from_weighted(std::move(parts));
}

SupRef mk_let(const std::string &x, const std::string &y, SupRef scrutinee, SupRef body) {
    if (scrutinee->tag == SupTag::Single)
        return sup_term(term_let(x, y, scrutinee->term, std::move(body)));
    CanonicalForm cf = canonicalize(scrutinee);
    std::vector<std::pair<Amplitude, TermRef>> parts;
    parts.reserve(cf.terms.size());
    for (auto &[a, t] : cf.terms) parts.emplace_back(a, term_let(x, y, t, body));
    return from_weighted(std::move(parts));
}

// ---------------------------------------------------------------------------
// Named-binder builders: abstract free names into de Bruijn binders.
// ---------------------------------------------------------------------------

namespace {

TermRef abstract_term(const TermRef &t, const std::string &name, int depth);

SupRef abstract_sup(const SupRef &s, const std::string &name, int depth) {
    switch (s->tag) {
    case SupTag::Single: {
        TermRef t = abstract_term(s->term, name, depth);
        return t == s->term ? s : sup_term(t);
    }
    case SupTag::Zero: return s;
    case SupTag::Scaled: {
        SupRef a = abstract_sup(s->a, name, depth);
        return a == s->a ? s : sup_scaled(s->amp, a);
    }
    case SupTag::Sum: {
        SupRef a = abstract_sup(s->a, name, depth);
        SupRef b = abstract_sup(s->b, name, depth);
        return (a == s->a && b == s->b) ? s : sup_sum(a, b);
    }
    }
    return s;
}

TermRef abstract_term(const TermRef &t, const std::string &name, int depth) {
    switch (t->tag) {
    case TermTag::Var:
    case TermTag::Ket0:
    case TermTag::Ket1: return t;
    case TermTag::Free: return t->name == name ? term_var(depth) : t;
    case TermTag::If: {
        TermRef c = abstract_term(t->t1, name, depth);
        SupRef a = abstract_sup(t->s1, name, depth);
        SupRef b = abstract_sup(t->s2, name, depth);
        if (c == t->t1 && a == t->s1 && b == t->s2) return t;
        return term_if(c, a, b);
    }
    case TermTag::Lam: {
        SupRef body = abstract_sup(t->s1, name, depth + 1);
        if (body == t->s1) return t;
        auto n = mk_term(TermTag::Lam);
        n->b1 = t->b1;
        n->annot = t->annot;
        n->s1 = body;
        return n;
    }
    case TermTag::App: {
        TermRef f = abstract_term(t->t1, name, depth);
        TermRef a = abstract_term(t->t2, name, depth);
        return (f == t->t1 && a == t->t2) ? t : term_app(f, a);
    }
    case TermTag::Pair: {
        TermRef l = abstract_term(t->t1, name, depth);
        TermRef r = abstract_term(t->t2, name, depth);
        return (l == t->t1 && r == t->t2) ? t : term_pair(l, r);
    }
    case TermTag::LetPair: {
        TermRef sc = abstract_term(t->t1, name, depth);
        SupRef body = abstract_sup(t->s1, name, depth + 2);
        if (sc == t->t1 && body == t->s1) return t;
        auto n = mk_term(TermTag::LetPair);
        n->b1 = t->b1;
        n->b2 = t->b2;
        n->t1 = sc;
        n->s1 = body;
        return n;
    }
    }
    return t;
}

} // namespace

SupRef bind_free(const SupRef &s, const std::string &name, int depth) {
    return abstract_sup(s, name, depth);
}

SupRef lam(const std::string &name, SupRef body_with_free) {
    return sup_term(term_lam(name, std::nullopt, abstract_sup(body_with_free, name, 0)));
}

SupRef lam(const std::string &name, TypeRef annot, SupRef body_with_free) {
    return sup_term(term_lam(name, std::move(annot), abstract_sup(body_with_free, name, 0)));
}

SupRef let_pair(const std::string &x, const std::string &y, SupRef scrutinee, SupRef body) {
    SupRef b = abstract_sup(abstract_sup(body, y, 0), x, 1);
    return mk_let(x, y, std::move(scrutinee), b);
}

// ---------------------------------------------------------------------------
// Predicates / metrics
// ---------------------------------------------------------------------------

bool is_basis_value(const TermRef &t) {
    switch (t->tag) {
    case TermTag::Ket0:
    case TermTag::Ket1:
    case TermTag::Lam: return true;
    case TermTag::Pair: return is_basis_value(t->t1) && is_basis_value(t->t2);
    default: return false;
    }
}

bool is_value(const SupRef &s) {
    switch (s->tag) {
    case SupTag::Single: return is_basis_value(s->term);
    case SupTag::Zero: return true;
    case SupTag::Scaled: return is_value(s->a);
    case SupTag::Sum: return is_value(s->a) && is_value(s->b);
    }
    return false;
}

bool is_closed(const SupRef &s) { return free_vars(s).empty(); }

long term_size(const TermRef &t) {
    switch (t->tag) {
    case TermTag::Var:
    case TermTag::Free:
    case TermTag::Ket0:
    case TermTag::Ket1: return 1;
    case TermTag::If: return 1 + term_size(t->t1) + std::max(sup_size(t->s1), sup_size(t->s2));
    case TermTag::Lam: return 1 + sup_size(t->s1);
    case TermTag::App:
    case TermTag::Pair: return term_size(t->t1) + term_size(t->t2) + 1;
    case TermTag::LetPair: return 1 + term_size(t->t1) + sup_size(t->s1);
    }
    return 0;
}

long sup_size(const SupRef &s) {
    switch (s->tag) {
    case SupTag::Single: return term_size(s->term);
    case SupTag::Zero: return 0;
    case SupTag::Scaled: return sup_size(s->a);
    case SupTag::Sum: return std::max(sup_size(s->a), sup_size(s->b));
    }
    return 0;
}

namespace {

void collect_free_term(const TermRef &t, std::set<std::string> &out);

void collect_free_sup(const SupRef &s, std::set<std::string> &out) {
    switch (s->tag) {
    case SupTag::Single: collect_free_term(s->term, out); break;
    case SupTag::Zero: break;
    case SupTag::Scaled: collect_free_sup(s->a, out); break;
    case SupTag::Sum:
        collect_free_sup(s->a, out);
        collect_free_sup(s->b, out);
        break;
    }
}

void collect_free_term(const TermRef &t, std::set<std::string> &out) {
    switch (t->tag) {
    case TermTag::Var:
    case TermTag::Ket0:
    case TermTag::Ket1: break;
    case TermTag::Free: out.insert(t->name); break;
    case TermTag::If:
        collect_free_term(t->t1, out);
        collect_free_sup(t->s1, out);
        collect_free_sup(t->s2, out);
        break;
    case TermTag::Lam: collect_free_sup(t->s1, out); break;
    case TermTag::App:
    case TermTag::Pair:
        collect_free_term(t->t1, out);
        collect_free_term(t->t2, out);
        break;
    case TermTag::LetPair:
        collect_free_term(t->t1, out);
        collect_free_sup(t->s1, out);
        break;
    }
}

} // namespace

std::set<std::string> free_vars(const SupRef &s) {
    std::set<std::string> out;
    collect_free_sup(s, out);
    return out;
}

std::set<std::string> free_vars(const TermRef &t) {
    std::set<std::string> out;
    collect_free_term(t, out);
    return out;
}

// ---------------------------------------------------------------------------
// Comparison
// ---------------------------------------------------------------------------

int term_compare(const TermRef &x, const TermRef &y) {
    if (x.get() == y.get()) return 0;
    if (x->tag != y->tag) return x->tag < y->tag ? -1 : 1;
    switch (x->tag) {
    case TermTag::Var: return x->index == y->index ? 0 : (x->index < y->index ? -1 : 1);
    case TermTag::Free: return x->name.compare(y->name);
    case TermTag::Ket0:
    case TermTag::Ket1: return 0;
    case TermTag::If: {
        int c = term_compare(x->t1, y->t1);
        if (c) return c;
        c = sup_compare(x->s1, y->s1);
        if (c) return c;
        return sup_compare(x->s2, y->s2);
    }
    case TermTag::Lam: return sup_compare(x->s1, y->s1);
    case TermTag::App:
    case TermTag::Pair: {
        int c = term_compare(x->t1, y->t1);
        if (c) return c;
        return term_compare(x->t2, y->t2);
    }
    case TermTag::LetPair: {
        int c = term_compare(x->t1, y->t1);
        if (c) return c;
        return sup_compare(x->s1, y->s1);
    }
    }
    return 0;
}

int sup_compare(const SupRef &x, const SupRef &y) {
    if (x.get() == y.get()) return 0;
    if (x->tag != y->tag) return x->tag < y->tag ? -1 : 1;
    switch (x->tag) {
    case SupTag::Single: return term_compare(x->term, y->term);
    case SupTag::Zero: return 0;
    case SupTag::Scaled: {
        int c = x->amp.compare(y->amp);
        if (c) return c;
        return sup_compare(x->a, y->a);
    }
    case SupTag::Sum: {
        int c = sup_compare(x->a, y->a);
        if (c) return c;
        return sup_compare(x->b, y->b);
    }
    }
    return 0;
}

bool term_equal(const TermRef &x, const TermRef &y) { return term_compare(x, y) == 0; }
bool sup_equal(const SupRef &x, const SupRef &y) { return sup_compare(x, y) == 0; }

// ---------------------------------------------------------------------------
// Substitution
// ---------------------------------------------------------------------------

namespace {

TermRef shift_term(const TermRef &t, int d, int cutoff);

SupRef shift_sup(const SupRef &s, int d, int cutoff) {
    if (d == 0) return s;
    switch (s->tag) {
    case SupTag::Single: {
        TermRef t = shift_term(s->term, d, cutoff);
        return t == s->term ? s : sup_term(t);
    }
    case SupTag::Zero: return s;
    case SupTag::Scaled: {
        SupRef a = shift_sup(s->a, d, cutoff);
        return a == s->a ? s : sup_scaled(s->amp, a);
    }
    case SupTag::Sum: {
        SupRef a = shift_sup(s->a, d, cutoff);
        SupRef b = shift_sup(s->b, d, cutoff);
        return (a == s->a && b == s->b) ? s : sup_sum(a, b);
    }
    }
    return s;
}

TermRef shift_term(const TermRef &t, int d, int cutoff) {
    switch (t->tag) {
    case TermTag::Var:
        if (t->index < cutoff) return t;
        return term_var(t->index + d);
    case TermTag::Free:
    case TermTag::Ket0:
    case TermTag::Ket1: return t;
    case TermTag::If: {
        TermRef c = shift_term(t->t1, d, cutoff);
        SupRef a = shift_sup(t->s1, d, cutoff);
        SupRef b = shift_sup(t->s2, d, cutoff);
        if (c == t->t1 && a == t->s1 && b == t->s2) return t;
        return term_if(c, a, b);
    }
    case TermTag::Lam: {
        SupRef body = shift_sup(t->s1, d, cutoff + 1);
        if (body == t->s1) return t;
        auto n = mk_term(TermTag::Lam);
        *n = *t;
        n->s1 = body;
        return n;
    }
    case TermTag::App: {
        TermRef f = shift_term(t->t1, d, cutoff);
        TermRef a = shift_term(t->t2, d, cutoff);
        return (f == t->t1 && a == t->t2) ? t : term_app(f, a);
    }
    case TermTag::Pair: {
        TermRef l = shift_term(t->t1, d, cutoff);
        TermRef r = shift_term(t->t2, d, cutoff);
        return (l == t->t1 && r == t->t2) ? t : term_pair(l, r);
    }
    case TermTag::LetPair: {
        TermRef sc = shift_term(t->t1, d, cutoff);
        SupRef body = shift_sup(t->s1, d, cutoff + 2);
        if (sc == t->t1 && body == t->s1) return t;
        auto n = mk_term(TermTag::LetPair);
        *n = *t;
        n->t1 = sc;
        n->s1 = body;
        return n;
    }
    }
    return t;
}

// Substitute vals for indices level..level+k-1 (vals[0] = highest index of
// the group) and decrement indices above the group by k.
TermRef subst_term_group(const TermRef &t, int level, const std::vector<TermRef> &vals);

SupRef subst_sup_group(const SupRef &s, int level, const std::vector<TermRef> &vals) {
    switch (s->tag) {
    case SupTag::Single: {
        TermRef t = subst_term_group(s->term, level, vals);
        return t == s->term ? s : sup_term(t);
    }
    case SupTag::Zero: return s;
    case SupTag::Scaled: {
        SupRef a = subst_sup_group(s->a, level, vals);
        return a == s->a ? s : sup_scaled(s->amp, a);
    }
    case SupTag::Sum: {
        SupRef a = subst_sup_group(s->a, level, vals);
        SupRef b = subst_sup_group(s->b, level, vals);
        return (a == s->a && b == s->b) ? s : sup_sum(a, b);
    }
    }
    return s;
}

TermRef subst_term_group(const TermRef &t, int level, const std::vector<TermRef> &vals) {
    int k = static_cast<int>(vals.size());
    switch (t->tag) {
    case TermTag::Var: {
        if (t->index < level) return t;
        if (t->index < level + k) {
            const TermRef &v = vals[static_cast<size_t>(level + k - 1 - t->index)];
            return shift_term(v, level, 0);
        }
        return term_var(t->index - k);
    }
    case TermTag::Free:
    case TermTag::Ket0:
    case TermTag::Ket1: return t;
    case TermTag::If: {
        TermRef c = subst_term_group(t->t1, level, vals);
        SupRef a = subst_sup_group(t->s1, level, vals);
        SupRef b = subst_sup_group(t->s2, level, vals);
        if (c == t->t1 && a == t->s1 && b == t->s2) return t;
        return term_if(c, a, b);
    }
    case TermTag::Lam: {
        SupRef body = subst_sup_group(t->s1, level + 1, vals);
        if (body == t->s1) return t;
        auto n = mk_term(TermTag::Lam);
        *n = *t;
        n->s1 = body;
        return n;
    }
    case TermTag::App: {
        TermRef f = subst_term_group(t->t1, level, vals);
        TermRef a = subst_term_group(t->t2, level, vals);
        return (f == t->t1 && a == t->t2) ? t : term_app(f, a);
    }
    case TermTag::Pair: {
        TermRef l = subst_term_group(t->t1, level, vals);
        TermRef r = subst_term_group(t->t2, level, vals);
        return (l == t->t1 && r == t->t2) ? t : term_pair(l, r);
    }
    case TermTag::LetPair: {
        TermRef sc = subst_term_group(t->t1, level, vals);
        SupRef body = subst_sup_group(t->s1, level + 2, vals);
        if (sc == t->t1 && body == t->s1) return t;
        auto n = mk_term(TermTag::LetPair);
        *n = *t;
        n->t1 = sc;
        n->s1 = body;
        return n;
    }
    }
    return t;
}

} // namespace

SupRef subst_group(const SupRef &body, const std::vector<TermRef> &vals) {
    return subst_sup_group(body, 0, vals);
}

SupRef open_with_frees(const SupRef &body, const std::vector<std::string> &names) {
    std::vector<TermRef> vals;
    vals.reserve(names.size());
    for (const auto &n : names) vals.push_back(term_free(n));
    return subst_group(body, vals);
}

namespace {

TermRef subst_free_rec(const TermRef &t, const std::string &name, const TermRef &value);

SupRef subst_free_rec_sup(const SupRef &s, const std::string &name, const TermRef &value) {
    switch (s->tag) {
    case SupTag::Single: {
        TermRef t = subst_free_rec(s->term, name, value);
        return t == s->term ? s : sup_term(t);
    }
    case SupTag::Zero: return s;
    case SupTag::Scaled: {
        SupRef a = subst_free_rec_sup(s->a, name, value);
        return a == s->a ? s : sup_scaled(s->amp, a);
    }
    case SupTag::Sum: {
        SupRef a = subst_free_rec_sup(s->a, name, value);
        SupRef b = subst_free_rec_sup(s->b, name, value);
        return (a == s->a && b == s->b) ? s : sup_sum(a, b);
    }
    }
    return s;
}

TermRef subst_free_rec(const TermRef &t, const std::string &name, const TermRef &value) {
    switch (t->tag) {
    case TermTag::Var:
    case TermTag::Ket0:
    case TermTag::Ket1: return t;
    case TermTag::Free: return t->name == name ? value : t;
    case TermTag::If: {
        TermRef c = subst_free_rec(t->t1, name, value);
        SupRef a = subst_free_rec_sup(t->s1, name, value);
        SupRef b = subst_free_rec_sup(t->s2, name, value);
        if (c == t->t1 && a == t->s1 && b == t->s2) return t;
        return term_if(c, a, b);
    }
    case TermTag::Lam: {
        SupRef body = subst_free_rec_sup(t->s1, name, value);
        if (body == t->s1) return t;
        auto n = mk_term(TermTag::Lam);
        *n = *t;
        n->s1 = body;
        return n;
    }
    case TermTag::App: {
        TermRef f = subst_free_rec(t->t1, name, value);
        TermRef a = subst_free_rec(t->t2, name, value);
        return (f == t->t1 && a == t->t2) ? t : term_app(f, a);
    }
    case TermTag::Pair: {
        TermRef l = subst_free_rec(t->t1, name, value);
        TermRef r = subst_free_rec(t->t2, name, value);
        return (l == t->t1 && r == t->t2) ? t : term_pair(l, r);
    }
    case TermTag::LetPair: {
        TermRef sc = subst_free_rec(t->t1, name, value);
        SupRef body = subst_free_rec_sup(t->s1, name, value);
        if (sc == t->t1 && body == t->s1) return t;
        auto n = mk_term(TermTag::LetPair);
        *n = *t;
        n->t1 = sc;
        n->s1 = body;
        return n;
    }
    }
    return t;
}

} // namespace

SupRef subst_free(const SupRef &s, const std::string &name, const TermRef &value) {
    return subst_free_rec_sup(s, name, value);
}

TermRef subst_free_term(const TermRef &t, const std::string &name, const TermRef &value) {
    return subst_free_rec(t, name, value);
}

SupRef subst_free_sup(const SupRef &s, const std::string &name, const SupRef &value) {
    if (!free_vars(s).count(name)) return s;
    CanonicalForm cv = canonicalize(value);
    if (cv.is_single_unit()) return subst_free(s, name, cv.terms[0].second);
    SupRef acc;
    for (auto &[a, v] : cv.terms) {
        SupRef piece = sup_scaled(a, subst_free(s, name, v));
        acc = acc ? sup_sum(acc, piece) : piece;
    }
    return acc ? acc : sup_zero();
}

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

namespace {

struct Printer {
    std::vector<std::string> scope;

    std::string fresh(const std::string &display) {
        std::string base = display.empty() ? "v" : display;
        std::string name = base;
        int k = 0;
        auto taken = [&](const std::string &s) {
            for (auto &b : scope)
                if (b == s) return true;
            return false;
        };
        while (taken(name)) name = base + std::to_string(++k);
        return name;
    }

    // precedence: 0 = sup sum, 1 = scaled, 2 = application, 3 = atom
    void sup(std::ostringstream &os, const SupRef &s, int prec) {
        switch (s->tag) {
        case SupTag::Single: term(os, s->term, prec); break;
        case SupTag::Zero: os << "0vec"; break;
        case SupTag::Scaled: {
            bool paren = prec > 1;
            if (paren) os << "(";
            os << s->amp.to_string() << " * ";
            sup(os, s->a, 2);
            if (paren) os << ")";
            break;
        }
        case SupTag::Sum: {
            bool paren = prec > 0;
            if (paren) os << "(";
            sup(os, s->a, 0);
            os << " + ";
            sup(os, s->b, 1);
            if (paren) os << ")";
            break;
        }
        }
    }

    void term(std::ostringstream &os, const TermRef &t, int prec) {
        switch (t->tag) {
        case TermTag::Var: {
            int i = static_cast<int>(scope.size()) - 1 - t->index;
            if (i >= 0)
                os << scope[static_cast<size_t>(i)];
            else
                os << "[" << t->index << "]";
            break;
        }
        case TermTag::Free: os << t->name; break;
        case TermTag::Ket0: os << "|0>"; break;
        case TermTag::Ket1: os << "|1>"; break;
        case TermTag::If: {
            bool paren = prec > 0;
            if (paren) os << "(";
            os << "if ";
            term(os, t->t1, 2);
            os << " then ";
            sup(os, t->s1, 0);
            os << " else ";
            sup(os, t->s2, 0);
            if (paren) os << ")";
            break;
        }
        case TermTag::Lam: {
            bool paren = prec > 0;
            if (paren) os << "(";
            std::string nm = fresh(t->b1.display);
            os << "\\" << nm;
            if (t->annot) os << ":" << type_to_string(*t->annot);
            os << ". ";
            scope.push_back(nm);
            sup(os, t->s1, 0);
            scope.pop_back();
            if (paren) os << ")";
            break;
        }
        case TermTag::App: {
            bool paren = prec > 2;
            if (paren) os << "(";
            term(os, t->t1, 2);
            os << " ";
            term(os, t->t2, 3);
            if (paren) os << ")";
            break;
        }
        case TermTag::Pair:
            os << "(";
            term(os, t->t1, 0);
            os << ", ";
            term(os, t->t2, 0);
            os << ")";
            break;
        case TermTag::LetPair: {
            bool paren = prec > 0;
            if (paren) os << "(";
            std::string nx = fresh(t->b1.display);
            scope.push_back(nx);
            std::string ny = fresh(t->b2.display);
            scope.pop_back();
            os << "let (" << nx << ", " << ny << ") = ";
            term(os, t->t1, 2);
            os << " in ";
            scope.push_back(nx);
            scope.push_back(ny);
            sup(os, t->s1, 0);
            scope.pop_back();
            scope.pop_back();
            if (paren) os << ")";
            break;
        }
        }
    }
};

} // namespace

std::string term_to_string(const TermRef &t) {
    std::ostringstream os;
    Printer p;
    p.term(os, t, 0);
    return os.str();
}

std::string sup_to_string(const SupRef &s) {
    std::ostringstream os;
    Printer p;
    p.sup(os, s, 0);
    return os.str();
}

} // namespace punq
