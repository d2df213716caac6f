#include "punq/dlal.hpp"

#include "punq/eval.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace punq {

// ---------------------------------------------------------------------------
// Terms
// ---------------------------------------------------------------------------

namespace {
std::shared_ptr<DlalNode> dmk(DlalTag t) { return std::make_shared<DlalNode>(t); }
} // namespace

DlalRef d_var(int index) {
    auto n = dmk(DlalTag::Var);
    n->index = index;
    return n;
}

DlalRef d_free(const std::string &name) {
    auto n = dmk(DlalTag::Free);
    n->name = name;
    return n;
}

DlalRef d_lam(const std::string &display, DlalRef body) {
    auto n = dmk(DlalTag::Lam);
    n->name = display;
    n->a = std::move(body);
    return n;
}

DlalRef d_app(DlalRef f, DlalRef a) {
    auto n = dmk(DlalTag::App);
    n->a = std::move(f);
    n->b = std::move(a);
    return n;
}

DlalRef d_star() {
    static DlalRef s = dmk(DlalTag::Star);
    return s;
}

DlalRef d_tt() {
    static DlalRef t = d_lam("x", d_lam("y", d_var(1)));
    return t;
}

DlalRef d_ff() {
    static DlalRef f = d_lam("x", d_lam("y", d_var(0)));
    return f;
}

int dlal_compare(const DlalRef &x, const DlalRef &y) {
    if (x.get() == y.get()) return 0;
    if (x->tag != y->tag) return x->tag < y->tag ? -1 : 1;
    switch (x->tag) {
    case DlalTag::Var: return x->index == y->index ? 0 : (x->index < y->index ? -1 : 1);
    case DlalTag::Free: return x->name.compare(y->name);
    case DlalTag::Star: return 0;
    case DlalTag::Lam: return dlal_compare(x->a, y->a);
    case DlalTag::App: {
        int c = dlal_compare(x->a, y->a);
        if (c) return c;
        return dlal_compare(x->b, y->b);
    }
    }
    return 0;
}

bool dlal_equal(const DlalRef &x, const DlalRef &y) { return dlal_compare(x, y) == 0; }

long dlal_size(const DlalRef &t) {
    switch (t->tag) {
    case DlalTag::Var:
    case DlalTag::Free:
    case DlalTag::Star: return 1;
    case DlalTag::Lam: return 1 + dlal_size(t->a);
    case DlalTag::App: return 1 + dlal_size(t->a) + dlal_size(t->b);
    }
    return 0;
}

namespace {

void print_dlal(std::ostringstream &os, const DlalRef &t, int prec,
                std::vector<std::string> &scope) {
    switch (t->tag) {
    case DlalTag::Var: {
        int i = static_cast<int>(scope.size()) - 1 - t->index;
        if (i >= 0)
            os << scope[static_cast<size_t>(i)];
        else
            os << "[" << t->index << "]";
        break;
    }
    case DlalTag::Free: os << t->name; break;
    case DlalTag::Star: os << "*"; break;
    case DlalTag::Lam: {
        if (dlal_equal(t, d_tt())) { os << "tt"; break; }
        if (dlal_equal(t, d_ff())) { os << "ff"; break; }
        bool paren = prec > 0;
        if (paren) os << "(";
        std::string base = t->name.empty() ? "v" : t->name;
        std::string nm = base;
        int k = 0;
        auto taken = [&](const std::string &s) {
            for (auto &b : scope)
                if (b == s) return true;
            return false;
        };
        while (taken(nm)) nm = base + std::to_string(++k);
        os << "\\" << nm << ". ";
        scope.push_back(nm);
        print_dlal(os, t->a, 0, scope);
        scope.pop_back();
        if (paren) os << ")";
        break;
    }
    case DlalTag::App: {
        bool paren = prec > 1;
        if (paren) os << "(";
        print_dlal(os, t->a, 1, scope);
        os << " ";
        print_dlal(os, t->b, 2, scope);
        if (paren) os << ")";
        break;
    }
    }
}

} // namespace

std::string dlal_to_string(const DlalRef &t) {
    std::ostringstream os;
    std::vector<std::string> scope;
    print_dlal(os, t, 0, scope);
    return os.str();
}

// ---------------------------------------------------------------------------
// Sets
// ---------------------------------------------------------------------------

void DlalTermSet::insert(DlalRef t) {
    auto it = std::lower_bound(members.begin(), members.end(), t,
                               [](const DlalRef &a, const DlalRef &b) { return dlal_compare(a, b) < 0; });
    if (it != members.end() && dlal_equal(*it, t)) return;
    members.insert(it, std::move(t));
}

bool DlalTermSet::contains(const DlalRef &t) const {
    auto it = std::lower_bound(members.begin(), members.end(), t,
                               [](const DlalRef &a, const DlalRef &b) { return dlal_compare(a, b) < 0; });
    return it != members.end() && dlal_equal(*it, t);
}

long DlalTermSet::size() const {
    long m = 0;
    for (const auto &t : members) m = std::max(m, dlal_size(t));
    return m;
}

bool DlalTermSet::subset_star(const DlalTermSet &other) const {
    for (const auto &t : members) {
        if (t->tag == DlalTag::Star) continue;
        if (!other.contains(t)) return false;
    }
    return true;
}

bool DlalTermSet::equal_star(const DlalTermSet &other) const {
    return subset_star(other) && other.subset_star(*this);
}

std::string DlalTermSet::to_string() const {
    std::ostringstream os;
    os << "{";
    for (size_t i = 0; i < members.size(); ++i) {
        if (i) os << ", ";
        os << dlal_to_string(members[i]);
    }
    os << "}";
    return os.str();
}

// ---------------------------------------------------------------------------
// Reduction: call by value, Church-boolean projection counted as one step
// ---------------------------------------------------------------------------

namespace {

bool d_is_value(const DlalRef &t) {
    return t->tag == DlalTag::Lam || t->tag == DlalTag::Star || t->tag == DlalTag::Var ||
           t->tag == DlalTag::Free;
}

DlalRef d_shift(const DlalRef &t, int d, int cutoff) {
    switch (t->tag) {
    case DlalTag::Var:
        if (t->index < cutoff) return t;
        return d_var(t->index + d);
    case DlalTag::Free:
    case DlalTag::Star: return t;
    case DlalTag::Lam: {
        DlalRef b = d_shift(t->a, d, cutoff + 1);
        return b == t->a ? t : d_lam(t->name, b);
    }
    case DlalTag::App: {
        DlalRef f = d_shift(t->a, d, cutoff);
        DlalRef a = d_shift(t->b, d, cutoff);
        return (f == t->a && a == t->b) ? t : d_app(f, a);
    }
    }
    return t;
}

DlalRef d_subst(const DlalRef &t, int level, const DlalRef &v) {
    switch (t->tag) {
    case DlalTag::Var:
        if (t->index == level) return d_shift(v, level, 0);
        if (t->index > level) return d_var(t->index - 1);
        return t;
    case DlalTag::Free:
    case DlalTag::Star: return t;
    case DlalTag::Lam: {
        DlalRef b = d_subst(t->a, level + 1, v);
        return b == t->a ? t : d_lam(t->name, b);
    }
    case DlalTag::App: {
        DlalRef f = d_subst(t->a, level, v);
        DlalRef a = d_subst(t->b, level, v);
        return (f == t->a && a == t->b) ? t : d_app(f, a);
    }
    }
    return t;
}

bool is_bool_const(const DlalRef &t, bool &is_tt) {
    if (dlal_equal(t, d_tt())) { is_tt = true; return true; }
    if (dlal_equal(t, d_ff())) { is_tt = false; return true; }
    return false;
}

} // namespace

std::optional<DlalRef> dlal_step(const DlalRef &t) {
    if (t->tag != DlalTag::App) return std::nullopt;
    const DlalRef &f = t->a;
    const DlalRef &a = t->b;
    // (tt v) w -> v and (ff v) w -> w in one step
    if (f->tag == DlalTag::App) {
        bool is_tt = false;
        if (is_bool_const(f->a, is_tt) && d_is_value(f->b) && d_is_value(a))
            return is_tt ? f->b : a;
    }
    if (auto r = dlal_step(f)) return d_app(*r, a);
    if (auto r = dlal_step(a)) return d_app(f, *r);
    if (f->tag == DlalTag::Lam && d_is_value(a)) return d_subst(f->a, 0, a);
    return std::nullopt; // stuck application (e.g. * v): normal
}

DlalTermSet dlal_step_all(const DlalTermSet &s) {
    DlalTermSet out;
    for (const auto &t : s.members) {
        auto r = dlal_step(t);
        out.insert(r ? *r : t);
    }
    return out;
}

bool dlal_normal(const DlalTermSet &s) {
    for (const auto &t : s.members)
        if (dlal_step(t)) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Type encoding
// ---------------------------------------------------------------------------

namespace {

TypeRef shift_type(const TypeRef &t, int d, int cutoff) {
    switch (t->tag) {
    case TypeTag::Bool:
    case TypeTag::VarFree: return t;
    case TypeTag::VarBound: return t->index < cutoff ? t : t_var(t->index + d);
    case TypeTag::LinArrow: return t_lin(shift_type(t->a, d, cutoff), shift_type(t->b, d, cutoff));
    case TypeTag::IntArrow: return t_int(shift_type(t->a, d, cutoff), shift_type(t->b, d, cutoff));
    case TypeTag::Prod: return t_prod(shift_type(t->a, d, cutoff), shift_type(t->b, d, cutoff));
    case TypeTag::Sharp: return t_sharp(shift_type(t->a, d, cutoff));
    case TypeTag::Para: return t_para(shift_type(t->a, d, cutoff));
    case TypeTag::Forall: return t_forall(t->name, shift_type(t->a, d, cutoff + 1));
    }
    return t;
}

} // namespace

TypeRef encode_type(const TypeRef &a) {
    switch (a->tag) {
    case TypeTag::VarBound:
    case TypeTag::VarFree: return a;
    case TypeTag::Bool: {
        TypeRef v = t_var(0);
        return t_forall("X", t_lin(v, t_lin(v, v)));
    }
    case TypeTag::LinArrow: return t_lin(encode_type(a->a), encode_type(a->b));
    case TypeTag::IntArrow: return t_int(encode_type(a->a), encode_type(a->b));
    case TypeTag::Prod: {
        TypeRef ea = shift_type(encode_type(a->a), 1, 0);
        TypeRef eb = shift_type(encode_type(a->b), 1, 0);
        TypeRef v = t_var(0);
        return t_forall("X", t_lin(t_lin(ea, t_lin(eb, v)), v));
    }
    case TypeTag::Sharp: return encode_type(a->a);
    case TypeTag::Para: return t_para(encode_type(a->a));
    case TypeTag::Forall: return t_forall(a->name, encode_type(a->a));
    }
    return a;
}

bool is_dlal_type(const TypeRef &a) {
    switch (a->tag) {
    case TypeTag::VarBound:
    case TypeTag::VarFree: return true;
    case TypeTag::Bool:
    case TypeTag::Sharp:
    case TypeTag::Prod: return false;
    case TypeTag::LinArrow:
    case TypeTag::IntArrow: return is_dlal_type(a->a) && is_dlal_type(a->b);
    case TypeTag::Para:
    case TypeTag::Forall: return is_dlal_type(a->a);
    }
    return false;
}

// ---------------------------------------------------------------------------
// Translation
// ---------------------------------------------------------------------------

namespace {

struct BinderInfo {
    bool linear = true;
    int depth = 0; // nesting order, for deterministic abstraction order
    TypeRef type;  // recorded binder type (for variable-headed applications)
};

long count_free(const DlalRef &t, const std::string &name) {
    switch (t->tag) {
    case DlalTag::Free: return t->name == name ? 1 : 0;
    case DlalTag::Var:
    case DlalTag::Star: return 0;
    case DlalTag::Lam: return count_free(t->a, name);
    case DlalTag::App: return count_free(t->a, name) + count_free(t->b, name);
    }
    return 0;
}

// Replace the j-th (leftmost-first) occurrence of `name` by name_j, then
// the caller binds name_1 .. name_k.
DlalRef number_occurrences(const DlalRef &t, const std::string &name, long &next) {
    switch (t->tag) {
    case DlalTag::Free:
        if (t->name == name) return d_free(name + "." + std::to_string(next++));
        return t;
    case DlalTag::Var:
    case DlalTag::Star: return t;
    case DlalTag::Lam: {
        DlalRef b = number_occurrences(t->a, name, next);
        return b == t->a ? t : d_lam(t->name, b);
    }
    case DlalTag::App: {
        DlalRef f = number_occurrences(t->a, name, next);
        DlalRef a = number_occurrences(t->b, name, next);
        return (f == t->a && a == t->b) ? t : d_app(f, a);
    }
    }
    return t;
}

DlalRef bind_dfree(const DlalRef &t, const std::string &name, int depth) {
    switch (t->tag) {
    case DlalTag::Free: return t->name == name ? d_var(depth) : t;
    case DlalTag::Var:
    case DlalTag::Star: return t;
    case DlalTag::Lam: {
        DlalRef b = bind_dfree(t->a, name, depth + 1);
        return b == t->a ? t : d_lam(t->name, b);
    }
    case DlalTag::App: {
        DlalRef f = bind_dfree(t->a, name, depth);
        DlalRef a = bind_dfree(t->b, name, depth);
        return (f == t->a && a == t->b) ? t : d_app(f, a);
    }
    }
    return t;
}

struct Translator {
    long eval_budget;
    std::map<const TermNode *, long> eta_cache;
    std::map<std::string, BinderInfo> env;
    int depth_counter = 0;
    long fresh = 0;

    explicit Translator(long budget) : eval_budget(budget) {}

    static std::string open_name(const Binder &b) { return b.display + "#" + std::to_string(b.uid); }

    DlalTermSet translate_sup(const SupRef &s) {
        switch (s->tag) {
        case SupTag::Single: return translate_term(s->term);
        case SupTag::Zero: {
            DlalTermSet z;
            z.insert(d_star());
            return z;
        }
        case SupTag::Scaled: {
            if (s->amp.is_zero()) {
                DlalTermSet z;
                z.insert(d_star());
                return z;
            }
            return translate_sup(s->a);
        }
        case SupTag::Sum: {
            DlalTermSet l = translate_sup(s->a);
            DlalTermSet r = translate_sup(s->b);
            for (auto &m : r.members) l.insert(m);
            return l;
        }
        }
        return {};
    }

    DlalTermSet singleton(DlalRef t) {
        DlalTermSet s;
        s.insert(std::move(t));
        return s;
    }

    static DlalTermSet set_app(const DlalTermSet &f, const DlalTermSet &a) {
        DlalTermSet out;
        for (const auto &tf : f.members)
            for (const auto &ta : a.members) out.insert(d_app(tf, ta));
        return out;
    }

    DlalTermSet translate_term(const TermRef &t) {
        switch (t->tag) {
        case TermTag::Var:
            throw UntranslatableError("raw de Bruijn index during translation");
        case TermTag::Free: return singleton(d_free(t->name));
        case TermTag::Ket0: return singleton(d_tt());
        case TermTag::Ket1: return singleton(d_ff());
        case TermTag::Pair: {
            DlalTermSet l = translate_term(t->t1);
            DlalTermSet r = translate_term(t->t2);
            DlalTermSet out;
            std::string z = "z." + std::to_string(++fresh);
            for (const auto &tl : l.members)
                for (const auto &tr : r.members)
                    out.insert(d_lam("z", bind_dfree(d_app(d_app(d_free(z), tl), tr), z, 0)));
            return out;
        }
        case TermTag::LetPair: {
            DlalTermSet scr = translate_term(t->t1);
            std::string nx = open_name(t->b1);
            std::string ny = open_name(t->b2);
            SupRef body = open_with_frees(t->s1, {nx, ny});
            env[nx] = BinderInfo{true, ++depth_counter, t->bind_type1};
            env[ny] = BinderInfo{true, ++depth_counter, t->bind_type2};
            DlalTermSet bs = translate_sup(body);
            env.erase(nx);
            env.erase(ny);
            DlalTermSet abstracted;
            for (const auto &b : bs.members)
                abstracted.insert(
                    d_lam(t->b1.display, d_lam(t->b2.display, bind_dfree(bind_dfree(b, ny, 0), nx, 1))));
            return set_app(scr, abstracted);
        }
        case TermTag::Lam: {
            long k = 0;
            return translate_lam(t, k);
        }
        case TermTag::If: {
            DlalTermSet g = translate_term(t->t1);
            // linear context variables of the branches, outermost binder first
            std::vector<std::pair<int, std::string>> lin;
            auto collect = [&](const SupRef &s) {
                for (const auto &n : free_vars(s)) {
                    auto it = env.find(n);
                    if (it != env.end() && it->second.linear) {
                        bool seen = false;
                        for (auto &p : lin) seen = seen || p.second == n;
                        if (!seen) lin.push_back({it->second.depth, n});
                    }
                }
            };
            collect(t->s1);
            collect(t->s2);
            std::sort(lin.begin(), lin.end());
            DlalTermSet b1 = translate_sup(t->s1);
            DlalTermSet b2 = translate_sup(t->s2);
            auto abstract_all = [&](const DlalTermSet &in) {
                DlalTermSet out;
                for (const auto &m : in.members) {
                    DlalRef cur = m;
                    for (auto it = lin.rbegin(); it != lin.rend(); ++it)
                        cur = d_lam(it->second, bind_dfree(cur, it->second, 0));
                    out.insert(cur);
                }
                return out;
            };
            DlalTermSet res = set_app(set_app(g, abstract_all(b1)), abstract_all(b2));
            for (const auto &p : lin) {
                DlalTermSet next;
                for (const auto &m : res.members) next.insert(d_app(m, d_free(p.second)));
                res = next;
            }
            return res;
        }
        case TermTag::App: {
            DlalTermSet f = translate_term(t->t1);
            long k = eta_of(t->t1);
            DlalTermSet a = translate_term(t->t2);
            DlalTermSet res = f;
            for (long i = 0; i < k; ++i) res = set_app(res, a);
            return res;
        }
        }
        return {};
    }

    // translate a lambda and report its linearization arity
    DlalTermSet translate_lam(const TermRef &t, long &k_out) {
        std::string nm = open_name(t->b1);
        SupRef body = open_with_frees(t->s1, {nm});
        bool linear = t->lam_linear.value_or(true);
        env[nm] = BinderInfo{linear, ++depth_counter, t->bind_type1};
        DlalTermSet bs = translate_sup(body);
        env.erase(nm);
        long k = 1;
        for (const auto &b : bs.members) k = std::max(k, count_free(b, nm));
        auto it = eta_cache.find(t.get());
        if (it == eta_cache.end()) eta_cache[t.get()] = k;
        k_out = k;
        DlalTermSet out;
        for (const auto &b : bs.members) {
            long next = 1;
            DlalRef numbered = number_occurrences(b, nm, next);
            DlalRef cur = numbered;
            for (long j = k; j >= 1; --j)
                cur = d_lam(t->b1.display + std::to_string(j),
                            bind_dfree(cur, nm + "." + std::to_string(j), 0));
            out.insert(cur);
        }
        return out;
    }

    static TypeRef peel_type(TypeRef ty) {
        int c = 0;
        while (true) {
            ty = strip_paras(ty, c);
            if (ty->tag == TypeTag::Forall) {
                ty = ty->a; // indices do not matter for the arrow-kind test
                continue;
            }
            return ty;
        }
    }

    long eta_of(const TermRef &head) {
        if (head->tag == TermTag::Lam) {
            auto it = eta_cache.find(head.get());
            if (it != eta_cache.end()) return it->second;
            long k = 0;
            translate_lam(head, k);
            return k;
        }
        if (head->tag == TermTag::Free) {
            auto it = env.find(head->name);
            if (it == env.end())
                throw UntranslatableError("unbound variable '" + head->name +
                                          "' in function position");
            // A linearized variable copy is applied exactly once; only a
            // variable of non-linear function type hides an unknown
            // duplication count.
            if (it->second.type) {
                TypeRef core = peel_type(it->second.type);
                if (core->tag == TypeTag::IntArrow)
                    throw UntranslatableError("variable-headed non-linear application has no "
                                              "static duplication count");
            }
            return 1;
        }
        // non-value head: closed ones normalize to a lambda first
        SupRef head_sup = sup_term(head);
        if (!is_closed(head_sup))
            throw UntranslatableError("open non-value function position: " + term_to_string(head));
        SupRef v = eval_value(head_sup, eval_budget >= 0 ? eval_budget : default_budget(head_sup));
        CanonicalForm cf = canonicalize(v);
        if (!cf.is_single_unit() || cf.terms[0].second->tag != TermTag::Lam)
            throw UntranslatableError("function position does not normalize to an abstraction");
        return eta_of(cf.terms[0].second);
    }
};

} // namespace

long eta(const SupRef &head, long eval_budget) {
    CanonicalForm cf = canonicalize(head);
    if (!cf.is_single_unit())
        throw UntranslatableError("eta of a proper superposition");
    Translator tr(eval_budget);
    return tr.eta_of(cf.terms[0].second);
}

DlalTermSet translate(const SupRef &s, long eval_budget) {
    Translator tr(eval_budget);
    return tr.translate_sup(s);
}

// ---------------------------------------------------------------------------
// Step domination
// ---------------------------------------------------------------------------

std::string DominationReport::format() const {
    std::ostringstream os;
    os << (ok ? "domination holds" : "domination FAILED") << ": punq_steps=" << punq_steps
       << " dlal_steps=" << dlal_steps << " (translation starts at trace entry " << started_at
       << ")\n";
    for (const auto &e : entries)
        os << "  punq step " << e.punq_step << " found in DLAL set step " << e.dlal_steps << "\n";
    if (!message.empty()) os << "  " << message << "\n";
    return os.str();
}

DominationReport step_domination_check(const SupRef &program, long budget) {
    DominationReport rep;
    if (budget < 0) budget = default_budget(program);

    auto [value, trace] = eval(program, budget);
    std::vector<SupRef> entries;
    entries.push_back(canonicalize(program).to_sup());
    for (auto &[rule, s] : trace.steps) entries.push_back(s);

    // first translatable entry
    size_t start = 0;
    DlalTermSet s0;
    bool found = false;
    std::string first_err;
    for (; start < entries.size(); ++start) {
        try {
            s0 = translate(entries[start], budget);
            found = true;
            break;
        } catch (const UntranslatableError &e) {
            if (first_err.empty()) first_err = e.what();
        }
    }
    if (!found) {
        rep.ok = false;
        rep.message = "no translatable trace entry: " + first_err;
        return rep;
    }
    rep.started_at = static_cast<long>(start);
    rep.punq_steps = static_cast<long>(entries.size() - 1 - start);

    // DLAL set trace
    std::vector<DlalTermSet> sets;
    sets.push_back(s0);
    long max_set_steps = budget;
    while (!dlal_normal(sets.back())) {
        sets.push_back(dlal_step_all(sets.back()));
        if (static_cast<long>(sets.size()) > max_set_steps + 1) {
            rep.ok = false;
            rep.message = "DLAL set reduction exceeded the budget";
            return rep;
        }
    }
    rep.dlal_steps = static_cast<long>(sets.size()) - 1;

    long last_n = 0;
    for (size_t i = start; i < entries.size(); ++i) {
        DlalTermSet ti;
        try {
            ti = translate(entries[i], budget);
        } catch (const UntranslatableError &e) {
            rep.ok = false;
            rep.message = "trace entry " + std::to_string(i) + " untranslatable: " + e.what();
            return rep;
        }
        bool located = false;
        for (size_t n = static_cast<size_t>(last_n); n < sets.size(); ++n) {
            if (ti.subset_star(sets[n])) {
                rep.entries.push_back(
                    {static_cast<long>(i), static_cast<long>(n)});
                last_n = static_cast<long>(n);
                located = true;
                break;
            }
        }
        if (!located) {
            rep.ok = false;
            rep.message = "translation of trace entry " + std::to_string(i) +
                          " not found in any further set reduction (falsification candidate)";
            return rep;
        }
    }
    rep.ok = rep.punq_steps <= rep.dlal_steps;
    if (!rep.ok) rep.message = "PUNQ step count exceeds DLAL termination steps";
    return rep;
}

} // namespace punq
