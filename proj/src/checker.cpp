#include "punq/checker.hpp"

#include "punq/eval.hpp"

#include <algorithm>
#include <sstream>

namespace punq {

std::string OrthoMode::to_string() const {
    switch (kind) {
    case Empty: return "empty";
    case Times: return "times";
    case UntypedBounded: return "untyped:" + std::to_string(depth);
    }
    return "?";
}

namespace {

std::string json_escape(const std::string &s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        default: out += c;
        }
    }
    return out;
}

} // namespace

std::string CheckResult::to_json() const {
    std::ostringstream os;
    os << "{\"ok\": " << (ok ? "true" : "false");
    if (!ok) {
        os << ", \"reason\": \"" << json_escape(reason) << "\"";
        os << ", \"where\": \"" << json_escape(where) << "\"";
    } else if (derivation) {
        os << ", \"rule\": \"" << json_escape(derivation->rule) << "\"";
        os << ", \"type\": \"" << json_escape(type_to_string(derivation->type)) << "\"";
    }
    os << "}";
    return os.str();
}

// ---------------------------------------------------------------------------
// Standalone orthogonality fragments
// ---------------------------------------------------------------------------

bool ortho_empty(const SupRef &t, const SupRef &s, long budget) {
    if (!is_closed(t) || !is_closed(s))
        throw std::invalid_argument("ortho_empty requires closed superpositions");
    if (budget < 0) budget = std::max(default_budget(t), default_budget(s));
    SupRef v = eval_value(t, budget);
    SupRef w = eval_value(s, budget);
    return inner_product(v, w).is_zero();
}

namespace {

bool ortho_times_rec(const SupRef &t, const SupRef &s, long budget) {
    if (t->tag == SupTag::Single && s->tag == SupTag::Single &&
        t->term->tag == TermTag::Pair && s->term->tag == TermTag::Pair) {
        const TermRef &tp = t->term;
        const TermRef &sp = s->term;
        if (ortho_times_rec(sup_term(tp->t1), sup_term(sp->t1), budget)) return true;
        return ortho_times_rec(sup_term(tp->t2), sup_term(sp->t2), budget);
    }
    if (is_closed(t) && is_closed(s)) {
        try {
            return ortho_empty(t, s, budget);
        } catch (const EvalError &) {
            return false; // outside the fragment: not established
        }
    }
    return false;
}

} // namespace

bool ortho_times(const SupRef &t, const SupRef &s, long budget) {
    return ortho_times_rec(t, s, budget);
}

namespace {

void gen_basis_values(int depth, std::vector<TermRef> &out) {
    out.push_back(term_ket0());
    out.push_back(term_ket1());
    if (depth <= 1) return;
    std::vector<TermRef> smaller;
    gen_basis_values(depth - 1, smaller);
    size_t plain = smaller.size();
    for (size_t i = 0; i < plain; ++i)
        for (size_t j = 0; j < plain; ++j) out.push_back(term_pair(smaller[i], smaller[j]));
}

// Skeleton check: every basis leaf of the term fits the B/x layout of Q.
bool base_matches(const TermRef &t, const TypeRef &q) {
    switch (q->tag) {
    case TypeTag::Bool: return t->tag == TermTag::Ket0 || t->tag == TermTag::Ket1;
    case TypeTag::Sharp:
    case TypeTag::Para: return base_matches(t, q->a);
    case TypeTag::Prod:
        return t->tag == TermTag::Pair && base_matches(t->t1, q->a) && base_matches(t->t2, q->b);
    default: return false;
    }
}

bool has_top_sharp(const TypeRef &q) {
    if (q->tag == TypeTag::Sharp) return true;
    if (q->tag == TypeTag::Para) return has_top_sharp(q->a);
    return false;
}

// Syntactic membership in the realizers of ground type Q. Precise for
// #-headed types (base skeleton + unit norm) and for basis shapes; value
// superpositions under a bare product/B are conservatively rejected.
bool value_in_ground(const SupRef &v, const TypeRef &q) {
    CanonicalForm cf = canonicalize(v);
    for (auto &[a, t] : cf.terms)
        if (!base_matches(t, q)) return false;
    if (has_top_sharp(q)) return norm_sq(v) == RealAlg::of(1);
    // bare B or product of grounds: a single basis term with coefficient 1
    return cf.is_single_unit();
}

} // namespace

bool ortho_untyped_bounded(const SupRef &t, const SupRef &s, const TypeRef &q, int depth,
                           long budget) {
    if (!is_ground(q)) throw std::invalid_argument("ortho_untyped_bounded needs a ground type");
    if (depth < 1) throw std::invalid_argument("ortho_untyped_bounded needs depth >= 1");
    std::vector<std::string> vars;
    for (auto &n : free_vars(t)) vars.push_back(n);
    for (auto &n : free_vars(s))
        if (std::find(vars.begin(), vars.end(), n) == vars.end()) vars.push_back(n);

    std::vector<TermRef> pool;
    gen_basis_values(depth, pool);

    long n = std::max(sup_size(t), sup_size(s));
    long perp_budget = budget >= 0
                           ? budget
                           : static_cast<long>(card(q)) * (10 * n * n + 100);

    std::vector<size_t> idx(vars.size(), 0);
    while (true) {
        SupRef ti = t, si = s;
        for (size_t k = 0; k < vars.size(); ++k) {
            ti = subst_free(ti, vars[k], pool[idx[k]]);
            si = subst_free(si, vars[k], pool[idx[k]]);
        }
        bool perp = false;
        try {
            SupRef vt = eval_value(ti, perp_budget);
            SupRef vs = eval_value(si, perp_budget);
            perp = value_in_ground(vt, q) && value_in_ground(vs, q) &&
                   inner_product(vt, vs).is_zero();
        } catch (const EvalError &) {
            perp = false; // did not reduce into the candidate type in time
        }
        if (!perp) return false;
        // next assignment
        size_t k = 0;
        for (; k < vars.size(); ++k) {
            if (++idx[k] < pool.size()) break;
            idx[k] = 0;
        }
        if (vars.empty() || k == vars.size()) break;
    }
    return true;
}

// ---------------------------------------------------------------------------
// The syntax-directed checking algorithm
// ---------------------------------------------------------------------------

namespace {

struct VarState {
    TypeRef type;
    Zone zone;
    int debt = 0; // paragraph introductions crossed since binding
    int uses = 0;
    bool used() const { return uses > 0; }
};

using Env = std::map<std::string, VarState>;

struct Fail {
    int depth = -1;
    std::string reason;
    std::string where;
};

struct CheckerImpl {
    OrthoMode mode;
    const Program *defs;
    long eval_budget;
    Fail best_fail;
    int node_count = 0;
    long fresh_tyvar = 0;

    CheckerImpl(OrthoMode m, const Program *d, long b) : mode(m), defs(d), eval_budget(b) {}

    // ---- failure bookkeeping: deepest failure wins ----
    std::nullopt_t fail(const std::string &reason, const std::string &where) {
        if (node_count > best_fail.depth) best_fail = Fail{node_count, reason, where};
        return std::nullopt;
    }

    const Def *find_def(const std::string &name) const { return defs ? defs->find(name) : nullptr; }

    SupRef resolve_defs(SupRef s) const { return defs ? inline_defs_into(*defs, s) : s; }

    static std::vector<CtxEntry> snapshot(const Env &env) {
        std::vector<CtxEntry> out;
        for (auto &[name, st] : env)
            if (!st.used()) out.push_back({name, st.type, st.zone});
        return out;
    }

    static bool same_consumption(const Env &a, const Env &b) {
        auto it = a.begin();
        auto jt = b.begin();
        for (; it != a.end() && jt != b.end(); ++it, ++jt)
            if (it->first != jt->first || it->second.uses != jt->second.uses) return false;
        return it == a.end() && jt == b.end();
    }

    DerivationRef node(std::string rule, SupRef subject, TypeRef type, const Env &env,
                       std::vector<DerivationRef> prems = {}, std::vector<SideCondition> side = {},
                       std::string note = "") {
        auto d = std::make_shared<Derivation>();
        d->rule = std::move(rule);
        d->subject = std::move(subject);
        d->type = std::move(type);
        d->ctx = snapshot(env);
        d->premises = std::move(prems);
        d->side = std::move(side);
        d->note = std::move(note);
        ++node_count;
        return d;
    }

    // ---- variable access with paragraph debt ----
    std::optional<TypeRef> effective_type(const VarState &st, const std::string &name) {
        TypeRef t = st.type;
        for (int i = 0; i < st.debt; ++i) {
            if (t->tag != TypeTag::Para)
                return fail("variable '" + name + "' lacks the $ layers required at this depth",
                            name),
                       std::nullopt;
            t = t->a;
        }
        return t;
    }

    // ---- orthogonality discharge (checker side) ----

    // Same-guard decomposition: two conditionals guarded by one shared
    // variable are orthogonal when all four branch pairs are (substituting
    // any unit value for the guard mixes both branches, so the straight and
    // cross pairs must all vanish).
    bool discharge_ortho(const SupRef &lhs, const SupRef &rhs, const TypeRef &q,
                         std::vector<SideCondition> &side) {
        side.push_back(SideCondition{SideCondition::Ortho, lhs, rhs, q, nullptr, {}});
        return discharge_rec(lhs, rhs, q);
    }

    std::map<std::string, bool> ortho_cache;

    bool discharge_rec(const SupRef &lhs, const SupRef &rhs, const TypeRef &q) {
        std::string key =
            sup_to_string(lhs) + " | " + sup_to_string(rhs) + " @ " + type_to_string(q);
        auto hit = ortho_cache.find(key);
        if (hit != ortho_cache.end()) return hit->second;
        bool res = discharge_uncached(lhs, rhs, q);
        ortho_cache[key] = res;
        return res;
    }

    bool discharge_uncached(const SupRef &lhs, const SupRef &rhs, const TypeRef &q) {
        if (lhs->tag == SupTag::Single && rhs->tag == SupTag::Single) {
            const TermRef &a = lhs->term;
            const TermRef &b = rhs->term;
            if (a->tag == TermTag::If && b->tag == TermTag::If &&
                (a->t1->tag == TermTag::Free || a->t1->tag == TermTag::Var) &&
                term_equal(a->t1, b->t1)) {
                return discharge_rec(a->s1, b->s1, q) && discharge_rec(a->s2, b->s2, q) &&
                       discharge_rec(a->s1, b->s2, q) && discharge_rec(a->s2, b->s1, q);
            }
        }
        SupRef l = resolve_defs(lhs);
        SupRef r = resolve_defs(rhs);
        if (is_closed(l) && is_closed(r)) {
            try {
                return ortho_empty(l, r, eval_budget);
            } catch (const EvalError &) {
                return false;
            }
        }
        switch (mode.kind) {
        case OrthoMode::Empty: return false;
        case OrthoMode::Times: return ortho_times(l, r, eval_budget);
        case OrthoMode::UntypedBounded:
            try {
                return ortho_untyped_bounded(l, r, q, mode.depth, eval_budget);
            } catch (const std::invalid_argument &) {
                return false;
            }
        }
        return false;
    }

    // ---- paragraph introduction: transform the context for the premise ----
    bool cross_para(Env &env) {
        for (auto &[name, st] : env) {
            if (st.zone == Zone::ExpDormant)
                st.zone = Zone::ExpActive; // types carry over unchanged
            else if (!st.used())
                ++st.debt; // linear/active entries must shed a $ at each use
        }
        return true;
    }

    std::string fresh_type_var() { return "?X" + std::to_string(++fresh_tyvar); }

    // ---- goal-candidate helpers for rules concluding #Q ----
    std::vector<TypeRef> sharp_candidates(const TypeRef &goal) {
        std::vector<TypeRef> out;
        if (!is_ground(goal)) return out;
        out.push_back(goal);
        if (goal->tag == TypeTag::Sharp) out.push_back(goal->a);
        return out;
    }

    // =======================================================================
    // Superposition checking
    // =======================================================================

    std::optional<DerivationRef> check_sup(Env &env, const SupRef &s, const TypeRef &goal) {
        if (goal->tag == TypeTag::Forall) {
            std::string fresh = fresh_type_var();
            TypeRef body = open_forall_free(goal, fresh);
            auto d = check_sup(env, s, body);
            if (!d) return std::nullopt;
            return node("forallI", s, goal, env, {*d});
        }
        CanonicalForm cf = canonicalize(s);
        if (cf.is_zero())
            return fail("the null vector is not typable (unit-norm rule)", sup_to_string(s));
        if (cf.is_single_unit()) return check_term(env, cf.terms[0].second, goal);

        // proper superposition: sharp introduction, possibly under $
        Env saved = env;
        if (auto d = sharp_intro(env, cf, s, goal)) return d;
        env = saved;
        if (goal->tag == TypeTag::Para) {
            Env inner = env;
            cross_para(inner);
            auto d = check_sup(inner, s, goal->a);
            if (d) {
                propagate_usage(env, inner);
                return node("$I", s, goal, env, {*d});
            }
        }
        return std::nullopt;
    }

    static void propagate_usage(Env &outer, const Env &inner) {
        for (auto &[name, st] : inner) {
            auto it = outer.find(name);
            if (it != outer.end()) it->second.uses = st.uses;
        }
    }

    std::optional<DerivationRef> sharp_intro(Env &env, const CanonicalForm &cf, const SupRef &s,
                                             const TypeRef &goal) {
        for (const TypeRef &q : sharp_candidates(goal)) {
            TypeRef concl;
            try {
                concl = t_sharp(q);
            } catch (const std::invalid_argument &) {
                continue;
            }
            if (!subtype(concl, goal)) continue;
            // unit norm side condition
            RealAlg total;
            std::vector<Amplitude> amps;
            for (auto &[a, t] : cf.terms) {
                total = total + a.norm_sq();
                amps.push_back(a);
            }
            if (total != RealAlg::of(1)) {
                fail("superposition norm is " + total.to_string() + ", not 1", sup_to_string(s));
                continue;
            }
            // premises share one context (additive)
            std::vector<DerivationRef> prems;
            Env common;
            bool ok = true;
            for (size_t i = 0; i < cf.terms.size(); ++i) {
                Env branch = env;
                auto d = check_term(branch, cf.terms[i].second, q);
                if (!d) {
                    ok = false;
                    break;
                }
                if (i == 0)
                    common = branch;
                else if (!same_consumption(common, branch)) {
                    ok = false;
                    fail("summands consume different linear variables", sup_to_string(s));
                    break;
                }
                prems.push_back(*d);
            }
            if (!ok) continue;
            // pairwise orthogonality
            std::vector<SideCondition> side;
            side.push_back(SideCondition{SideCondition::Norm, nullptr, nullptr, nullptr, nullptr, amps});
            bool orth = true;
            for (size_t i = 0; i < cf.terms.size() && orth; ++i)
                for (size_t j = i + 1; j < cf.terms.size() && orth; ++j)
                    if (!discharge_ortho(sup_term(cf.terms[i].second), sup_term(cf.terms[j].second),
                                         q, side)) {
                        orth = false;
                        fail("orthogonality not established in mode " + mode.to_string() +
                                 " between " + term_to_string(cf.terms[i].second) + " and " +
                                 term_to_string(cf.terms[j].second),
                             sup_to_string(s));
                    }
            if (!orth) continue;
            env = common;
            DerivationRef d = node("#i", s, concl, env, std::move(prems), std::move(side));
            if (!type_equal(concl, goal)) {
                std::vector<SideCondition> sub;
                sub.push_back(SideCondition{SideCondition::Subtype, nullptr, nullptr, goal, concl, {}});
                d = node("<=", s, goal, env, {d}, std::move(sub));
            }
            return d;
        }
        return fail("no admissible superposition type for goal " + type_to_string(goal),
                    sup_to_string(s));
    }

    // =======================================================================
    // Term checking
    // =======================================================================

    std::optional<DerivationRef> check_term(Env &env, const TermRef &t, const TypeRef &goal) {
        if (goal->tag == TypeTag::Forall) {
            std::string fresh = fresh_type_var();
            TypeRef body = open_forall_free(goal, fresh);
            auto d = check_term(env, t, body);
            if (!d) return std::nullopt;
            return node("forallI", sup_term(t), goal, env, {*d});
        }

        Env saved = env;
        if (auto d = check_term_direct(env, t, goal)) return d;
        env = saved;

        // goal-driven paragraph introduction
        if (goal->tag == TypeTag::Para) {
            Env inner = env;
            cross_para(inner);
            auto d = check_term(inner, t, goal->a);
            if (d) {
                propagate_usage(env, inner);
                return node("$I", sup_term(t), goal, env, {*d});
            }
            env = saved;
        }
        return std::nullopt;
    }

    DerivationRef subsume(DerivationRef d, const TypeRef &goal, const Env &env) {
        if (type_equal(d->type, goal)) return d;
        std::vector<SideCondition> side;
        side.push_back(SideCondition{SideCondition::Subtype, nullptr, nullptr, goal, d->type, {}});
        return node("<=", d->subject, goal, env, {d}, std::move(side));
    }

    std::optional<DerivationRef> check_term_direct(Env &env, const TermRef &t,
                                                   const TypeRef &goal) {
        switch (t->tag) {
        case TermTag::Var:
            return fail("unexpected raw de Bruijn index (internal)", term_to_string(t));
        case TermTag::Free: {
            auto leaf = leaf_type(env, t);
            if (!leaf) return std::nullopt;
            auto [ty, rule] = *leaf;
            if (!subtype(ty, goal)) {
                return fail("variable '" + t->name + "' has type " + type_to_string(ty) +
                                ", which is not a subtype of " + type_to_string(goal),
                            term_to_string(t));
            }
            return subsume(node(rule, sup_term(t), ty, env), goal, env);
        }
        case TermTag::Ket0:
        case TermTag::Ket1: {
            TypeRef b = t_bool();
            if (!subtype(b, goal))
                return fail("bit literal cannot have type " + type_to_string(goal),
                            term_to_string(t));
            return subsume(node(t->tag == TermTag::Ket0 ? "0" : "1", sup_term(t), b, env), goal,
                           env);
        }
        case TermTag::Lam: return check_lam(env, t, goal);
        case TermTag::If: return check_if(env, t, goal);
        case TermTag::App: return check_app(env, t, goal);
        case TermTag::Pair: return check_pair(env, t, goal);
        case TermTag::LetPair: return check_let(env, t, goal);
        }
        return std::nullopt;
    }

    // leaf lookup handling zones and definitions
    std::optional<std::pair<TypeRef, std::string>> leaf_type(Env &env, const TermRef &t) {
        auto it = env.find(t->name);
        if (it == env.end()) {
            if (const Def *d = find_def(t->name)) return {{d->declared, "Def"}};
            return fail("unbound variable '" + t->name + "'", t->name), std::nullopt;
        }
        VarState &st = it->second;
        auto eff = effective_type(st, t->name);
        if (!eff) return std::nullopt;
        switch (st.zone) {
        case Zone::Linear:
            if (st.used())
                return fail("linear variable '" + t->name + "' used more than once", t->name),
                       std::nullopt;
            ++st.uses;
            return {{*eff, "Ax"}};
        case Zone::ExpActive: ++st.uses; return {{*eff, "Ax"}};
        case Zone::ExpDormant:
            return fail("exponential variable '" + t->name +
                            "' used outside a $-introduction scope",
                        t->name),
                   std::nullopt;
        }
        return std::nullopt;
    }

    std::string open_name(const Binder &b) { return b.display + "#" + std::to_string(b.uid); }

    std::optional<DerivationRef> check_lam(Env &env, const TermRef &t, const TypeRef &goal) {
        if (goal->tag == TypeTag::LinArrow || goal->tag == TypeTag::IntArrow) {
            bool linear = goal->tag == TypeTag::LinArrow;
            TypeRef domain = goal->a, codomain = goal->b;
            TypeRef binder_ty = domain;
            if (t->annot) {
                binder_ty = *t->annot;
                TypeRef required = linear ? binder_ty : bang(binder_ty);
                if (!subtype(domain, required))
                    return fail("binder annotation " + type_to_string(binder_ty) +
                                    " does not cover domain " + type_to_string(domain),
                                term_to_string(t));
            }
            std::string nm = open_name(t->b1);
            SupRef body = open_with_frees(t->s1, {nm});
            env[nm] = VarState{binder_ty, linear ? Zone::Linear : Zone::ExpDormant, 0, 0};
            auto d = check_sup(env, body, codomain);
            if (!d) {
                env.erase(nm);
                return std::nullopt;
            }
            bool used = env[nm].used();
            env.erase(nm);
            if (linear && !used)
                return fail("linear binder '" + t->b1.display + "' is never used (no weakening)",
                            term_to_string(t));
            t->lam_linear = linear;
            t->bind_type1 = binder_ty;
            return node(linear ? "-oI" : "=>I", sup_term(t), goal, env, {*d});
        }
        if (goal->tag == TypeTag::Sharp)
            return fail("abstractions cannot be superposed (no # over arrow types)",
                        term_to_string(t));
        return fail("abstraction checked against non-arrow type " + type_to_string(goal),
                    term_to_string(t));
    }

    std::optional<DerivationRef> check_if(Env &env, const TermRef &t, const TypeRef &goal) {
        auto guard = synth_term(env, t->t1);
        if (!guard) return std::nullopt;
        auto [gty, gderiv] = *guard;
        if (type_equal(gty, t_bool())) {
            // classical conditional: branches share contexts, no orthogonality
            Env left = env;
            auto d1 = check_sup(left, t->s1, goal);
            if (!d1) return std::nullopt;
            Env right = env;
            auto d2 = check_sup(right, t->s2, goal);
            if (!d2) return std::nullopt;
            if (!same_consumption(left, right))
                return fail("conditional branches consume different linear variables",
                            term_to_string(t));
            env = left;
            return node("if", sup_term(t), goal, env, {gderiv, *d1, *d2});
        }
        if (!subtype(gty, t_sharp(t_bool())))
            return fail("conditional guard has type " + type_to_string(gty) +
                            ", expected B or #B",
                        term_to_string(t->t1));
        for (const TypeRef &q : sharp_candidates(goal)) {
            TypeRef concl;
            try {
                concl = t_sharp(q);
            } catch (const std::invalid_argument &) {
                continue;
            }
            if (!subtype(concl, goal)) continue;
            Env left = env;
            auto d1 = check_sup(left, t->s1, q);
            if (!d1) continue;
            Env right = env;
            auto d2 = check_sup(right, t->s2, q);
            if (!d2) continue;
            if (!same_consumption(left, right)) {
                fail("conditional branches consume different linear variables", term_to_string(t));
                continue;
            }
            std::vector<SideCondition> side;
            if (!discharge_ortho(t->s1, t->s2, q, side)) {
                fail("branch orthogonality not established in mode " + mode.to_string(),
                     term_to_string(t));
                continue;
            }
            env = left;
            DerivationRef d =
                node("if#", sup_term(t), concl, env, {gderiv, *d1, *d2}, std::move(side));
            return subsume(d, goal, env);
        }
        return fail("quantum conditional does not fit goal " + type_to_string(goal),
                    term_to_string(t));
    }

    std::optional<DerivationRef> check_pair(Env &env, const TermRef &t, const TypeRef &goal) {
        if (goal->tag == TypeTag::Prod) {
            auto dl = check_term(env, t->t1, goal->a);
            if (!dl) return std::nullopt;
            auto dr = check_term(env, t->t2, goal->b);
            if (!dr) return std::nullopt;
            return node("xI", sup_term(t), goal, env, {*dl, *dr});
        }
        auto synth = synth_term(env, t);
        if (!synth) return std::nullopt;
        auto [ty, d] = *synth;
        if (!subtype(ty, goal))
            return fail("pair has type " + type_to_string(ty) + ", not a subtype of " +
                            type_to_string(goal),
                        term_to_string(t));
        return subsume(d, goal, env);
    }

    std::optional<DerivationRef> check_let(Env &env, const TermRef &t, const TypeRef &goal) {
        auto scrut = synth_term(env, t->t1);
        if (!scrut) return std::nullopt;
        auto [sty, sderiv] = *scrut;
        std::string nx = open_name(t->b1);
        std::string ny = open_name(t->b2);
        SupRef body = open_with_frees(t->s1, {nx, ny});
        if (sty->tag == TypeTag::Prod) {
            env[nx] = VarState{sty->a, Zone::Linear, 0, 0};
            env[ny] = VarState{sty->b, Zone::Linear, 0, 0};
            auto d = check_sup(env, body, goal);
            bool ux = env[nx].used(), uy = env[ny].used();
            env.erase(nx);
            env.erase(ny);
            if (!d) return std::nullopt;
            if (!ux || !uy)
                return fail("pair destructor binder unused (no linear weakening)",
                            term_to_string(t));
            t->bind_type1 = sty->a;
            t->bind_type2 = sty->b;
            return node("xE", sup_term(t), goal, env, {sderiv, *d});
        }
        // quantum destructor: scrutinee at #(Q x R) (possibly ##(...) )
        TypeRef sharp = sty;
        while (sharp->tag == TypeTag::Sharp && sharp->a->tag == TypeTag::Sharp) sharp = sharp->a;
        if (sharp->tag == TypeTag::Sharp && sharp->a->tag == TypeTag::Prod) {
            TypeRef q = sharp->a->a, r = sharp->a->b;
            TypeRef xq = t_sharp(q), yr = t_sharp(r);
            for (const TypeRef &scand : sharp_candidates(goal)) {
                TypeRef concl;
                try {
                    concl = t_sharp(scand);
                } catch (const std::invalid_argument &) {
                    continue;
                }
                if (!subtype(concl, goal)) continue;
                Env attempt = env;
                attempt[nx] = VarState{xq, Zone::Linear, 0, 0};
                attempt[ny] = VarState{yr, Zone::Linear, 0, 0};
                auto d = check_sup(attempt, body, scand);
                if (!d) continue;
                bool ux = attempt[nx].used(), uy = attempt[ny].used();
                attempt.erase(nx);
                attempt.erase(ny);
                if (!ux || !uy) {
                    fail("pair destructor binder unused (no linear weakening)", term_to_string(t));
                    continue;
                }
                env = attempt;
                t->bind_type1 = xq;
                t->bind_type2 = yr;
                DerivationRef dn = node("xE#", sup_term(t), concl, env, {sderiv, *d});
                return subsume(dn, goal, env);
            }
            return fail("quantum pair destructor does not fit goal " + type_to_string(goal),
                        term_to_string(t));
        }
        return fail("pair destructor scrutinee has type " + type_to_string(sty) +
                        ", expected a product or #(product)",
                    term_to_string(t->t1));
    }

    // ---- applications ----

    struct AppHead {
        TypeRef domain, codomain;
        bool linear;
        int paras;
        DerivationRef deriv;
        TypeRef head_type;
        std::vector<SideCondition> inst; // forall instantiation notes
    };

    std::optional<AppHead> resolve_head(Env &env, const TermRef &f, const TermRef &arg) {
        auto synth = synth_term(env, f);
        if (!synth) return std::nullopt;
        auto [ty, deriv] = *synth;
        AppHead h;
        h.deriv = deriv;
        TypeRef cur = ty;
        int paras = 0;
        int guard = 0;
        while (true) {
            if (++guard > 16) return fail("forall instantiation did not converge", term_to_string(f)), std::nullopt;
            int c = 0;
            cur = strip_paras(cur, c);
            paras += c;
            if (cur->tag == TypeTag::Forall) {
                // find the witness by matching the domain against the
                // argument's synthesized type
                Env scratch = env;
                auto asynth = synth_term(scratch, arg);
                if (!asynth)
                    return fail("cannot synthesize argument type for forall instantiation",
                                term_to_string(arg)),
                           std::nullopt;
                std::string hole = "?" + std::to_string(++fresh_tyvar);
                TypeRef opened = open_forall_free(cur, hole);
                int c2 = 0;
                TypeRef inner = strip_paras(opened, c2);
                if (inner->tag != TypeTag::LinArrow && inner->tag != TypeTag::IntArrow)
                    return fail("forall-typed head is not a function", term_to_string(f)),
                           std::nullopt;
                TypeRef witness;
                if (!match_type(inner->a, asynth->first, hole, witness))
                    return fail("cannot match argument type " + type_to_string(asynth->first) +
                                    " against domain " + type_to_string(inner->a) +
                                    " (residual forall constraint)",
                                term_to_string(arg)),
                           std::nullopt;
                cur = open_forall(cur, witness);
                continue;
            }
            break;
        }
        if (cur->tag != TypeTag::LinArrow && cur->tag != TypeTag::IntArrow)
            return fail("application head has non-function type " + type_to_string(ty),
                        term_to_string(f)),
                   std::nullopt;
        h.domain = cur->a;
        h.codomain = cur->b;
        h.linear = cur->tag == TypeTag::LinArrow;
        h.paras = paras;
        h.head_type = ty;
        return h;
    }

    static bool match_type(const TypeRef &pattern, const TypeRef &concrete,
                           const std::string &hole, TypeRef &out) {
        if (pattern->tag == TypeTag::VarFree && pattern->name == hole) {
            if (out && !type_equal(out, concrete)) return false;
            out = concrete;
            return true;
        }
        if (pattern->tag != concrete->tag) return false;
        switch (pattern->tag) {
        case TypeTag::Bool: return true;
        case TypeTag::VarBound: return pattern->index == concrete->index;
        case TypeTag::VarFree: return pattern->name == concrete->name;
        case TypeTag::Sharp:
        case TypeTag::Para:
        case TypeTag::Forall: return match_type(pattern->a, concrete->a, hole, out);
        default:
            return match_type(pattern->a, concrete->a, hole, out) &&
                   match_type(pattern->b, concrete->b, hole, out);
        }
    }

    // "f a" where the head types (after $-peeling and forall instantiation)
    // at D -o C: argument checks at $^c D, result $^c C. For D => C the
    // argument is typed in an isolated context with at most one dormant
    // exponential variable, and is not $-wrapped.
    std::optional<std::pair<TypeRef, DerivationRef>> app_result(Env &env, const TermRef &t) {
        auto head = resolve_head(env, t->t1, t->t2);
        if (!head) {
            // beta-redex with an unannotated lambda head is handled by the
            // caller (needs the goal); bare synthesis retries with the
            // argument's type as the binder type.
            if (t->t1->tag == TermTag::Lam) return redex_synth(env, t);
            return std::nullopt;
        }
        if (head->linear) {
            TypeRef want = wrap_paras(head->domain, head->paras);
            auto darg = check_term(env, t->t2, want);
            if (!darg) return std::nullopt;
            TypeRef res = wrap_paras(head->codomain, head->paras);
            return {{res, node("-oE", sup_term(t), res, env, {head->deriv, *darg})}};
        }
        // non-linear application: argument may mention at most one
        // variable, which must be a dormant exponential
        std::set<std::string> fv = free_vars(t->t2);
        std::vector<std::string> ctx_vars;
        for (auto &n : fv)
            if (env.count(n)) ctx_vars.push_back(n);
        if (ctx_vars.size() > 1)
            return fail("argument of a non-linear application mentions " +
                            std::to_string(ctx_vars.size()) +
                            " context variables; at most one is allowed",
                        term_to_string(t->t2)),
                   std::nullopt;
        Env isolated;
        if (ctx_vars.size() == 1) {
            const VarState &st = env.at(ctx_vars[0]);
            if (st.zone != Zone::ExpDormant)
                return fail("argument of a non-linear application uses the linear variable '" +
                                ctx_vars[0] + "'",
                            term_to_string(t->t2)),
                       std::nullopt;
            isolated[ctx_vars[0]] = VarState{st.type, Zone::Linear, 0, 0};
        }
        auto darg = check_term(isolated, t->t2, head->domain);
        if (!darg) return std::nullopt;
        TypeRef res = wrap_paras(head->codomain, head->paras);
        return {{res, node("=>E", sup_term(t), res, env, {head->deriv, *darg})}};
    }

    // (\x. body) arg with no annotation: bind x at the argument's
    // synthesized type.
    std::optional<std::pair<TypeRef, DerivationRef>> redex_synth(Env &env, const TermRef &t) {
        Env scratch = env;
        auto asynth = synth_term(scratch, t->t2);
        if (!asynth) return std::nullopt;
        TypeRef a = t->t1->annot ? *t->t1->annot : asynth->first;
        auto darg = check_term(env, t->t2, a);
        if (!darg) return std::nullopt;
        const TermRef &f = t->t1;
        std::string nm = open_name(f->b1);
        SupRef body = open_with_frees(f->s1, {nm});
        env[nm] = VarState{a, Zone::Linear, 0, 0};
        auto sb = synth_sup(env, body);
        if (!sb) {
            env.erase(nm);
            return std::nullopt;
        }
        bool used = env[nm].used();
        env.erase(nm);
        if (!used)
            return fail("linear binder '" + f->b1.display + "' is never used (no weakening)",
                        term_to_string(f)),
                   std::nullopt;
        f->lam_linear = true;
        f->bind_type1 = a;
        TypeRef lam_ty = t_lin(a, sb->first);
        auto dlam = node("-oI", sup_term(f), lam_ty, env, {sb->second});
        return {{sb->first, node("-oE", sup_term(t), sb->first, env, {dlam, *darg})}};
    }

    // candidate argument types for goal-directed application checking:
    // the argument's synthesized type and the goal core, each optionally
    // sharp-lifted and $-wrapped up to the goal's $ depth
    std::vector<TypeRef> arg_candidates(const Env &env, const TermRef &arg, const TypeRef &goal) {
        std::vector<TypeRef> bases;
        auto push = [&](const TypeRef &ty) {
            for (const auto &b : bases)
                if (type_equal(b, ty)) return;
            bases.push_back(ty);
        };
        if (arg->tag == TermTag::Lam && arg->annot) push(*arg->annot);
        Env scratch = env;
        CheckerImpl probe(mode, defs, eval_budget);
        auto asynth = probe.synth_term(scratch, arg);
        if (asynth) {
            push(asynth->first);
            if (is_ground(asynth->first)) {
                TypeRef sb = t_sharp(bang(asynth->first));
                push(sb);
            }
        }
        int gp = 0;
        TypeRef core = strip_paras(goal, gp);
        push(core);
        if (is_ground(core)) push(t_sharp(bang(core)));
        std::vector<TypeRef> out = bases;
        for (int m = 1; m <= gp; ++m)
            for (const auto &b : bases) out.push_back(wrap_paras(b, m));
        return out;
    }

    std::optional<DerivationRef> check_app(Env &env, const TermRef &t, const TypeRef &goal) {
        Env saved = env;
        auto r = app_result(env, t);
        if (r) {
            if (subtype(r->first, goal)) return subsume(r->second, goal, env);
            fail("application result " + type_to_string(r->first) + " is not a subtype of " +
                     type_to_string(goal),
                 term_to_string(t));
        }
        env = saved;
        // Goal-directed fallback when the head does not synthesize: try the
        // admissible $-peeled application shapes  f : $^j (A -o C), arg :
        // $^j A  and  f : $^j (A => C), closed-ish arg : A, with the result
        // $^j C equal to the goal.
        int gp = 0;
        TypeRef core = strip_paras(goal, gp);
        std::vector<TypeRef> acands = arg_candidates(env, t->t2, goal);
        for (int j = 0; j <= gp; ++j) {
            TypeRef c_inner = wrap_paras(core, gp - j);
            for (int kind = 0; kind < 2; ++kind) {
                for (const TypeRef &a : acands) {
                    TypeRef f_ty;
                    try {
                        f_ty = wrap_paras(kind == 0 ? t_lin(a, c_inner) : t_int(a, c_inner), j);
                    } catch (const std::invalid_argument &) {
                        continue;
                    }
                    Env attempt = env;
                    DerivationRef darg;
                    if (kind == 0) {
                        auto d = check_term(attempt, t->t2, wrap_paras(a, j));
                        if (!d) continue;
                        darg = *d;
                    } else {
                        // isolated-context argument per the non-linear rule
                        std::set<std::string> fv = free_vars(t->t2);
                        std::vector<std::string> ctx_vars;
                        for (auto &n_ : fv)
                            if (attempt.count(n_)) ctx_vars.push_back(n_);
                        if (ctx_vars.size() > 1) continue;
                        Env isolated;
                        if (ctx_vars.size() == 1) {
                            const VarState &st = attempt.at(ctx_vars[0]);
                            if (st.zone != Zone::ExpDormant) continue;
                            isolated[ctx_vars[0]] = VarState{st.type, Zone::Linear, 0, 0};
                        }
                        auto d = check_term(isolated, t->t2, a);
                        if (!d) continue;
                        darg = *d;
                    }
                    auto dfun = check_term(attempt, t->t1, f_ty);
                    if (!dfun) continue;
                    env = attempt;
                    return node(kind == 0 ? "-oE" : "=>E", sup_term(t), goal, env,
                                {*dfun, darg});
                }
            }
        }
        return std::nullopt;
    }

    // =======================================================================
    // Synthesis
    // =======================================================================

    std::optional<std::pair<TypeRef, DerivationRef>> synth_term(Env &env, const TermRef &t) {
        switch (t->tag) {
        case TermTag::Var:
            return fail("unexpected raw de Bruijn index (internal)", term_to_string(t)),
                   std::nullopt;
        case TermTag::Free: {
            auto leaf = leaf_type(env, t);
            if (!leaf) return std::nullopt;
            return {{leaf->first, node(leaf->second, sup_term(t), leaf->first, env)}};
        }
        case TermTag::Ket0:
            return {{t_bool(), node("0", sup_term(t), t_bool(), env)}};
        case TermTag::Ket1:
            return {{t_bool(), node("1", sup_term(t), t_bool(), env)}};
        case TermTag::App: return app_result(env, t);
        case TermTag::Pair: {
            auto l = synth_term(env, t->t1);
            if (!l) return std::nullopt;
            auto r = synth_term(env, t->t2);
            if (!r) return std::nullopt;
            TypeRef ty = t_prod(l->first, r->first);
            return {{ty, node("xI", sup_term(t), ty, env, {l->second, r->second})}};
        }
        case TermTag::Lam: {
            if (!t->annot)
                return fail("cannot synthesize the type of an unannotated abstraction",
                            term_to_string(t)),
                       std::nullopt;
            std::string nm = open_name(t->b1);
            SupRef body = open_with_frees(t->s1, {nm});
            env[nm] = VarState{*t->annot, Zone::Linear, 0, 0};
            auto sb = synth_sup(env, body);
            if (!sb) {
                env.erase(nm);
                return std::nullopt;
            }
            bool used = env[nm].used();
            env.erase(nm);
            if (!used)
                return fail("linear binder '" + t->b1.display + "' is never used (no weakening)",
                            term_to_string(t)),
                       std::nullopt;
            t->lam_linear = true;
            t->bind_type1 = *t->annot;
            TypeRef ty = t_lin(*t->annot, sb->first);
            return {{ty, node("-oI", sup_term(t), ty, env, {sb->second})}};
        }
        case TermTag::LetPair: {
            auto scrut = synth_term(env, t->t1);
            if (!scrut) return std::nullopt;
            auto [sty, sderiv] = *scrut;
            std::string nx = open_name(t->b1);
            std::string ny = open_name(t->b2);
            SupRef body = open_with_frees(t->s1, {nx, ny});
            bool sharp_mode = false;
            TypeRef bx, by;
            if (sty->tag == TypeTag::Prod) {
                bx = sty->a;
                by = sty->b;
            } else {
                TypeRef sharp = sty;
                while (sharp->tag == TypeTag::Sharp && sharp->a->tag == TypeTag::Sharp)
                    sharp = sharp->a;
                if (sharp->tag == TypeTag::Sharp && sharp->a->tag == TypeTag::Prod) {
                    sharp_mode = true;
                    bx = t_sharp(sharp->a->a);
                    by = t_sharp(sharp->a->b);
                } else {
                    return fail("pair destructor scrutinee has type " + type_to_string(sty),
                                term_to_string(t->t1)),
                           std::nullopt;
                }
            }
            env[nx] = VarState{bx, Zone::Linear, 0, 0};
            env[ny] = VarState{by, Zone::Linear, 0, 0};
            auto sb = synth_sup(env, body);
            bool ux = env[nx].used(), uy = env[ny].used();
            env.erase(nx);
            env.erase(ny);
            if (!sb) return std::nullopt;
            if (!ux || !uy)
                return fail("pair destructor binder unused (no linear weakening)",
                            term_to_string(t)),
                       std::nullopt;
            t->bind_type1 = bx;
            t->bind_type2 = by;
            TypeRef ty = sb->first;
            if (sharp_mode) {
                if (!is_ground(sb->first))
                    return fail("quantum pair destructor body has non-ground type " +
                                    type_to_string(sb->first),
                                term_to_string(t)),
                           std::nullopt;
                ty = t_sharp(sb->first);
            }
            return {{ty, node(sharp_mode ? "xE#" : "xE", sup_term(t), ty, env,
                              {sderiv, sb->second})}};
        }
        case TermTag::If:
            return fail("cannot synthesize the type of a conditional", term_to_string(t)),
                   std::nullopt;
        }
        return std::nullopt;
    }

    std::optional<std::pair<TypeRef, DerivationRef>> synth_sup(Env &env, const SupRef &s) {
        CanonicalForm cf = canonicalize(s);
        if (cf.is_single_unit()) return synth_term(env, cf.terms[0].second);
        return fail("cannot synthesize the type of a proper superposition", sup_to_string(s)),
               std::nullopt;
    }

    // =======================================================================
    // Entry
    // =======================================================================

    CheckResult run(const SupRef &s, const TypeRef &goal, const Contexts &ctx) {
        Env env;
        for (auto &[name, ty] : ctx.exponential) env[name] = VarState{ty, Zone::ExpDormant, 0, 0};
        for (auto &[name, ty] : ctx.linear) env[name] = VarState{ty, Zone::Linear, 0, 0};
        CheckResult res;
        auto d = check_sup(env, s, goal);
        if (d) {
            // linear context variables must all be consumed
            for (auto &[name, st] : env) {
                if (st.zone == Zone::Linear && !st.used()) {
                    res.ok = false;
                    res.reason = "linear context variable '" + name + "' is never used";
                    res.where = name;
                    return res;
                }
            }
            res.ok = true;
            res.derivation = *d;
            return res;
        }
        res.ok = false;
        res.reason = best_fail.depth >= 0 ? best_fail.reason : "no applicable rule";
        res.where = best_fail.where;
        return res;
    }
};

} // namespace

Checker::Checker(OrthoMode mode, const Program *defs, long eval_budget)
    : mode_(mode), defs_(defs), eval_budget_(eval_budget) {}

CheckResult Checker::check(const SupRef &s, const TypeRef &a) {
    return check_open(s, a, Contexts{});
}

CheckResult Checker::check_open(const SupRef &s, const TypeRef &a, const Contexts &ctx) {
    CheckerImpl impl(mode_, defs_, eval_budget_);
    return impl.run(s, a, ctx);
}

} // namespace punq
