#include "punq/eval.hpp"

#include <sstream>

namespace punq {

namespace {

/// One term-level reduction by the leftmost applicable rule. Returns the
/// resulting superposition (already sugar-distributed) and the rule name;
/// nullopt when `t` is a basis value.
std::optional<std::pair<SupRef, std::string>> step_term(const TermRef &t) {
    if (is_basis_value(t)) return std::nullopt;
    switch (t->tag) {
    case TermTag::If: {
        const TermRef &g = t->t1;
        if (g->tag == TermTag::Ket0) return {{t->s1, "If0"}};
        if (g->tag == TermTag::Ket1) return {{t->s2, "If1"}};
        auto inner = step_term(g);
        if (!inner) throw StuckError("conditional guard is a non-boolean value", sup_term(t));
        return {{mk_if(inner->first, t->s1, t->s2), "If+"}};
    }
    case TermTag::App: {
        const TermRef &f = t->t1;
        const TermRef &a = t->t2;
        if (!is_basis_value(a)) {
            auto inner = step_term(a);
            if (!inner) throw StuckError("application argument stuck", sup_term(t));
            return {{mk_app(sup_term(f), inner->first), "App"}};
        }
        if (f->tag == TermTag::Lam) return {{subst_group(f->s1, {a}), "Abs"}};
        auto inner = step_term(f);
        if (!inner) throw StuckError("application of a non-function value", sup_term(t));
        return {{mk_app(inner->first, sup_term(a)), "AppV"}};
    }
    case TermTag::Pair: {
        const TermRef &l = t->t1;
        const TermRef &r = t->t2;
        if (!is_basis_value(l)) {
            auto inner = step_term(l);
            if (!inner) throw StuckError("pair component stuck", sup_term(t));
            return {{mk_pair(inner->first, sup_term(r)), "Pair"}};
        }
        auto inner = step_term(r);
        if (!inner) throw StuckError("pair component stuck", sup_term(t));
        return {{mk_pair(sup_term(l), inner->first), "PairV"}};
    }
    case TermTag::LetPair: {
        const TermRef &sc = t->t1;
        if (sc->tag == TermTag::Pair && is_basis_value(sc)) {
            // body sees first component at index 1, second at index 0
            return {{subst_group(t->s1, {sc->t1, sc->t2}), "Let"}};
        }
        auto inner = step_term(sc);
        if (!inner) throw StuckError("pair destructor scrutinee is not a pair", sup_term(t));
        return {{mk_let(t->b1.display, t->b2.display, inner->first, t->s1), "Let+"}};
    }
    case TermTag::Var:
    case TermTag::Free: throw StuckError("free variable in evaluation position", sup_term(t));
    default: throw StuckError("stuck term", sup_term(t));
    }
}

} // namespace

std::optional<std::pair<SupRef, std::string>> step(const SupRef &s) {
    CanonicalForm cf = canonicalize(s);
    bool any = false;
    std::vector<std::string> rules;
    SupRef acc;
    for (auto &[a, t] : cf.terms) {
        SupRef piece;
        auto r = step_term(t);
        if (r) {
            any = true;
            piece = sup_scaled(a, r->first);
            bool seen = false;
            for (auto &nm : rules) seen = seen || nm == r->second;
            if (!seen) rules.push_back(r->second);
        } else {
            piece = a.is_one() ? sup_term(t) : sup_scaled(a, sup_term(t));
        }
        acc = acc ? sup_sum(acc, piece) : piece;
    }
    if (!any) return std::nullopt; // a value (including the null vector)
    std::string rule;
    if (rules.size() == 1) {
        rule = rules[0];
    } else {
        rule = "Sup(";
        for (size_t i = 0; i < rules.size(); ++i) rule += (i ? "," : "") + rules[i];
        rule += ")";
    }
    return {{canonicalize(acc).to_sup(), rule}};
}

long default_budget(const SupRef &s) {
    long n = sup_size(s);
    return 10 * n * n * n * n + 1000;
}

std::pair<SupRef, StepTrace> eval(const SupRef &s, long budget) {
    if (budget < 0) budget = default_budget(s);
    StepTrace trace;
    SupRef cur = canonicalize(s).to_sup();
    while (true) {
        auto r = step(cur);
        if (!r) return {cur, trace};
        cur = r->first;
        trace.steps.emplace_back(r->second, cur);
        if (trace.count() > budget) {
            std::ostringstream os;
            os << "evaluation budget of " << budget << " steps exhausted (trace has "
               << trace.count() << " steps)";
            throw BudgetError(os.str());
        }
    }
}

SupRef eval_value(const SupRef &s, long budget) { return eval(s, budget).first; }

std::string StepTrace::format() const {
    std::ostringstream os;
    int i = 0;
    for (const auto &[rule, sup] : steps)
        os << "#" << ++i << " [" << rule << "] " << sup_to_string(sup) << "\n";
    return os.str();
}

} // namespace punq
