#include "punq/validate.hpp"

#include "punq/eval.hpp"

#include <functional>

namespace punq {

namespace {

struct Validator {
    OrthoMode mode;
    const Program *defs;
    ValidationReport rep;

    void err(const DerivationRef &d, const std::string &msg) {
        if (rep.ok) {
            rep.ok = false;
            rep.first_error = "[" + d->rule + "] " + msg + " (subject: " +
                              sup_to_string(d->subject) + ")";
        }
    }

    SupRef resolve(SupRef s) const { return defs ? inline_defs_into(*defs, s) : s; }

    bool ortho_holds(const SupRef &lhs, const SupRef &rhs, const TypeRef &q) {
        // independent discharge: same-variable-guard conditionals decompose
        // into all four branch pairs; otherwise the fragment operations
        // decide.
        if (lhs->tag == SupTag::Single && rhs->tag == SupTag::Single) {
            const TermRef &a = lhs->term;
            const TermRef &b = rhs->term;
            if (a->tag == TermTag::If && b->tag == TermTag::If &&
                (a->t1->tag == TermTag::Free || a->t1->tag == TermTag::Var) &&
                term_equal(a->t1, b->t1)) {
                return ortho_holds(a->s1, b->s1, q) && ortho_holds(a->s2, b->s2, q) &&
                       ortho_holds(a->s1, b->s2, q) && ortho_holds(a->s2, b->s1, q);
            }
        }
        SupRef l = resolve(lhs), r = resolve(rhs);
        try {
            if (is_closed(l) && is_closed(r)) return ortho_empty(l, r);
            switch (mode.kind) {
            case OrthoMode::Empty: return false;
            case OrthoMode::Times: return ortho_times(l, r);
            case OrthoMode::UntypedBounded:
                return ortho_untyped_bounded(l, r, q, mode.depth);
            }
        } catch (const std::exception &) {
            return false;
        }
        return false;
    }

    void side_conditions(const DerivationRef &d) {
        for (const auto &sc : d->side) {
            switch (sc.kind) {
            case SideCondition::Subtype:
                if (!subtype(sc.sub_lhs, sc.at))
                    err(d, "recorded subtyping fact fails: " + type_to_string(sc.sub_lhs) +
                               " <= " + type_to_string(sc.at));
                break;
            case SideCondition::Norm: {
                RealAlg total;
                for (const auto &a : sc.amps) total = total + a.norm_sq();
                if (total != RealAlg::of(1))
                    err(d, "recorded coefficients do not have unit norm: " + total.to_string());
                break;
            }
            case SideCondition::Ortho:
                if (!ortho_holds(sc.lhs, sc.rhs, sc.at))
                    err(d, "recorded orthogonality fact fails between " + sup_to_string(sc.lhs) +
                               " and " + sup_to_string(sc.rhs));
                break;
            }
        }
    }

    void shape(const DerivationRef &d) {
        const std::string &r = d->rule;
        auto subject_term = [&]() -> TermRef {
            CanonicalForm cf = canonicalize(d->subject);
            return cf.is_single_unit() ? cf.terms[0].second : nullptr;
        };
        if (r == "0" || r == "1") {
            TermRef t = subject_term();
            if (!t || (r == "0" && t->tag != TermTag::Ket0) || (r == "1" && t->tag != TermTag::Ket1))
                err(d, "bit literal rule applied to a non-literal");
            if (!type_equal(d->type, t_bool())) err(d, "bit literal typed at non-B");
        } else if (r == "Ax" || r == "Def") {
            TermRef t = subject_term();
            if (!t || t->tag != TermTag::Free) err(d, "axiom rule applied to a non-variable");
            if (r == "Def" && defs && t && !defs->find(t->name))
                err(d, "reference to unknown definition");
        } else if (r == "<=") {
            if (d->premises.size() != 1) err(d, "subsumption needs one premise");
            else {
                if (!subtype(d->premises[0]->type, d->type))
                    err(d, "subsumption premise type is not a subtype of the conclusion");
            }
        } else if (r == "forallI") {
            if (d->type->tag != TypeTag::Forall) err(d, "forall introduction at non-forall type");
            if (d->premises.size() != 1) err(d, "forall introduction needs one premise");
        } else if (r == "$I") {
            if (d->type->tag != TypeTag::Para) err(d, "$ introduction at non-$ type");
            if (d->premises.size() != 1 || !type_equal(d->premises[0]->type, d->type->a))
                err(d, "$ introduction premise must type the body of the $");
        } else if (r == "-oI" || r == "=>I") {
            TermRef t = subject_term();
            if (!t || t->tag != TermTag::Lam) err(d, "arrow introduction on a non-abstraction");
            bool lin = r == "-oI";
            if ((lin && d->type->tag != TypeTag::LinArrow) ||
                (!lin && d->type->tag != TypeTag::IntArrow))
                err(d, "arrow introduction type has the wrong arrow");
            if (d->premises.size() != 1 || !type_equal(d->premises[0]->type, d->type->b))
                err(d, "arrow introduction premise must type the body at the codomain");
        } else if (r == "-oE" || r == "=>E") {
            TermRef t = subject_term();
            if (!t || t->tag != TermTag::App) err(d, "arrow elimination on a non-application");
            if (d->premises.size() != 2) err(d, "arrow elimination needs two premises");
        } else if (r == "xI") {
            TermRef t = subject_term();
            if (!t || t->tag != TermTag::Pair) err(d, "pair introduction on a non-pair");
            if (d->type->tag == TypeTag::Prod) {
                if (d->premises.size() != 2 ||
                    !type_equal(d->premises[0]->type, d->type->a) ||
                    !type_equal(d->premises[1]->type, d->type->b))
                    err(d, "pair premises do not match the product components");
            }
        } else if (r == "xE" || r == "xE#") {
            TermRef t = subject_term();
            if (!t || t->tag != TermTag::LetPair) err(d, "pair elimination on a non-let");
            if (d->premises.size() != 2) err(d, "pair elimination needs two premises");
            if (r == "xE#") {
                if (d->type->tag != TypeTag::Sharp)
                    err(d, "quantum pair elimination must conclude a # type");
                TypeRef sty = d->premises[0]->type;
                while (sty->tag == TypeTag::Sharp && sty->a->tag == TypeTag::Sharp) sty = sty->a;
                if (!(sty->tag == TypeTag::Sharp && sty->a->tag == TypeTag::Prod))
                    err(d, "quantum pair elimination scrutinee is not #(product)");
            }
        } else if (r == "if" || r == "if#") {
            TermRef t = subject_term();
            if (!t || t->tag != TermTag::If) err(d, "conditional rule on a non-conditional");
            if (d->premises.size() != 3) err(d, "conditional needs guard and two branch premises");
            else {
                const TypeRef &g = d->premises[0]->type;
                if (r == "if" && !type_equal(g, t_bool()))
                    err(d, "classical conditional guard premise must have type B");
                if (r == "if#" && !subtype(g, t_sharp(t_bool())))
                    err(d, "quantum conditional guard premise must be a qubit");
                if (!type_equal(d->premises[1]->type, d->premises[2]->type))
                    err(d, "conditional branches typed at different types");
                if (r == "if#") {
                    if (d->type->tag != TypeTag::Sharp)
                        err(d, "quantum conditional must conclude a # type");
                    else if (!type_equal(d->type->a, d->premises[1]->type))
                        err(d, "quantum conditional conclusion does not wrap the branch type");
                    bool have_ortho = false;
                    for (const auto &sc : d->side) have_ortho |= sc.kind == SideCondition::Ortho;
                    if (!have_ortho) err(d, "quantum conditional without an orthogonality fact");
                }
            }
        } else if (r == "#i") {
            if (d->type->tag != TypeTag::Sharp) err(d, "superposition rule at non-# type");
            CanonicalForm cf = canonicalize(d->subject);
            if (cf.terms.size() != d->premises.size())
                err(d, "superposition premises do not cover the canonical summands");
            bool have_norm = false;
            for (const auto &sc : d->side) have_norm |= sc.kind == SideCondition::Norm;
            if (!have_norm) err(d, "superposition without a norm fact");
            size_t expected = cf.terms.size() * (cf.terms.size() - 1) / 2;
            size_t got = 0;
            for (const auto &sc : d->side)
                if (sc.kind == SideCondition::Ortho) ++got;
            if (got < expected) err(d, "superposition missing pairwise orthogonality facts");
            for (size_t i = 0; i < d->premises.size(); ++i)
                if (!type_equal(d->premises[i]->type, d->type->a))
                    err(d, "superposition premise typed off the # body");
        } else {
            err(d, "unknown rule name");
        }
    }

    void walk(const DerivationRef &d) {
        ++rep.nodes;
        shape(d);
        side_conditions(d);
        for (const auto &p : d->premises)
            if (p) walk(p);
    }
};

} // namespace

ValidationReport validate_derivation(const DerivationRef &d, OrthoMode mode, const Program *defs) {
    Validator v{mode, defs, {}};
    if (!d) {
        v.rep.ok = false;
        v.rep.first_error = "missing derivation";
        return v.rep;
    }
    v.walk(d);
    return v.rep;
}

} // namespace punq
