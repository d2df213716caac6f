#include "punq/types.hpp"

#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace punq {

namespace {

TypeRef mk(TypeTag tag) { return std::make_shared<TypeNode>(tag); }

TypeRef mk2(TypeTag tag, TypeRef a, TypeRef b) {
    auto n = std::make_shared<TypeNode>(tag);
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

} // namespace

TypeRef t_bool() {
    static TypeRef b = mk(TypeTag::Bool);
    return b;
}

TypeRef t_var(int index) {
    auto n = std::make_shared<TypeNode>(TypeTag::VarBound);
    n->index = index;
    return n;
}

TypeRef t_free(const std::string &name) {
    auto n = std::make_shared<TypeNode>(TypeTag::VarFree);
    n->name = name;
    return n;
}

TypeRef t_lin(TypeRef a, TypeRef b) { return mk2(TypeTag::LinArrow, std::move(a), std::move(b)); }
TypeRef t_int(TypeRef a, TypeRef b) { return mk2(TypeTag::IntArrow, std::move(a), std::move(b)); }
TypeRef t_prod(TypeRef a, TypeRef b) { return mk2(TypeTag::Prod, std::move(a), std::move(b)); }

TypeRef t_sharp(TypeRef q) {
    if (!is_ground(q)) throw std::invalid_argument("# applied to non-ground type " + type_to_string(q));
    auto n = std::make_shared<TypeNode>(TypeTag::Sharp);
    n->a = std::move(q);
    return n;
}

TypeRef t_para(TypeRef a) {
    auto n = std::make_shared<TypeNode>(TypeTag::Para);
    n->a = std::move(a);
    return n;
}

TypeRef t_forall(const std::string &display, TypeRef body) {
    auto n = std::make_shared<TypeNode>(TypeTag::Forall);
    n->a = std::move(body);
    n->name = display;
    return n;
}

TypeRef t_bools(int n) {
    if (n < 1) throw std::invalid_argument("B^n needs n >= 1");
    if (n == 1) return t_bool();
    return t_prod(t_bool(), t_bools(n - 1));
}

bool is_ground(const TypeRef &t) {
    switch (t->tag) {
    case TypeTag::Bool: return true;
    case TypeTag::Sharp:
    case TypeTag::Para: return is_ground(t->a);
    case TypeTag::Prod: return is_ground(t->a) && is_ground(t->b);
    default: return false;
    }
}

int type_compare(const TypeRef &x, const TypeRef &y) {
    if (x.get() == y.get()) return 0;
    if (x->tag != y->tag) return x->tag < y->tag ? -1 : 1;
    switch (x->tag) {
    case TypeTag::Bool: return 0;
    case TypeTag::VarBound: return x->index == y->index ? 0 : (x->index < y->index ? -1 : 1);
    case TypeTag::VarFree: return x->name.compare(y->name);
    case TypeTag::Sharp:
    case TypeTag::Para:
    case TypeTag::Forall: return type_compare(x->a, y->a);
    default: {
        int c = type_compare(x->a, y->a);
        if (c) return c;
        return type_compare(x->b, y->b);
    }
    }
}

bool type_equal(const TypeRef &x, const TypeRef &y) { return type_compare(x, y) == 0; }

int type_size(const TypeRef &t) {
    switch (t->tag) {
    case TypeTag::Bool:
    case TypeTag::VarBound:
    case TypeTag::VarFree: return 1;
    case TypeTag::Sharp:
    case TypeTag::Para:
    case TypeTag::Forall: return 1 + type_size(t->a);
    default: return 1 + type_size(t->a) + type_size(t->b);
    }
}

namespace {

int prec_of(const TypeNode &t) {
    switch (t.tag) {
    case TypeTag::LinArrow:
    case TypeTag::IntArrow:
    case TypeTag::Forall: return 0;
    case TypeTag::Prod: return 1;
    default: return 2;
    }
}

void print_type(std::ostringstream &os, const TypeRef &t, int min_prec,
                std::vector<std::string> &binders) {
    bool paren = prec_of(*t) < min_prec;
    if (paren) os << "(";
    switch (t->tag) {
    case TypeTag::Bool: os << "B"; break;
    case TypeTag::VarBound: {
        int i = static_cast<int>(binders.size()) - 1 - t->index;
        if (i >= 0)
            os << binders[static_cast<size_t>(i)];
        else
            os << "?" << t->index;
        break;
    }
    case TypeTag::VarFree: os << t->name; break;
    case TypeTag::LinArrow:
    case TypeTag::IntArrow:
        print_type(os, t->a, 1, binders);
        os << (t->tag == TypeTag::LinArrow ? " -o " : " => ");
        print_type(os, t->b, 0, binders);
        break;
    case TypeTag::Prod:
        print_type(os, t->a, 2, binders);
        os << " * ";
        print_type(os, t->b, 1, binders); // right associative
        break;
    case TypeTag::Sharp:
        os << "#";
        print_type(os, t->a, 2, binders);
        break;
    case TypeTag::Para:
        os << "$";
        print_type(os, t->a, 2, binders);
        break;
    case TypeTag::Forall: {
        std::string nm = t->name.empty() ? "X" : t->name;
        // avoid display collisions with enclosing binders
        std::string base = nm;
        int k = 0;
        auto taken = [&](const std::string &s) {
            for (auto &b : binders)
                if (b == s) return true;
            return false;
        };
        while (taken(nm)) nm = base + std::to_string(++k);
        os << "forall " << nm << ". ";
        binders.push_back(nm);
        print_type(os, t->a, 0, binders);
        binders.pop_back();
        break;
    }
    }
    if (paren) os << ")";
}

} // namespace

std::string type_to_string(const TypeRef &t) {
    std::ostringstream os;
    std::vector<std::string> binders;
    print_type(os, t, 0, binders);
    return os.str();
}

TypeRef bang(const TypeRef &t) {
    switch (t->tag) {
    case TypeTag::Bool:
    case TypeTag::VarBound:
    case TypeTag::VarFree:
    case TypeTag::LinArrow:
    case TypeTag::IntArrow: return t;
    case TypeTag::Prod: return t_prod(bang(t->a), bang(t->b));
    case TypeTag::Sharp: return bang(t->a);
    case TypeTag::Para: return t_para(bang(t->a));
    case TypeTag::Forall: return t_forall(t->name, bang(t->a));
    }
    return t;
}

// ---------------------------------------------------------------------------
// Subtyping. The axioms touch ground types only and never relate a ground
// type to a non-ground one, so the relation splits: non-ground pairs are
// pure congruence (componentwise with contravariant arrow domains), and
// ground pairs are reachability in the rewrite system
//   Q -> #Q        (add a sharp anywhere)
//   Q -> #!(Q)     (promote: sharp on top, inner sharps erased)
//   #$Q -> $#Q     (sharps sink below paragraphs)
//   ##Q <-> #Q     (normalization: adjacent sharps collapse)
// explored by BFS over sharp-decorated skeletons, which is a finite state
// space once runs of sharps are collapsed.
// ---------------------------------------------------------------------------

namespace {

TypeRef norm_sharps(const TypeRef &t) {
    switch (t->tag) {
    case TypeTag::Bool: return t;
    case TypeTag::Sharp: {
        TypeRef inner = t->a;
        while (inner->tag == TypeTag::Sharp) inner = inner->a;
        return t_sharp(norm_sharps(inner));
    }
    case TypeTag::Para: return t_para(norm_sharps(t->a));
    case TypeTag::Prod: return t_prod(norm_sharps(t->a), norm_sharps(t->b));
    default: return t;
    }
}

// skeleton with sharps erased; ground subtypes always share it
TypeRef skeleton(const TypeRef &t) {
    switch (t->tag) {
    case TypeTag::Bool: return t;
    case TypeTag::Sharp: return skeleton(t->a);
    case TypeTag::Para: return t_para(skeleton(t->a));
    case TypeTag::Prod: return t_prod(skeleton(t->a), skeleton(t->b));
    default: return t;
    }
}

// all normalized types reachable by one rewrite anywhere inside t
void ground_variants(const TypeRef &t, std::vector<TypeRef> &out) {
    out.push_back(norm_sharps(t_sharp(t)));
    out.push_back(norm_sharps(t_sharp(bang(t))));
    if (t->tag == TypeTag::Sharp && t->a->tag == TypeTag::Para)
        out.push_back(norm_sharps(t_para(t_sharp(t->a->a))));
    switch (t->tag) {
    case TypeTag::Sharp:
    case TypeTag::Para: {
        std::vector<TypeRef> inner;
        ground_variants(t->a, inner);
        for (auto &v : inner)
            out.push_back(norm_sharps(t->tag == TypeTag::Sharp ? t_sharp(v) : t_para(v)));
        break;
    }
    case TypeTag::Prod: {
        std::vector<TypeRef> left, right;
        ground_variants(t->a, left);
        ground_variants(t->b, right);
        for (auto &v : left) out.push_back(t_prod(v, t->b));
        for (auto &v : right) out.push_back(t_prod(t->a, v));
        break;
    }
    default: break;
    }
}

bool ground_subtype(const TypeRef &a, const TypeRef &b) {
    if (!type_equal(skeleton(a), skeleton(b))) return false;
    TypeRef start = norm_sharps(a);
    TypeRef target = norm_sharps(b);
    if (type_equal(start, target)) return true;
    std::set<std::string> visited{type_to_string(start)};
    std::vector<TypeRef> frontier{start};
    while (!frontier.empty()) {
        std::vector<TypeRef> next;
        for (const auto &t : frontier) {
            std::vector<TypeRef> vs;
            ground_variants(t, vs);
            for (auto &v : vs) {
                if (type_equal(v, target)) return true;
                auto key = type_to_string(v);
                if (visited.insert(key).second) next.push_back(v);
            }
        }
        frontier = std::move(next);
    }
    return false;
}

bool subtype_rec(const TypeRef &a, const TypeRef &b) {
    if (type_equal(a, b)) return true;
    bool ga = is_ground(a), gb = is_ground(b);
    if (ga != gb) return false;
    if (ga) {
        static std::map<std::pair<std::string, std::string>, bool> memo;
        auto key = std::make_pair(type_to_string(a), type_to_string(b));
        auto it = memo.find(key);
        if (it != memo.end()) return it->second;
        bool res = ground_subtype(a, b);
        memo[key] = res;
        return res;
    }
    if (a->tag != b->tag) return false;
    switch (a->tag) {
    case TypeTag::LinArrow:
    case TypeTag::IntArrow:
        return subtype_rec(b->a, a->a) && subtype_rec(a->b, b->b);
    case TypeTag::Prod: return subtype_rec(a->a, b->a) && subtype_rec(a->b, b->b);
    case TypeTag::Para:
    case TypeTag::Forall: return subtype_rec(a->a, b->a);
    default: return false;
    }
}

} // namespace

bool subtype(const TypeRef &a, const TypeRef &b) { return subtype_rec(a, b); }

namespace {

TypeRef subst_free(const TypeRef &a, const std::string &name, const TypeRef &c, bool pos) {
    switch (a->tag) {
    case TypeTag::Bool:
    case TypeTag::VarBound: return a;
    case TypeTag::VarFree:
        if (a->name != name) return a;
        return pos ? c : bang(c);
    case TypeTag::LinArrow:
        // Negative substitution stops banging at linear arrows: arrow types
        // are already clonable, so both sides continue positively.
        return t_lin(subst_free(a->a, name, c, true), subst_free(a->b, name, c, true));
    case TypeTag::IntArrow:
        return t_int(subst_free(a->a, name, c, false), subst_free(a->b, name, c, true));
    case TypeTag::Prod:
        return t_prod(subst_free(a->a, name, c, pos), subst_free(a->b, name, c, pos));
    case TypeTag::Sharp: {
        TypeRef q = subst_free(a->a, name, c, pos);
        return t_sharp(q); // construction re-checks the ground discipline
    }
    case TypeTag::Para: return t_para(subst_free(a->a, name, c, pos));
    case TypeTag::Forall: return t_forall(a->name, subst_free(a->a, name, c, pos));
    }
    return a;
}

TypeRef subst_bound(const TypeRef &a, int which, const TypeRef &c, bool pos) {
    switch (a->tag) {
    case TypeTag::Bool:
    case TypeTag::VarFree: return a;
    case TypeTag::VarBound:
        if (a->index != which) return a;
        return pos ? c : bang(c); // c closed: no shifting needed
    case TypeTag::LinArrow:
        return t_lin(subst_bound(a->a, which, c, true), subst_bound(a->b, which, c, true));
    case TypeTag::IntArrow:
        return t_int(subst_bound(a->a, which, c, false), subst_bound(a->b, which, c, true));
    case TypeTag::Prod:
        return t_prod(subst_bound(a->a, which, c, pos), subst_bound(a->b, which, c, pos));
    case TypeTag::Sharp: return t_sharp(subst_bound(a->a, which, c, pos));
    case TypeTag::Para: return t_para(subst_bound(a->a, which, c, pos));
    case TypeTag::Forall: return t_forall(a->name, subst_bound(a->a, which + 1, c, pos));
    }
    return a;
}

} // namespace

TypeRef subst_type(const TypeRef &a, const std::string &name, const TypeRef &c, bool positive) {
    return subst_free(a, name, c, positive);
}

TypeRef open_forall(const TypeRef &forall_type, const TypeRef &c) {
    if (forall_type->tag != TypeTag::Forall)
        throw std::invalid_argument("open_forall on non-forall type");
    return subst_bound(forall_type->a, 0, c, true);
}

TypeRef open_forall_free(const TypeRef &forall_type, const std::string &fresh) {
    return open_forall(forall_type, t_free(fresh));
}

namespace {

TypeRef close_rec(const TypeRef &t, const std::string &name, int depth) {
    switch (t->tag) {
    case TypeTag::Bool:
    case TypeTag::VarBound: return t;
    case TypeTag::VarFree: return t->name == name ? t_var(depth) : t;
    case TypeTag::LinArrow: return t_lin(close_rec(t->a, name, depth), close_rec(t->b, name, depth));
    case TypeTag::IntArrow: return t_int(close_rec(t->a, name, depth), close_rec(t->b, name, depth));
    case TypeTag::Prod: return t_prod(close_rec(t->a, name, depth), close_rec(t->b, name, depth));
    case TypeTag::Sharp: return t_sharp(close_rec(t->a, name, depth));
    case TypeTag::Para: return t_para(close_rec(t->a, name, depth));
    case TypeTag::Forall: return t_forall(t->name, close_rec(t->a, name, depth + 1));
    }
    return t;
}

} // namespace

TypeRef close_forall(const TypeRef &body, const std::string &name, const std::string &display) {
    return t_forall(display, close_rec(body, name, 0));
}

unsigned long card(const TypeRef &q) {
    switch (q->tag) {
    case TypeTag::Bool: return 2;
    case TypeTag::Sharp:
    case TypeTag::Para: return card(q->a);
    case TypeTag::Prod: return card(q->a) * card(q->b);
    default: throw std::invalid_argument("card on non-ground type " + type_to_string(q));
    }
}

TypeRef strip_paras(const TypeRef &t, int &count) {
    count = 0;
    TypeRef cur = t;
    while (cur->tag == TypeTag::Para) {
        cur = cur->a;
        ++count;
    }
    return cur;
}

TypeRef wrap_paras(TypeRef t, int count) {
    for (int i = 0; i < count; ++i) t = t_para(t);
    return t;
}

} // namespace punq
