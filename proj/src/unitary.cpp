#include "punq/unitary.hpp"

#include "punq/eval.hpp"

#include <json.hpp>

#include <cmath>
#include <functional>
#include <sstream>

namespace punq {

QMatrix QMatrix::identity(size_t n) {
    QMatrix m(n, n);
    for (size_t i = 0; i < n; ++i) m.at(i, i) = Amplitude::one();
    return m;
}

QMatrix QMatrix::operator*(const QMatrix &o) const {
    if (cols != o.rows) throw std::invalid_argument("matrix shape mismatch in product");
    QMatrix out(rows, o.cols);
    for (size_t r = 0; r < rows; ++r)
        for (size_t c = 0; c < o.cols; ++c) {
            Amplitude acc;
            for (size_t k = 0; k < cols; ++k) acc = acc + at(r, k) * o.at(k, c);
            out.at(r, c) = acc;
        }
    return out;
}

QMatrix QMatrix::tensor(const QMatrix &o) const {
    QMatrix out(rows * o.rows, cols * o.cols);
    for (size_t r = 0; r < rows; ++r)
        for (size_t c = 0; c < cols; ++c)
            for (size_t r2 = 0; r2 < o.rows; ++r2)
                for (size_t c2 = 0; c2 < o.cols; ++c2)
                    out.at(r * o.rows + r2, c * o.cols + c2) = at(r, c) * o.at(r2, c2);
    return out;
}

bool QMatrix::operator==(const QMatrix &o) const {
    if (rows != o.rows || cols != o.cols) return false;
    for (size_t i = 0; i < entries.size(); ++i)
        if (entries[i] != o.entries[i]) return false;
    return true;
}

std::string matrix_class_name(MatrixClass c) {
    switch (c) {
    case MatrixClass::Unitary: return "unitary";
    case MatrixClass::StrictIsometry: return "strict-isometry";
    case MatrixClass::Neither: return "neither";
    }
    return "?";
}

std::string QMatrix::to_json() const {
    nlohmann::json j;
    j["rows"] = rows;
    j["cols"] = cols;
    nlohmann::json es = nlohmann::json::array();
    for (const auto &e : entries) {
        es.push_back({rational_to_string(e.re.rat), rational_to_string(e.re.sqrt2),
                      rational_to_string(e.im.rat), rational_to_string(e.im.sqrt2)});
    }
    j["entries"] = es;
    return j.dump(2);
}

QMatrix QMatrix::from_json(const std::string &text) {
    nlohmann::json j = nlohmann::json::parse(text);
    QMatrix m(j.at("rows").get<size_t>(), j.at("cols").get<size_t>());
    const auto &es = j.at("entries");
    if (es.size() != m.entries.size()) throw std::invalid_argument("matrix entry count mismatch");
    for (size_t i = 0; i < m.entries.size(); ++i) {
        const auto &e = es[i];
        m.entries[i] = Amplitude{RealAlg{parse_rational(e[0].get<std::string>()),
                                         parse_rational(e[1].get<std::string>())},
                                 RealAlg{parse_rational(e[2].get<std::string>()),
                                         parse_rational(e[3].get<std::string>())}};
    }
    return m;
}

TermRef ket_term(size_t index, int qubits) {
    if (qubits < 1) throw std::invalid_argument("ket_term needs at least one qubit");
    auto bit = [&](int pos) { // pos 1 = most significant
        return (index >> (qubits - pos)) & 1u;
    };
    TermRef acc = bit(qubits) ? term_ket1() : term_ket0();
    for (int pos = qubits - 1; pos >= 1; --pos)
        acc = term_pair(bit(pos) ? term_ket1() : term_ket0(), acc);
    return acc;
}

namespace {

bool decode_basis(const TermRef &t, int qubits, size_t &index) {
    if (qubits == 1) {
        if (t->tag == TermTag::Ket0) { index = 0; return true; }
        if (t->tag == TermTag::Ket1) { index = 1; return true; }
        return false;
    }
    if (t->tag != TermTag::Pair) return false;
    size_t head = 0, rest = 0;
    if (t->t1->tag == TermTag::Ket0) head = 0;
    else if (t->t1->tag == TermTag::Ket1) head = 1;
    else return false;
    if (!decode_basis(t->t2, qubits - 1, rest)) return false;
    index = (head << (qubits - 1)) | rest;
    return true;
}

} // namespace

std::vector<Amplitude> decode_value(const SupRef &value, int qubits) {
    std::vector<Amplitude> vec(static_cast<size_t>(1) << qubits);
    CanonicalForm cf = canonicalize(value);
    for (auto &[a, t] : cf.terms) {
        size_t idx = 0;
        if (!decode_basis(t, qubits, idx))
            throw std::invalid_argument("value is not a basis-ket tuple of " +
                                        std::to_string(qubits) + " qubits: " + term_to_string(t));
        vec[idx] = vec[idx] + a;
    }
    return vec;
}

SupRef vector_to_sup(const std::vector<Amplitude> &vec, int qubits) {
    SupRef acc;
    for (size_t i = 0; i < vec.size(); ++i) {
        if (vec[i].is_zero()) continue;
        SupRef piece = sup_term(ket_term(i, qubits));
        if (!vec[i].is_one()) piece = sup_scaled(vec[i], piece);
        acc = acc ? sup_sum(acc, piece) : piece;
    }
    return acc ? acc : sup_zero();
}

QMatrix extract_matrix(const SupRef &t, int n, int k, long budget) {
    size_t cols = static_cast<size_t>(1) << n;
    size_t rows = static_cast<size_t>(1) << k;
    QMatrix m(rows, cols);
    for (size_t i = 0; i < cols; ++i) {
        SupRef applied = mk_app(t, sup_term(ket_term(i, n)));
        SupRef v = eval_value(applied, budget >= 0 ? budget : default_budget(applied));
        std::vector<Amplitude> col = decode_value(v, k);
        for (size_t r = 0; r < rows; ++r) m.at(r, i) = col[r];
    }
    return m;
}

MatrixClass classify(const QMatrix &m) {
    if (m.cols > m.rows) return MatrixClass::Neither;
    for (size_t i = 0; i < m.cols; ++i)
        for (size_t j = i; j < m.cols; ++j) {
            Amplitude acc;
            for (size_t r = 0; r < m.rows; ++r) acc = acc + m.at(r, i).conj() * m.at(r, j);
            if (i == j) {
                if (!acc.is_one()) return MatrixClass::Neither;
            } else if (!acc.is_zero()) {
                return MatrixClass::Neither;
            }
        }
    return m.rows == m.cols ? MatrixClass::Unitary : MatrixClass::StrictIsometry;
}

SupRef synthesize(const QMatrix &m, int n, int k) {
    if (n < 1 || k < n) throw std::invalid_argument("synthesize needs k >= n >= 1");
    if (m.cols != (static_cast<size_t>(1) << n) || m.rows != (static_cast<size_t>(1) << k))
        throw std::invalid_argument("matrix shape does not match the qubit counts");
    if (classify(m) == MatrixClass::Neither)
        throw std::invalid_argument("synthesize requires an isometric matrix");

    auto column = [&](size_t i) {
        std::vector<Amplitude> col(m.rows);
        for (size_t r = 0; r < m.rows; ++r) col[r] = m.at(r, i);
        return vector_to_sup(col, k);
    };

    auto qname = [](int j) { return "q" + std::to_string(j); };

    // conditional tree on q1..qn, leaves are the columns in basis order
    std::function<SupRef(int, size_t)> tree = [&](int d, size_t prefix) -> SupRef {
        if (d == n) return column(prefix);
        return sup_term(
            term_if(term_free(qname(d + 1)), tree(d + 1, prefix << 1), tree(d + 1, (prefix << 1) | 1)));
    };
    SupRef body = tree(0, 0);

    if (n == 1) {
        // single qubit: the lambda binder is the guard itself
        SupRef guarded = subst_free(body, qname(1), term_free("x"));
        return lam("x", guarded);
    }
    // n-1 nested destructors peel q1..qn off the right-nested input
    for (int j = n - 1; j >= 1; --j) {
        std::string scr = j == 1 ? "x" : "r" + std::to_string(j - 1);
        std::string snd = j == n - 1 ? qname(n) : "r" + std::to_string(j);
        body = let_pair(qname(j), snd, sup_term(term_free(scr)), body);
    }
    return lam("x", body);
}

bool represents_check(const SupRef &t, const QMatrix &m, int n, int k, int trials,
                      std::mt19937 &rng, long budget) {
    size_t dim_in = static_cast<size_t>(1) << n;
    auto apply_term = [&](const std::vector<Amplitude> &vec) {
        SupRef arg = vector_to_sup(vec, n);
        SupRef applied = mk_app(t, arg);
        SupRef v = eval_value(applied, budget >= 0 ? budget : default_budget(applied));
        return decode_value(v, k);
    };
    auto apply_matrix = [&](const std::vector<Amplitude> &vec) {
        std::vector<Amplitude> out(m.rows);
        for (size_t r = 0; r < m.rows; ++r) {
            Amplitude acc;
            for (size_t c = 0; c < m.cols; ++c) acc = acc + m.at(r, c) * vec[c];
            out[r] = acc;
        }
        return out;
    };
    auto same = [](const std::vector<Amplitude> &a, const std::vector<Amplitude> &b) {
        if (a.size() != b.size()) return false;
        for (size_t i = 0; i < a.size(); ++i)
            if (a[i] != b[i]) return false;
        return true;
    };

    for (size_t i = 0; i < dim_in; ++i) {
        std::vector<Amplitude> e(dim_in);
        e[i] = Amplitude::one();
        if (!same(apply_term(e), apply_matrix(e))) return false;
    }

    std::uniform_int_distribution<int> small(-2, 2);
    int done = 0;
    int attempts = 0;
    while (done < trials && attempts < trials * 200) {
        ++attempts;
        // integer lattice vector a + b i per coordinate
        std::vector<long> re(dim_in), im(dim_in);
        long norm = 0;
        for (size_t c = 0; c < dim_in; ++c) {
            re[c] = small(rng);
            im[c] = small(rng);
            norm += re[c] * re[c] + im[c] * im[c];
        }
        if (norm == 0) continue;
        // exact normalization needs norm = odd_square * 2^e
        long e2 = 0, rest = norm;
        while (rest % 2 == 0) {
            rest /= 2;
            ++e2;
        }
        long root = static_cast<long>(std::lround(std::sqrt(static_cast<double>(rest))));
        if (root * root != rest) continue;
        // 1/sqrt(norm) = 1/(root * 2^(e2/2))            when e2 even
        //             = 1/(root * 2^((e2+1)/2)) * sqrt2 when e2 odd
        Amplitude inv;
        if (e2 % 2 == 0) {
            inv = Amplitude::rational(make_rational(1, root) / make_rational(1L << (e2 / 2)));
        } else {
            Rational base = make_rational(1, root) / make_rational(1L << ((e2 + 1) / 2));
            inv = Amplitude{RealAlg{Rational(0), base}, RealAlg()};
        }
        std::vector<Amplitude> vec(dim_in);
        for (size_t c = 0; c < dim_in; ++c)
            vec[c] = inv * Amplitude{RealAlg::of(re[c]), RealAlg::of(im[c])};
        if (!same(apply_term(vec), apply_matrix(vec))) return false;
        ++done;
    }
    return done == trials;
}

// ---------------------------------------------------------------------------
// Uninhabitation probes
// ---------------------------------------------------------------------------

namespace {

// unit vectors over the coefficient alphabet
// {0, +-1, +-i, +-1/sqrt2, +-i/sqrt2, +-1/2, +-i/2}
std::vector<std::vector<Amplitude>> unit_vector_pool(int qubits, int depth) {
    std::vector<Amplitude> alphabet{Amplitude::zero()};
    std::vector<Amplitude> units{Amplitude::one(), -Amplitude::one(), Amplitude::imag_unit(),
                                 -Amplitude::imag_unit()};
    for (const auto &u : units) alphabet.push_back(u);
    if (depth >= 2) {
        for (const auto &u : units) alphabet.push_back(Amplitude::inv_sqrt2() * u);
    }
    if (depth >= 3) {
        for (const auto &u : units) alphabet.push_back(Amplitude::rational(make_rational(1, 2)) * u);
    }
    size_t dim = static_cast<size_t>(1) << qubits;
    std::vector<std::vector<Amplitude>> pool;
    std::vector<size_t> idx(dim, 0);
    while (true) {
        std::vector<Amplitude> v(dim);
        RealAlg norm;
        for (size_t c = 0; c < dim; ++c) {
            v[c] = alphabet[idx[c]];
            norm = norm + v[c].norm_sq();
        }
        if (norm == RealAlg::of(1)) pool.push_back(v);
        size_t k = 0;
        for (; k < dim; ++k) {
            if (++idx[k] < alphabet.size()) break;
            idx[k] = 0;
        }
        if (k == dim) break;
    }
    return pool;
}

} // namespace

ProbeResult probe_uninhabited(int n, int k, int product_split, int depth, OrthoMode mode) {
    ProbeResult res;
    size_t leaves = static_cast<size_t>(1) << n;

    TypeRef target;
    std::vector<std::vector<Amplitude>> pool;
    std::vector<std::vector<Amplitude>> pool2;
    if (product_split == 0) {
        target = t_lin(t_sharp(t_bools(n)), t_sharp(t_bools(k)));
        pool = unit_vector_pool(k, depth);
    } else {
        int a = product_split, b = k - product_split;
        target = t_lin(t_sharp(t_bools(n)), t_prod(t_sharp(t_bools(a)), t_sharp(t_bools(b))));
        pool = unit_vector_pool(a, depth);
        pool2 = unit_vector_pool(b, depth);
    }
    res.leaf_pool = product_split == 0 ? pool.size() : pool.size() * pool2.size();

    Checker checker(mode);

    // leaf superpositions by pool index
    auto leaf_sup = [&](size_t idx) -> SupRef {
        if (product_split == 0) return vector_to_sup(pool[idx], k);
        size_t i = idx / pool2.size(), j = idx % pool2.size();
        return mk_pair(vector_to_sup(pool[i], product_split),
                       vector_to_sup(pool2[j], k - product_split));
    };
    size_t pool_size = res.leaf_pool;

    // incremental pairwise-orthogonality pruning mirrors the checker's
    // side conditions; full checks run only on surviving assignments
    std::vector<size_t> assign(leaves, 0);
    std::function<bool(size_t)> search = [&](size_t pos) -> bool {
        if (pos == leaves) {
            std::vector<SupRef> cols;
            for (size_t i = 0; i < leaves; ++i) cols.push_back(leaf_sup(assign[i]));
            std::function<SupRef(int, size_t)> tree = [&](int d, size_t prefix) -> SupRef {
                if (d == n) return cols[prefix];
                return sup_term(term_if(term_free("q" + std::to_string(d + 1)),
                                        tree(d + 1, prefix << 1), tree(d + 1, (prefix << 1) | 1)));
            };
            SupRef body = tree(0, 0);
            SupRef cand;
            if (n == 1) {
                cand = lam("x", subst_free(body, "q1", term_free("x")));
            } else {
                for (int j = n - 1; j >= 1; --j) {
                    std::string scr = j == 1 ? "x" : "r" + std::to_string(j - 1);
                    std::string snd = j == n - 1 ? "q" + std::to_string(n) : "r" + std::to_string(j);
                    body = let_pair("q" + std::to_string(j), snd, sup_term(term_free(scr)), body);
                }
                cand = lam("x", body);
            }
            ++res.candidates_tried;
            CheckResult r = checker.check(cand, target);
            if (r.ok) {
                res.found = true;
                res.witness = cand;
                return true;
            }
            return false;
        }
        for (size_t c = 0; c < pool_size; ++c) {
            assign[pos] = c;
            bool ok = true;
            for (size_t prev = 0; prev < pos && ok; ++prev) {
                // all leaf pairs must stay orthogonal for any candidate to
                // survive the same-guard decomposition
                if (!inner_product(leaf_sup(assign[prev]), leaf_sup(c)).is_zero()) ok = false;
            }
            if (!ok) continue;
            if (search(pos + 1)) return true;
            if (res.candidates_tried > 2'000'000) return false;
        }
        return false;
    };
    search(0);
    std::ostringstream note;
    note << "searched conditional trees over " << leaves << " leaves from a pool of "
         << pool_size << " unit values (depth " << depth << "); " << res.candidates_tried
         << " full candidate checks";
    res.note = note.str();
    return res;
}

} // namespace punq
