#pragma once

#include "punq/ast.hpp"
#include "punq/checker.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace punq {

/// Dense exact matrix over the amplitude field; rows = 2^k, cols = 2^n for
/// a map on basis indices |i> with big-endian bit order (bit 1 = most
/// significant = first pair component).
struct QMatrix {
    size_t rows = 0, cols = 0;
    std::vector<Amplitude> entries; // row-major

    QMatrix() = default;
    QMatrix(size_t r, size_t c) : rows(r), cols(c), entries(r * c) {}

    Amplitude &at(size_t r, size_t c) { return entries[r * cols + c]; }
    const Amplitude &at(size_t r, size_t c) const { return entries[r * cols + c]; }

    static QMatrix identity(size_t n);
    QMatrix operator*(const QMatrix &o) const;
    /// Kronecker product, left factor on the high-order bits.
    QMatrix tensor(const QMatrix &o) const;
    bool operator==(const QMatrix &o) const;

    std::string to_json() const;
    static QMatrix from_json(const std::string &text);
};

enum class MatrixClass { Unitary, StrictIsometry, Neither };
std::string matrix_class_name(MatrixClass c);

/// Basis index <-> right-nested ket pair term (index bit 1 first).
TermRef ket_term(size_t index, int qubits);
/// Decode a closed value of shape #(B^k) into its 2^k coefficient vector.
std::vector<Amplitude> decode_value(const SupRef &value, int qubits);
SupRef vector_to_sup(const std::vector<Amplitude> &vec, int qubits);

/// Column i is the evaluation of `t |i>`. Throws EvalError on budget
/// exhaustion and std::invalid_argument when a result does not decode at k
/// qubits.
QMatrix extract_matrix(const SupRef &t, int n, int k, long budget = -1);

/// Exact column-orthonormality test.
MatrixClass classify(const QMatrix &m);

/// Builds the nested pair-destructor / conditional-tree program whose
/// column behaviour matches the isometry; rejects non-isometric input.
SupRef synthesize(const QMatrix &m, int n, int k);

/// Checks that `t` acts as `m` on all basis vectors plus `trials` random
/// exactly-normalized field vectors.
bool represents_check(const SupRef &t, const QMatrix &m, int n, int k, int trials,
                      std::mt19937 &rng, long budget = -1);

struct ProbeResult {
    bool found = false;
    SupRef witness;
    long candidates_tried = 0;
    size_t leaf_pool = 0;
    std::string note;
};

/// Bounded exhaustive search over the synthesis grammar for an inhabitant
/// of #(B^n) -o target, where target is either #(B^k) (pass product_split
/// = 0) or #(B^a) x #(B^{k-a}) (pass product_split = a). The coefficient
/// pool depth bounds the leaf alphabet.
ProbeResult probe_uninhabited(int n, int k, int product_split, int depth, OrthoMode mode);

} // namespace punq
