#pragma once

#include "punq/ast.hpp"
#include "punq/types.hpp"

#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace punq {

struct ParseError : std::runtime_error {
    int line, col;
    ParseError(const std::string &msg, int l, int c)
        : std::runtime_error(msg + " at " + std::to_string(l) + ":" + std::to_string(c)), line(l), col(c) {}
};

/// One `def name : Type = body;` item.
struct Def {
    std::string name;
    TypeRef declared;
    SupRef body;
};

struct Program {
    std::vector<Def> defs;
    const Def *find(const std::string &name) const;
};

/// Parse a superposition. Free variables must come from `allowed_free`
/// (definition names or context variables); anything else is an
/// unbound-variable error.
SupRef parse_sup(const std::string &source, const std::set<std::string> &allowed_free = {});

TypeRef parse_type(const std::string &source);
Amplitude parse_amplitude(const std::string &source);

/// Parse a `.punq` file: a sequence of defs; later defs may reference
/// earlier ones.
Program parse_program(const std::string &source);
Program parse_program_file(const std::string &path);

/// Inline all definition references into the body of def `name`
/// (defaulting to the last def), producing a closed superposition.
SupRef inline_defs(const Program &prog, const std::string &name = "main");
/// Inline definition references appearing in an arbitrary superposition.
SupRef inline_defs_into(const Program &prog, SupRef s);

} // namespace punq
