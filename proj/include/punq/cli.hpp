#pragma once

#include "punq/ast.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace punq {

/// Church numeral \f.\x. f^n x.
SupRef church_numeral(long n);

/// Entry point shared by the binary and the tests. Exit codes: 0 success,
/// 1 type rejection, 2 runtime/budget failure, 3 usage, 4 I/O.
int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

} // namespace punq
