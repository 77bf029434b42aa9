#pragma once

// Prefix (s-expression) text form of scalar fields.
//
//   expr   := number | 'x' | 'y' | 'z'
//           | '(' '+' expr* ')' | '(' '*' expr* ')'
//           | '(' '^' expr integer ')' | '(' 'exp2' expr ')'
//   number := decimal literal, optionally signed, or a ratio such as 1/3
//
// (exp2 p) denotes e^{2p}; p must be a polynomial. Whitespace is insignificant.

#include <string>
#include <string_view>

#include "conjlab/fields.hpp"

namespace conjlab {

/// Parses an expression; throws ParseError with the byte offset of the problem.
ScalarField parse_field(std::string_view text);

/// Renders the normal form. parse_field(render_field(f)) == f for every field.
std::string render_field(const ScalarField& f);

std::string render_polynomial(const Poly3& p);

/// Shortest decimal string that round-trips to the same double.
std::string format_double(double v);

}  // namespace conjlab
