#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "liocell/lattice.hpp"
#include "liocell/term.hpp"

namespace liocell {

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, int column, const std::string& message);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

// Parses one surface program. Identifiers naming an element of `lattice`
// are label constants; all other identifiers are variables.
Term parse_program(std::string_view source, const Lattice& lattice);

// Surface rendering; trusted nodes carry a leading '#' (or angle brackets for
// the divergence and bottom markers) so they can never be re-parsed.
std::string pretty(const Term& t);

}  // namespace liocell
