#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "liocell/machine.hpp"

namespace liocell {

class EmbedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Translates a flow-sensitive program into the flow-insensitive calculus.
// Each FS reference becomes an FI reference (labelled l_o) to an FI
// reference (labelled l_d) holding the value. `sigma` supplies l_o for
// reference literals; throws EmbedError for an address it lacks.
Term embed_term(const Term& t, const MachineState& sigma);

// The matching state translation: FS cell a becomes a -> Lb lo (Ref_fi ld b)
// and b -> Lb ld v, with fresh b drawn in ascending order of a.
MachineState embed_state(const MachineState& sigma);

// True if t still uses any flow-sensitive construct.
bool contains_fs_syntax(const Term& t);

struct CoSimReport {
  bool match = false;
  std::string reason;  // first disagreement
  Outcome fs;
  Outcome fi;
  std::vector<std::string> fs_trace;
  std::vector<std::string> fi_trace;
};

// Runs t in the secure FS engine and its translation in the FI engine, then
// checks that both end the same way with equal lcur, values and stores (up to
// an address renaming found by walking both results in parallel).
CoSimReport cosimulate(const Term& t, const MachineState& sigma, std::uint64_t fuel = 20000,
                       bool keep_traces = false);

}  // namespace liocell
