#pragma once

#include <map>
#include <set>
#include <vector>

#include "liocell/lattice.hpp"
#include "liocell/term.hpp"

namespace liocell {

// Flow-insensitive cell: Lb l v.
struct FiCell {
  Label label;
  Term value;
};

// Flow-sensitive cell: Lb outer (Lb inner v). `outer` is the label on the
// label, fixed at allocation.
struct FsCell {
  Label outer;
  Label inner;
  Term value;
};

using FiStore = std::map<Addr, FiCell>;
using FsStore = std::map<Addr, FsCell>;

struct MachineState {
  Label lcur{};
  FiStore fi;
  FsStore fs;
  // Shared by both stores so their domains stay disjoint.
  Addr next_addr = 1;

  static MachineState initial(Label lcur) {
    MachineState s;
    s.lcur = lcur;
    return s;
  }
};

// Left-preferential union: entries of `left` win on shared addresses.
FsStore merge_stores(const FsStore& left, const FsStore& right);

// Top-level addresses of a bag value.
std::set<Addr> addrs(const Term& bag);
// Canonical bag (sorted by address) for a set of FS addresses.
Term addrs_inv(const std::set<Addr>& as);
// Closure of FS addresses reachable from v through the store.
std::set<Addr> addrs_plus(const FsStore& mu, const Term& v);

}  // namespace liocell
