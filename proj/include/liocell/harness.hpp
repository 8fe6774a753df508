#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "liocell/concurrent.hpp"
#include "liocell/machine.hpp"

namespace liocell {

// ------------------------------------------------------------------ erasure

// The hole left where information above the observation level was.
Term hole();
bool is_hole(const Term& t);

// Replaces the payload of every labeled value above `level` with a hole.
Term erase_term(const Term& t, Label level);

// A configuration as seen by an observer at some level. Visible cells are
// renumbered 1..n in allocation order, so runs that allocated different
// numbers of hidden cells still line up; references to hidden cells point
// at address 0.
struct ErasedConfig {
  bool hidden = false;  // lcur above the level: the term is a hole
  MachineState state;
  Term term;
};

ErasedConfig erase(const MachineState& s, const Term& t, Label level);
bool operator==(const ErasedConfig& a, const ErasedConfig& b);
std::string describe(const ErasedConfig& e);

struct ErasedThread {
  Label lcur;
  Term bag;
  Term term;
};

struct ErasedSched {
  std::vector<ErasedThread> threads;  // only threads at or below the level
  MachineState store;
};

ErasedSched erase(const SchedState& s, Label level);
bool operator==(const ErasedSched& a, const ErasedSched& b);
std::string describe(const ErasedSched& e);

bool l_equiv(const Term& a, const Term& b, Label level);
bool l_equiv(const MachineState& sa, const Term& a, const MachineState& sb, const Term& b,
             Label level);

// --------------------------------------------------------------- generation

struct GenOptions {
  Calculus calculus = Calculus::FS;
  bool concurrent = false;       // fork, no toLabeled, no refs stored in cells
  bool attack_templates = false;  // splice in label-channel probes
  std::size_t max_size = 80;      // term_size bound
};

// A closed, well-typed program and two initial states that differ only in
// cells above L.
struct GenCase {
  std::uint64_t seed = 0;
  Term term;
  MachineState first;
  MachineState second;
};

GenCase gen_program(std::uint64_t seed, const GenOptions& opts);

// ------------------------------------------------------------------- trials

enum class TrialVerdict { Pass, Inconclusive, Counterexample };
const char* verdict_name(TrialVerdict v);

struct TrialResult {
  TrialVerdict verdict = TrialVerdict::Pass;
  std::string detail;
  Term witness;  // shrunk program on a counterexample
  bool scope_invariant_held = true;
  std::uint64_t out_of_scope_accesses = 0;
  std::uint64_t observed_steps = 0;  // TSNI: distinct L-visible states compared
};

// Termination-insensitive: only pairs of terminating runs are compared.
TrialResult tini_trial(const Term& t, const MachineState& s1, const MachineState& s2,
                       const VariantConfig& cfg, bool shrink = true);

// Termination-sensitive, concurrent: the sequences of distinct L-erased
// scheduler states must agree (one may be a prefix when fuel runs out).
TrialResult tsni_trial(const Term& t, const MachineState& s1, const MachineState& s2,
                       Security security, std::uint64_t fuel, bool shrink = true);

// Smallest-first subterm replacement that keeps the program well-typed and
// `still_fails` true.
Term shrink_program(const Term& t, const MachineState& s,
                    const std::function<bool(const Term&)>& still_fails);

// ------------------------------------------------------------------ attacks

struct Attack {
  std::string name;
  std::string title;
  std::string source;  // free variables: href (and delay when concurrent)
  bool concurrent = false;
};

std::vector<Attack> attack_corpus();

// The secret sits in a cell with label-on-label L and label H.
Term instantiate_attack(const Attack& a, unsigned delay);
MachineState attack_state(bool secret);

struct AttackRun {
  std::string attack;
  std::string mode;  // calculus/security description
  bool leaked = false;
  bool blocked = false;
  std::string outcomes[2];  // per secret value (false, true)
};

// Sequential attacks run under `calculus`; concurrent ones always use the
// scheduler (secure = fs-au).
AttackRun run_attack(const Attack& a, Calculus calculus, Security security, unsigned delay = 32,
                     std::uint64_t fuel = 100000);

}  // namespace liocell
