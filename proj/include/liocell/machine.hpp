#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "liocell/state.hpp"
#include "liocell/term.hpp"

namespace liocell {

enum class Calculus { Base, FI, FS, FSAU };
enum class Security { Secure, Naive };

struct VariantConfig {
  Calculus calculus = Calculus::FS;
  Security security = Security::Secure;
  std::uint64_t fuel = 100000;
  // Test-only: check the FS write as lcur <= lo and lcur <= ld separately.
  bool split_write_check = false;
  // Set by the scheduler: forkLIO is enabled and toLabeled is struck out.
  bool concurrent = false;
};

const char* calculus_name(Calculus c);
const char* security_name(Security s);

enum class OutcomeKind { Value, Diverged, MonitorError, FuelExhausted };
enum class ErrorKind { LabelCheck, StuckRedex };

const char* outcome_name(OutcomeKind k);
const char* error_name(ErrorKind k);

struct Outcome {
  OutcomeKind kind = OutcomeKind::Value;
  Term value;  // payload of the final LIO value; the stuck/divergent term otherwise
  MachineState state;
  ErrorKind error = ErrorKind::StuckRedex;
  std::string rule;    // rule that failed (MonitorError only)
  std::string detail;  // failed check, human readable
  std::uint64_t steps = 0;
};

struct StepResult {
  enum class Kind { Next, Terminal, Fork };
  Kind kind = Kind::Next;
  Term term;
  MachineState state;
  std::string rule;
  Term forked;      // Fork only
  Outcome outcome;  // Terminal only
};

using TraceSink = std::function<void(std::uint64_t step, const std::string& rule,
                                     const MachineState& state, const Term& term)>;

// Formats one trace line: step=<n> rule=<r> lcur=<l> term=<pretty, max 120 chars>.
std::string trace_line(std::uint64_t step, const std::string& rule, Label lcur, const Term& term);

class Machine {
 public:
  explicit Machine(VariantConfig cfg);

  const VariantConfig& config() const { return cfg_; }

  // Fuel shared by top-level steps and nested sub-evaluations.
  std::uint64_t fuel_left() const { return fuel_left_; }
  void set_fuel(std::uint64_t fuel) { fuel_left_ = fuel; }

  // One small step. Consumes one unit of fuel (plus any used by sub-evaluations).
  StepResult step(const MachineState& state, const Term& term);

  // Runs to a terminal outcome. Resets the fuel budget to config().fuel.
  Outcome run(MachineState state, Term term, const TraceSink& trace = {});

  // Observes every successful flow-insensitive write (address, stored value).
  std::function<void(Addr, const Term&)> on_fi_write;

  // Result of one reduction attempt; defined in the implementation.
  struct Reduction;

 private:
  Reduction reduce(const Term& t, MachineState& s);
  Reduction reduce_kid(const Term& t, std::size_t i, MachineState& s);
  Reduction stuck(const Term& at, const std::string& why);
  Reduction label_error(const std::string& rule, const std::string& check);
  Reduction unlabel_rule(const Term& labeled, MachineState& s);
  Reduction with_refs(const Term& t, MachineState& s);
  Reduction to_labeled(const Term& t, MachineState& s);
  Reduction fs_write(const Term& t, MachineState& s);
  // Runs `t` to a value under `s`; returns the terminal outcome.
  Outcome sub_run(MachineState s, Term t);
  bool allows_fi() const;
  bool allows_fs() const;

  VariantConfig cfg_;
  std::uint64_t fuel_left_;
};

// Applies the upgradeRef rule to every FS address of `state` in ascending order.
// Returns the MonitorError outcome on the first failed premise.
Outcome upgrade_store(const MachineState& state, Label l);

// Evaluates the pure redexes of a returned payload (call-by-name leaves
// them unevaluated) and recurses under labeled values, bags and wrappers.
Term normalize_value(const Term& v, std::uint64_t fuel = 10000);

// Prints a value the way the CLI does: (), True/False, otherwise pretty.
std::string display_value(const Term& v);

}  // namespace liocell
