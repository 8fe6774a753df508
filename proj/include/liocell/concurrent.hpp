#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "liocell/machine.hpp"

namespace liocell {

struct Thread {
  int tid = 0;
  Label lcur{};
  Term bag;  // canonical bag of FS references
  Term term;
};

struct SchedState {
  FiStore fi;
  FsStore fs;
  Addr next_addr = 1;
  std::deque<Thread> queue;
  int next_tid = 1;
};

enum class ThreadStatus { Done, Stuck, Error, Running };
const char* thread_status_name(ThreadStatus s);

struct ThreadResult {
  int tid = 0;
  ThreadStatus status = ThreadStatus::Running;
  Label lcur{};
  Term value;  // Done only
  std::string rule;    // Error only: rule that failed
  std::string detail;  // Error only
};

struct ConcTraceEntry {
  std::uint64_t step = 0;
  int tid = 0;
  std::string rule;        // T-step, T-done, T-stuck, T-fork
  std::string inner_rule;  // sequential rule that fired, if any
  Label lcur{};
};

std::string conc_trace_line(const ConcTraceEntry& e);

struct ConcOutcome {
  bool fuel_exhausted = false;
  std::vector<ThreadResult> threads;  // in completion order
  SchedState final;                   // residual queue when fuel ran out
  std::vector<ConcTraceEntry> trace;
  std::uint64_t steps = 0;
  bool scope_invariant_held = true;
  // Steps that touched an FS address outside the thread's scope.
  std::uint64_t out_of_scope_accesses = 0;

  const ThreadResult* thread(int tid) const;
};

// Scheduler over sequential threads. `security` picks the store semantics:
// Secure runs fs-au, Naive runs fs with naive writes and no auto-upgrade.
class Scheduler {
 public:
  explicit Scheduler(Security security = Security::Secure, std::uint64_t fuel = 100000);

  // Single-thread initial state: tid 0 scoped to every FS cell of `init`.
  static SchedState initial(const MachineState& init, const Term& main);

  // One quantum. Appends to `out` (trace, finished threads); returns false
  // when the queue is empty or the fuel is gone.
  bool step(SchedState& s, ConcOutcome& out);

  ConcOutcome run(SchedState s);

  // Called after every quantum with the post-step state.
  std::function<void(const SchedState&, const ConcTraceEntry&)> observer;
  bool check_invariant = true;

 private:
  Machine machine_;
  std::uint64_t fuel_left_;
  std::uint64_t budget_;
};

// Every address reachable from a thread's bag has an outer label that flows
// to the thread's current label.
bool check_scope_invariant(const SchedState& s);

// A term that idles for n scheduler quanta before finishing with ().
Term delay_term(unsigned n);

}  // namespace liocell
