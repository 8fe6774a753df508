#include "liocell/concurrent.hpp"

#include <fmt/format.h>

namespace liocell {

namespace {

VariantConfig thread_config(Security security, std::uint64_t fuel) {
  VariantConfig v;
  v.calculus = security == Security::Secure ? Calculus::FSAU : Calculus::FS;
  v.security = security;
  v.fuel = fuel;
  v.concurrent = true;
  return v;
}

// Splits `withRefs bag t` back into a thread's bag and term.
void unwrap_scope(Thread& k, Term result) {
  if (result->kind == Kind::WithRefs && result->kids[0]->kind == Kind::Bag) {
    k.bag = result->kids[0];
    k.term = result->kids[1];
  } else {
    k.term = std::move(result);
  }
}

}  // namespace

const char* thread_status_name(ThreadStatus s) {
  switch (s) {
    case ThreadStatus::Done: return "done";
    case ThreadStatus::Stuck: return "stuck";
    case ThreadStatus::Error: return "error";
    case ThreadStatus::Running: return "running";
  }
  return "?";
}

std::string conc_trace_line(const ConcTraceEntry& e) {
  return fmt::format("step={} tid={} rule={} lcur={}", e.step, e.tid, e.rule, to_string(e.lcur));
}

const ThreadResult* ConcOutcome::thread(int tid) const {
  for (const auto& t : threads)
    if (t.tid == tid) return &t;
  return nullptr;
}

Scheduler::Scheduler(Security security, std::uint64_t fuel)
    : machine_(thread_config(security, fuel)), fuel_left_(fuel), budget_(fuel) {}

SchedState Scheduler::initial(const MachineState& init, const Term& main) {
  SchedState s;
  s.fi = init.fi;
  s.fs = init.fs;
  s.next_addr = init.next_addr;
  std::set<Addr> all;
  for (const auto& [a, cell] : init.fs) all.insert(a);
  s.queue.push_back(Thread{0, init.lcur, addrs_inv(all), main});
  return s;
}

bool Scheduler::step(SchedState& s, ConcOutcome& out) {
  if (s.queue.empty()) return false;
  if (fuel_left_ == 0) {
    out.fuel_exhausted = true;
    return false;
  }
  Thread k = std::move(s.queue.front());
  s.queue.pop_front();
  ConcTraceEntry e;
  e.step = ++out.steps;
  e.tid = k.tid;

  auto finish = [&](ThreadStatus st, const char* rule) {
    e.rule = rule;
    e.lcur = k.lcur;
    ThreadResult r;
    r.tid = k.tid;
    r.status = st;
    r.lcur = k.lcur;
    if (st == ThreadStatus::Done) r.value = k.term->kids[0];
    out.threads.push_back(std::move(r));
  };

  if (k.term->kind == Kind::LioVal) {
    --fuel_left_;
    finish(ThreadStatus::Done, "T-done");
  } else if (k.term->kind == Kind::Diverge) {
    --fuel_left_;
    finish(ThreadStatus::Stuck, "T-stuck");
  } else {
    MachineState ms;
    ms.lcur = k.lcur;
    ms.fi = std::move(s.fi);
    ms.fs = std::move(s.fs);
    ms.next_addr = s.next_addr;
    machine_.set_fuel(fuel_left_);
    StepResult r = machine_.step(ms, mk::with_refs(k.bag, k.term));
    fuel_left_ = machine_.fuel_left();
    const MachineState& after = r.kind == StepResult::Kind::Terminal ? r.outcome.state : r.state;
    s.fi = after.fi;
    s.fs = after.fs;
    s.next_addr = after.next_addr;
    k.lcur = after.lcur;
    switch (r.kind) {
      case StepResult::Kind::Next:
        e.inner_rule = r.rule;
        unwrap_scope(k, r.term);
        e.rule = "T-step";
        e.lcur = k.lcur;
        s.queue.push_back(std::move(k));
        break;
      case StepResult::Kind::Fork: {
        e.inner_rule = r.rule;
        unwrap_scope(k, r.term);
        e.rule = "T-fork";
        e.lcur = k.lcur;
        Thread child{s.next_tid++, k.lcur, k.bag, r.forked};
        s.queue.push_back(std::move(k));
        s.queue.push_back(std::move(child));
        break;
      }
      case StepResult::Kind::Terminal: {
        const Outcome& o = r.outcome;
        if (o.kind == OutcomeKind::FuelExhausted) {
          s.queue.push_front(std::move(k));
          --out.steps;
          out.fuel_exhausted = true;
          return false;
        }
        if (o.kind == OutcomeKind::Diverged) {
          finish(ThreadStatus::Stuck, "T-stuck");
          break;
        }
        finish(ThreadStatus::Error, "T-stuck");
        e.inner_rule = o.rule;
        out.threads.back().rule = o.rule;
        out.threads.back().detail = o.detail;
        if (o.detail == "reference outside scope") ++out.out_of_scope_accesses;
        break;
      }
    }
  }
  out.trace.push_back(e);
  if (check_invariant && !check_scope_invariant(s)) out.scope_invariant_held = false;
  if (observer) observer(s, e);
  return true;
}

ConcOutcome Scheduler::run(SchedState s) {
  fuel_left_ = budget_;
  ConcOutcome out;
  while (step(s, out)) {
  }
  if (!s.queue.empty()) out.fuel_exhausted = true;
  out.final = std::move(s);
  return out;
}

bool check_scope_invariant(const SchedState& s) {
  for (const auto& k : s.queue)
    for (Addr a : addrs_plus(s.fs, k.bag)) {
      auto it = s.fs.find(a);
      if (it != s.fs.end() && !flows(it->second.outer, k.lcur)) return false;
    }
  return true;
}

Term delay_term(unsigned n) {
  Term t = mk::ret(mk::unit());
  for (unsigned i = 0; i < n; ++i) t = mk::seq(mk::ret(mk::unit()), t);
  return t;
}

}  // namespace liocell
