#include <gtest/gtest.h>

#include "liocell/concurrent.hpp"
#include "liocell/syntax.hpp"

using namespace liocell;

namespace {

const Lattice& lat() { return Lattice::two_point(); }
Label L() { return lat().label("L"); }
Label H() { return lat().label("H"); }

const char* kForkLeak =
    "(do (tmp <- (newRef fs L (unit)))"
    "    (fork (do (h <- (readRef fs (var href)))"
    "              (when (var h) (writeRef fs (var tmp) (unit)))))"
    "    (var delay)"
    "    (l <- (labelOfRef fs (var tmp)))"
    "    (return (lop flows H (var l))))";

ConcOutcome run_fork_leak(Security sec, bool secret) {
  MachineState init = MachineState::initial(L());
  init.fs[1] = FsCell{L(), H(), mk::boolean(secret)};
  init.next_addr = 2;
  Term t = parse_program(kForkLeak, lat());
  t = subst(subst(t, "href", mk::ref_fs(1)), "delay", delay_term(32));
  Scheduler sched(sec, 10000);
  return sched.run(Scheduler::initial(init, t));
}

}  // namespace

TEST(Concurrent, ValueThreadIsRemoved) {
  Scheduler sched;
  SchedState s = Scheduler::initial(MachineState::initial(L()), mk::lio(mk::unit()));
  ConcOutcome out;
  EXPECT_TRUE(sched.step(s, out));
  EXPECT_TRUE(s.queue.empty());
  ASSERT_EQ(out.trace.size(), 1u);
  EXPECT_EQ(out.trace[0].rule, "T-done");
  EXPECT_EQ(conc_trace_line(out.trace[0]), "step=1 tid=0 rule=T-done lcur=L");
}

TEST(Concurrent, ForkAppendsParentThenChild) {
  MachineState init = MachineState::initial(H());
  init.fs[1] = FsCell{L(), L(), mk::unit()};
  init.next_addr = 2;
  Scheduler sched;
  SchedState s = Scheduler::initial(init, mk::fork(mk::ret(mk::unit())));
  ConcOutcome out;
  ASSERT_TRUE(sched.step(s, out));
  EXPECT_EQ(out.trace[0].rule, "T-fork");
  ASSERT_EQ(s.queue.size(), 2u);
  EXPECT_EQ(s.queue[0].tid, 0);
  EXPECT_TRUE(alpha_equal(s.queue[0].term, mk::ret(mk::unit())));
  EXPECT_EQ(s.queue[1].tid, 1);
  EXPECT_EQ(s.queue[1].lcur, H());
  EXPECT_TRUE(alpha_equal(s.queue[1].bag, s.queue[0].bag));
  EXPECT_EQ(addrs(s.queue[1].bag), std::set<Addr>{1});
}

TEST(Concurrent, NestedScopesIntersect) {
  MachineState init = MachineState::initial(L());
  init.fs[1] = FsCell{L(), L(), mk::tru()};
  init.fs[2] = FsCell{L(), L(), mk::fls()};
  init.next_addr = 3;
  Term body = mk::with_refs(mk::bag({mk::ref_fs(1), mk::ref_fs(2)}),
                            mk::read_ref(Flavor::FS, mk::ref_fs(1)));
  SchedState s = Scheduler::initial(init, body);
  s.queue[0].bag = mk::bag({mk::ref_fs(1)});
  Scheduler sched;
  ConcOutcome out;
  ASSERT_TRUE(sched.step(s, out));
  EXPECT_EQ(out.trace[0].inner_rule.rfind("withRefs-Opt(", 0), 0u) << out.trace[0].inner_rule;
  EXPECT_EQ(addrs(s.queue[0].bag), std::set<Addr>{1});
}

TEST(Concurrent, ToLabeledIsRejected) {
  Scheduler sched;
  Term t = mk::to_labeled(mk::label_const(H()), mk::ret(mk::unit()));
  ConcOutcome out = sched.run(Scheduler::initial(MachineState::initial(L()), t));
  ASSERT_EQ(out.threads.size(), 1u);
  EXPECT_EQ(out.threads[0].status, ThreadStatus::Error);
  EXPECT_EQ(out.threads[0].rule, "toLabeled");
}

TEST(Concurrent, SingleThreadMatchesSequential) {
  Term t = parse_program(
      "(do (r <- (newRef fs H (unit))) (readRef fs (var r)) (writeRef fs (var r) (unit)))", lat());
  Scheduler sched;
  ConcOutcome out = sched.run(Scheduler::initial(MachineState::initial(L()), t));
  VariantConfig v;
  v.calculus = Calculus::FSAU;
  Outcome seq = Machine(v).run(MachineState::initial(L()), t);
  ASSERT_EQ(out.threads.size(), 1u);
  EXPECT_EQ(out.threads[0].status, ThreadStatus::Done);
  EXPECT_EQ(out.threads[0].lcur, seq.state.lcur);
  EXPECT_EQ(out.final.fs.at(1).outer, seq.state.fs.at(1).outer);
  EXPECT_EQ(out.final.fs.at(1).inner, seq.state.fs.at(1).inner);
  EXPECT_TRUE(out.scope_invariant_held);
}

TEST(Concurrent, NaiveForkAttackLeaks) {
  for (bool secret : {false, true}) {
    ConcOutcome out = run_fork_leak(Security::Naive, secret);
    const ThreadResult* main = out.thread(0);
    ASSERT_NE(main, nullptr);
    ASSERT_EQ(main->status, ThreadStatus::Done);
    EXPECT_EQ(main->lcur, L());
    EXPECT_EQ(normalize_value(main->value)->kind, secret ? Kind::True : Kind::False);
  }
}

TEST(Concurrent, SecureForkAttackIsBlocked) {
  ConcOutcome a = run_fork_leak(Security::Secure, false);
  ConcOutcome b = run_fork_leak(Security::Secure, true);
  const ThreadResult* ma = a.thread(0);
  const ThreadResult* mb = b.thread(0);
  ASSERT_NE(ma, nullptr);
  ASSERT_NE(mb, nullptr);
  ASSERT_EQ(ma->status, ThreadStatus::Done);
  ASSERT_EQ(mb->status, ThreadStatus::Done);
  EXPECT_EQ(ma->lcur, mb->lcur);
  EXPECT_EQ(normalize_value(ma->value)->kind, normalize_value(mb->value)->kind);
  EXPECT_TRUE(a.scope_invariant_held);
  EXPECT_TRUE(b.scope_invariant_held);
}

TEST(Concurrent, SchedulerIsDeterministic) {
  ConcOutcome a = run_fork_leak(Security::Secure, true);
  ConcOutcome b = run_fork_leak(Security::Secure, true);
  ASSERT_EQ(a.trace.size(), b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i)
    EXPECT_EQ(conc_trace_line(a.trace[i]), conc_trace_line(b.trace[i]));
}

TEST(Concurrent, ChildStartsWithParentLabel) {
  ConcOutcome out = run_fork_leak(Security::Secure, true);
  Label at_fork{};
  bool seen = false;
  for (const auto& e : out.trace)
    if (e.rule == "T-fork") {
      at_fork = e.lcur;
      seen = true;
    } else if (seen && e.tid == 1) {
      // First step of the child can only raise its label from the parent's.
      EXPECT_TRUE(flows(at_fork, e.lcur));
      break;
    }
  EXPECT_TRUE(seen);
}

TEST(Concurrent, FuelExhaustionKeepsQueue) {
  Term loop = parse_program("(fix (lam f (seq (return (unit)) (var f))))", lat());
  Scheduler sched(Security::Secure, 40);
  ConcOutcome out = sched.run(Scheduler::initial(MachineState::initial(L()), loop));
  EXPECT_TRUE(out.fuel_exhausted);
  EXPECT_EQ(out.final.queue.size(), 1u);
}

TEST(Concurrent, ScopeInvariantDetectsViolation) {
  SchedState s;
  s.fs[1] = FsCell{H(), H(), mk::unit()};
  s.queue.push_back(Thread{0, L(), mk::bag({mk::ref_fs(1)}), mk::ret(mk::unit())});
  EXPECT_FALSE(check_scope_invariant(s));
  s.queue[0].lcur = H();
  EXPECT_TRUE(check_scope_invariant(s));
}
