#include <gtest/gtest.h>

#include <random>

#include "liocell/machine.hpp"
#include "liocell/syntax.hpp"

using namespace liocell;

namespace {

const Lattice& lat() { return Lattice::two_point(); }
Label L() { return lat().label("L"); }
Label H() { return lat().label("H"); }
Term parse(const std::string& s) { return parse_program(s, lat()); }

VariantConfig variant(Calculus c, Security sec = Security::Secure) {
  VariantConfig v;
  v.calculus = c;
  v.security = sec;
  v.fuel = 10000;
  return v;
}

MachineState with_fs_cell(Label lcur, Addr a, Label lo, Label ld, Term v) {
  MachineState s = MachineState::initial(lcur);
  s.fs[a] = FsCell{lo, ld, std::move(v)};
  s.next_addr = a + 1;
  return s;
}

}  // namespace

TEST(Machine, GetLabelStep) {
  Machine m(variant(Calculus::Base));
  StepResult r = m.step(MachineState::initial(L()), mk::get_label());
  ASSERT_EQ(r.kind, StepResult::Kind::Next);
  EXPECT_EQ(r.rule, "getLabel");
  EXPECT_TRUE(alpha_equal(r.term, mk::ret(mk::label_const(L()))));
  EXPECT_EQ(r.state.lcur, L());
}

TEST(Machine, UnlabelRaisesCurrentLabel) {
  Machine m(variant(Calculus::Base));
  StepResult r = m.step(MachineState::initial(L()), mk::unlabel(mk::labeled(H(), mk::tru())));
  ASSERT_EQ(r.kind, StepResult::Kind::Next);
  EXPECT_EQ(r.rule, "unlabel");
  EXPECT_EQ(r.state.lcur, H());
  EXPECT_TRUE(alpha_equal(r.term, mk::ret(mk::tru())));
}

TEST(Machine, SecureFailedWriteTaintsThenDiverges) {
  Machine m(variant(Calculus::FS));
  MachineState s = with_fs_cell(H(), 1, L(), L(), mk::tru());
  Term t = mk::write_ref(Flavor::FS, mk::ref_fs(1), mk::fls());
  StepResult r = m.step(s, t);
  ASSERT_EQ(r.kind, StepResult::Kind::Next);
  EXPECT_EQ(r.rule, "writeRef-FS-fail");
  EXPECT_TRUE(alpha_equal(r.term, mk::unlabel(mk::labeled(L(), mk::diverge()))));
  Outcome o = m.run(s, t);
  EXPECT_EQ(o.kind, OutcomeKind::Diverged);
  EXPECT_EQ(o.state.lcur, H());
  EXPECT_EQ(o.state.fs.at(1).value->kind, Kind::True);
}

TEST(Machine, NaiveWriteRaisesInnerLabel) {
  Machine m(variant(Calculus::FS, Security::Naive));
  MachineState s = with_fs_cell(H(), 1, L(), L(), mk::tru());
  Outcome o = m.run(s, mk::write_ref(Flavor::FS, mk::ref_fs(1), mk::fls()));
  ASSERT_EQ(o.kind, OutcomeKind::Value);
  EXPECT_EQ(o.value->kind, Kind::Unit);
  const FsCell& c = o.state.fs.at(1);
  EXPECT_EQ(c.outer, L());
  EXPECT_EQ(c.inner, H());
  EXPECT_EQ(c.value->kind, Kind::False);
}

TEST(Machine, PermissivenessTest) {
  Term t = parse(
      "(do (r <- (newRef fs H (unit))) (readRef fs (var r)) (writeRef fs (var r) (unit)))");
  Machine m(variant(Calculus::FS));
  Outcome o = m.run(MachineState::initial(L()), t);
  ASSERT_EQ(o.kind, OutcomeKind::Value);
  EXPECT_EQ(o.value->kind, Kind::Unit);
  EXPECT_EQ(o.state.lcur, H());

  VariantConfig split = variant(Calculus::FS);
  split.split_write_check = true;
  Machine ms(split);
  EXPECT_EQ(ms.run(MachineState::initial(L()), t).kind, OutcomeKind::Diverged);
}

TEST(Machine, LabelCheckFailuresAreMonitorErrors) {
  Machine m(variant(Calculus::FI));
  MachineState hs = MachineState::initial(H());
  Outcome o = m.run(hs, parse("(label L (bool true))"));
  EXPECT_EQ(o.kind, OutcomeKind::MonitorError);
  EXPECT_EQ(o.error, ErrorKind::LabelCheck);
  EXPECT_EQ(o.rule, "label");
  EXPECT_EQ(m.run(hs, parse("(newRef fi L (unit))")).rule, "newRef-FI");
  EXPECT_EQ(m.run(hs, parse("(toLabeled L (return (unit)))")).rule, "toLabeled");
}

TEST(Machine, ToLabeledRestoresLabelAndKeepsStores) {
  Term t = parse(
      "(do (x <- (toLabeled H (do (r <- (newRef fs H (bool true)))"
      "                           (unlabel (var hv))"
      "                           (return (var r)))))"
      "    (getLabel))");
  t = mk::app(mk::lam("hv", t), mk::labeled(H(), mk::tru()));
  Machine m(variant(Calculus::FS));
  Outcome o = m.run(MachineState::initial(L()), t);
  ASSERT_EQ(o.kind, OutcomeKind::Value) << o.detail;
  EXPECT_EQ(o.value->label, L());
  EXPECT_EQ(o.state.fs.size(), 1u);
}

TEST(Machine, ToLabeledResultMustFlow) {
  Term t = mk::to_labeled(mk::label_const(L()), mk::unlabel(mk::labeled(H(), mk::tru())));
  Machine m(variant(Calculus::Base));
  Outcome o = m.run(MachineState::initial(L()), t);
  EXPECT_EQ(o.kind, OutcomeKind::MonitorError);
  EXPECT_EQ(o.error, ErrorKind::LabelCheck);
}

TEST(Machine, ForkOutsideConcurrentRuntimeIsError) {
  Machine m(variant(Calculus::FS));
  Outcome o = m.run(MachineState::initial(L()), parse("(fork (return (unit)))"));
  EXPECT_EQ(o.kind, OutcomeKind::MonitorError);
  EXPECT_EQ(o.rule, "forkLIO");
}

TEST(Machine, FuelExhaustedIsDistinct) {
  Term loop = parse("(fix (lam f (seq (return (unit)) (var f))))");
  VariantConfig v = variant(Calculus::Base);
  v.fuel = 50;
  Machine m(v);
  EXPECT_EQ(m.run(MachineState::initial(L()), loop).kind, OutcomeKind::FuelExhausted);
}

TEST(Machine, UpgradeStoreSingleCell) {
  MachineState s = with_fs_cell(L(), 1, L(), L(), mk::unit());
  Outcome o = upgrade_store(s, H());
  ASSERT_EQ(o.kind, OutcomeKind::Value);
  EXPECT_EQ(o.state.fs.at(1).outer, L());
  EXPECT_EQ(o.state.fs.at(1).inner, H());
}

TEST(Machine, UpgradeStoreEmptyAndTwoCells) {
  MachineState empty = MachineState::initial(L());
  Outcome o = upgrade_store(empty, H());
  ASSERT_EQ(o.kind, OutcomeKind::Value);
  EXPECT_TRUE(o.state.fs.empty());

  MachineState s = with_fs_cell(L(), 1, L(), L(), mk::unit());
  s.fs[2] = FsCell{L(), L(), mk::tru()};
  o = upgrade_store(s, H());
  ASSERT_EQ(o.kind, OutcomeKind::Value);
  EXPECT_EQ(o.state.fs.at(1).inner, H());
  EXPECT_EQ(o.state.fs.at(2).inner, H());
}

TEST(Machine, UpgradeStorePremiseFailure) {
  MachineState s = with_fs_cell(H(), 1, L(), L(), mk::unit());
  Outcome o = upgrade_store(s, H());
  EXPECT_EQ(o.kind, OutcomeKind::MonitorError);
  EXPECT_EQ(o.error, ErrorKind::LabelCheck);
  EXPECT_EQ(o.rule, "upgradeRef");
}

TEST(Machine, AutoUpgradeOnUnlabel) {
  MachineState s = with_fs_cell(L(), 1, L(), L(), mk::unit());
  Machine m(variant(Calculus::FSAU));
  StepResult r = m.step(s, mk::unlabel(mk::labeled(H(), mk::tru())));
  ASSERT_EQ(r.kind, StepResult::Kind::Next);
  EXPECT_EQ(r.rule, "unlabel-au");
  EXPECT_EQ(r.state.lcur, H());
  EXPECT_EQ(r.state.fs.at(1).inner, H());
}

TEST(Machine, DowngradeDestroysValue) {
  MachineState s = with_fs_cell(L(), 1, L(), H(), mk::tru());
  Machine m(variant(Calculus::FS));
  Outcome o = m.run(s, mk::downgrade(mk::ref_fs(1), mk::label_const(L())));
  ASSERT_EQ(o.kind, OutcomeKind::Value);
  EXPECT_EQ(o.state.fs.at(1).inner, L());
  EXPECT_EQ(o.state.fs.at(1).value->kind, Kind::Diverge);
  EXPECT_EQ(m.run(o.state, mk::read_ref(Flavor::FS, mk::ref_fs(1))).kind, OutcomeKind::Diverged);
}

TEST(Machine, WithRefsScopesStore) {
  MachineState s = with_fs_cell(L(), 1, L(), L(), mk::tru());
  s.fs[2] = FsCell{L(), L(), mk::fls()};
  s.next_addr = 3;
  Machine m(variant(Calculus::FS));
  Term in_scope = mk::with_refs(mk::bag({mk::ref_fs(1)}), mk::read_ref(Flavor::FS, mk::ref_fs(1)));
  StepResult r = m.step(s, in_scope);
  ASSERT_EQ(r.kind, StepResult::Kind::Next);
  EXPECT_EQ(r.rule, "withRefs-Ctx(readRef-FS)");
  Outcome o = m.run(s, in_scope);
  ASSERT_EQ(o.kind, OutcomeKind::Value);
  EXPECT_EQ(o.value->kind, Kind::True);
  EXPECT_EQ(o.state.fs.size(), 2u);

  Term out_of_scope =
      mk::with_refs(mk::bag({mk::ref_fs(1)}), mk::read_ref(Flavor::FS, mk::ref_fs(2)));
  o = m.run(s, out_of_scope);
  EXPECT_EQ(o.kind, OutcomeKind::MonitorError);
  EXPECT_EQ(o.error, ErrorKind::StuckRedex);
}

TEST(Machine, WithRefsAllocationsJoinBag) {
  Machine m(variant(Calculus::FS));
  Term t = mk::with_refs(mk::bag({}), mk::new_ref(Flavor::FS, mk::label_const(L()), mk::unit()));
  StepResult r = m.step(MachineState::initial(L()), t);
  ASSERT_EQ(r.kind, StepResult::Kind::Next);
  ASSERT_EQ(r.term->kind, Kind::WithRefs);
  EXPECT_EQ(addrs(r.term->kids[0]), std::set<Addr>{1});
}

TEST(StoreHelpers, AddrsAndMerge) {
  EXPECT_TRUE(addrs(mk::bag({})).empty());
  FsStore mu;
  mu[1] = FsCell{L(), L(), mk::ref_fs(2)};
  mu[2] = FsCell{L(), L(), mk::tru()};
  EXPECT_TRUE(addrs_plus(mu, mk::tru()).empty());
  EXPECT_EQ(addrs_plus(mu, mk::ref_fs(1)), (std::set<Addr>{1, 2}));
  EXPECT_EQ(pretty(addrs_inv({3, 1})), "(bag #(Ref fs 1) #(Ref fs 3))");

  FsStore left{{1, FsCell{L(), L(), mk::tru()}}};
  FsStore right{{1, FsCell{L(), L(), mk::fls()}}, {2, FsCell{L(), H(), mk::unit()}}};
  FsStore merged = merge_stores(left, right);
  EXPECT_EQ(merged.size(), 2u);
  EXPECT_EQ(merged.at(1).value->kind, Kind::True);
  EXPECT_TRUE(merge_stores({}, right).size() == 2u);
}

// The FS write succeeds exactly when lcur flows to lo join ld.
TEST(Machine, WritePermissivenessBruteForce) {
  std::mt19937 rng(7);
  std::vector<Label> labels{L(), H()};
  Machine m(variant(Calculus::FS));
  for (int trial = 0; trial < 200; ++trial) {
    Label lcur = labels[rng() % 2], lo = labels[rng() % 2], ld = labels[rng() % 2];
    MachineState s = with_fs_cell(lcur, 1, lo, ld, mk::tru());
    for (Addr extra = 2; extra < 2 + rng() % 3; ++extra)
      s.fs[extra] = FsCell{labels[rng() % 2], labels[rng() % 2], mk::unit()};
    s.next_addr = 10;
    StepResult r = m.step(s, mk::write_ref(Flavor::FS, mk::ref_fs(1), mk::fls()));
    bool premise = flows(lcur, join(lo, ld));
    EXPECT_EQ(r.rule == "writeRef-FS", premise);
    EXPECT_EQ(r.rule == "writeRef-FS-fail", !premise);
  }
}

TEST(Machine, Determinism) {
  Term t = parse(
      "(do (r <- (newRef fs L (bool true))) (x <- (readRef fs (var r)))"
      "    (upgrade (var r) H) (labelOfRef fs (var r)))");
  Machine a(variant(Calculus::FSAU)), b(variant(Calculus::FSAU));
  std::vector<std::string> ta, tb;
  a.run(MachineState::initial(L()), t, [&](auto n, auto& rule, auto& st, auto& term) {
    ta.push_back(trace_line(n, rule, st.lcur, term));
  });
  b.run(MachineState::initial(L()), t, [&](auto n, auto& rule, auto& st, auto& term) {
    tb.push_back(trace_line(n, rule, st.lcur, term));
  });
  EXPECT_EQ(ta, tb);
  EXPECT_FALSE(ta.empty());
}

TEST(Machine, TraceLineFormat) {
  EXPECT_EQ(trace_line(3, "getLabel", L(), mk::ret(mk::label_const(L()))),
            "step=3 rule=getLabel lcur=L term=(return L)");
  std::string long_line = trace_line(1, "x", L(), parse(
      "(do (a <- (return (bool true))) (b <- (return (bool true))) (c <- (return (bool true)))"
      " (d <- (return (bool true))) (return (var a)))"));
  EXPECT_EQ(long_line.size(), std::string("step=1 rule=x lcur=L term=").size() + 120);
}
