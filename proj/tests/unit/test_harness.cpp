#include <gtest/gtest.h>

#include "liocell/harness.hpp"
#include "liocell/syntax.hpp"
#include "liocell/typecheck.hpp"

using namespace liocell;

namespace {

const Lattice& lat() { return Lattice::two_point(); }
Label L() { return lat().label("L"); }
Label H() { return lat().label("H"); }

bool well_typed(const GenCase& g) {
  try {
    typecheck(store_typing(g.first), {}, g.term);
    typecheck(store_typing(g.second), {}, g.term);
    return true;
  } catch (const TypeError&) {
    return false;
  }
}

}  // namespace

TEST(Erasure, HidesHighPayloadOnly) {
  Term t = mk::ret(mk::labeled(H(), mk::tru()));
  EXPECT_TRUE(is_hole(erase_term(t, L())->kids[0]->kids[0]));
  EXPECT_TRUE(alpha_equal(erase_term(t, H()), t));
  Term low = mk::labeled(L(), mk::fls());
  EXPECT_TRUE(alpha_equal(erase_term(low, L()), low));
}

TEST(Erasure, Idempotent) {
  Term t = mk::bag({});
  t = mk::app(mk::labeled(H(), mk::labeled(L(), mk::tru())), mk::labeled(L(), mk::unit()));
  Term once = erase_term(t, L());
  EXPECT_TRUE(alpha_equal(erase_term(once, L()), once));
}

TEST(Erasure, LEquivalenceIsAnEquivalence) {
  Term a = mk::labeled(H(), mk::tru()), b = mk::labeled(H(), mk::fls()),
       c = mk::labeled(L(), mk::tru());
  EXPECT_TRUE(l_equiv(a, a, L()));
  EXPECT_TRUE(l_equiv(a, b, L()) && l_equiv(b, a, L()));
  EXPECT_FALSE(l_equiv(a, c, L()));
  EXPECT_FALSE(l_equiv(a, b, H()));
}

TEST(Erasure, StoresRenumberVisibleCells) {
  MachineState s1 = MachineState::initial(L()), s2 = s1;
  s1.fi[1] = FiCell{H(), mk::tru()};
  s1.fs[2] = FsCell{L(), L(), mk::ref_fs(2)};
  s2.fs[5] = FsCell{L(), L(), mk::ref_fs(5)};
  ErasedConfig e1 = erase(s1, mk::ref_fs(2), L()), e2 = erase(s2, mk::ref_fs(5), L());
  EXPECT_TRUE(e1 == e2) << describe(e1) << "\n" << describe(e2);
  EXPECT_EQ(e1.state.fs.count(1), 1u);
}

TEST(Erasure, HighInnerLabelHidesValue) {
  MachineState s1 = MachineState::initial(L()), s2 = s1;
  s1.fs[1] = FsCell{L(), H(), mk::tru()};
  s2.fs[1] = FsCell{L(), H(), mk::fls()};
  EXPECT_TRUE(l_equiv(s1, mk::unit(), s2, mk::unit(), L()));
  s2.fs[1].inner = L();
  EXPECT_FALSE(l_equiv(s1, mk::unit(), s2, mk::unit(), L()));
}

TEST(Erasure, HiddenConfigStillComparesStores) {
  MachineState s1 = MachineState::initial(H()), s2 = s1;
  EXPECT_TRUE(l_equiv(s1, mk::tru(), s2, mk::fls(), L()));
  s1.fs[1] = FsCell{L(), L(), mk::tru()};
  s2.fs[1] = FsCell{L(), L(), mk::fls()};
  EXPECT_FALSE(l_equiv(s1, mk::tru(), s2, mk::tru(), L()));
}

TEST(Generator, DeterministicWellTypedAndLEquivalent) {
  for (Calculus c : {Calculus::FI, Calculus::FS, Calculus::FSAU}) {
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
      GenOptions o;
      o.calculus = c;
      o.attack_templates = seed % 2 == 0;
      GenCase g = gen_program(seed, o), again = gen_program(seed, o);
      EXPECT_TRUE(alpha_equal(g.term, again.term));
      EXPECT_TRUE(well_typed(g)) << pretty(g.term);
      EXPECT_LE(term_size(g.term), o.max_size);
      EXPECT_TRUE(free_vars(g.term).empty()) << pretty(g.term);
      EXPECT_TRUE(l_equiv(g.first, g.term, g.second, g.term, L()));
    }
  }
}

TEST(Generator, ConcurrentProgramsAvoidToLabeled) {
  GenOptions o;
  o.calculus = Calculus::FSAU;
  o.concurrent = true;
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    GenCase g = gen_program(seed, o);
    EXPECT_FALSE(contains_kind(g.term, Kind::ToLabeled));
    EXPECT_TRUE(well_typed(g)) << pretty(g.term);
  }
}

TEST(Trials, SecureTiniSmallRun) {
  VariantConfig cfg;
  int passes = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    GenOptions o;
    o.attack_templates = seed % 3 == 0;
    GenCase g = gen_program(seed, o);
    TrialResult r = tini_trial(g.term, g.first, g.second, cfg);
    ASSERT_NE(r.verdict, TrialVerdict::Counterexample) << pretty(g.term) << "\n" << r.detail;
    passes += r.verdict == TrialVerdict::Pass;
  }
  EXPECT_GT(passes, 20);
}

TEST(Trials, NaiveCounterexampleIsShrunk) {
  VariantConfig cfg;
  cfg.security = Security::Naive;
  Term t = instantiate_attack(attack_corpus()[1], 0);
  TrialResult r = tini_trial(t, attack_state(false), attack_state(true), cfg);
  ASSERT_EQ(r.verdict, TrialVerdict::Counterexample);
  EXPECT_LE(term_size(r.witness), term_size(t));
}

TEST(Trials, SecureTsniSmallRun) {
  GenOptions o;
  o.calculus = Calculus::FSAU;
  o.concurrent = true;
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    o.attack_templates = seed % 2 == 1;
    GenCase g = gen_program(seed, o);
    TrialResult r = tsni_trial(g.term, g.first, g.second, Security::Secure, 20000);
    ASSERT_NE(r.verdict, TrialVerdict::Counterexample) << pretty(g.term) << "\n" << r.detail;
    EXPECT_TRUE(r.scope_invariant_held);
    EXPECT_EQ(r.out_of_scope_accesses, 0u);
  }
}

TEST(Trials, NaiveForkProbeBreaksTsni) {
  Attack fork = attack_corpus()[2];
  TrialResult r = tsni_trial(instantiate_attack(fork, 32), attack_state(false),
                             attack_state(true), Security::Naive, 20000, false);
  EXPECT_EQ(r.verdict, TrialVerdict::Counterexample);
}

TEST(Attacks, CorpusShape) {
  auto corpus = attack_corpus();
  ASSERT_EQ(corpus.size(), 4u);
  for (const auto& a : corpus) {
    Term t = instantiate_attack(a, 8);
    EXPECT_TRUE(free_vars(t).empty()) << a.name;
    EXPECT_NO_THROW(typecheck(store_typing(attack_state(true)), {}, t)) << a.name;
  }
  Term nl = instantiate_attack(corpus[3], 0);
  EXPECT_FALSE(contains_kind(nl, Kind::LabelOf));
  EXPECT_FALSE(contains_kind(nl, Kind::LabelOfRef));
}

TEST(Attacks, LeakNaiveBlockedSecure) {
  for (const auto& a : attack_corpus()) {
    AttackRun naive = run_attack(a, Calculus::FS, Security::Naive);
    EXPECT_TRUE(naive.leaked) << a.name << ": " << naive.outcomes[0] << " / " << naive.outcomes[1];
    for (Calculus c : {Calculus::FS, Calculus::FSAU}) {
      AttackRun secure = run_attack(a, c, Security::Secure);
      EXPECT_TRUE(secure.blocked) << a.name << " " << secure.mode << ": " << secure.outcomes[0]
                                  << " / " << secure.outcomes[1];
    }
  }
}
