// Prints one PASS/FAIL line per acceptance criterion; exit status is the
// number of failed criteria.
#include <fmt/format.h>

#include <chrono>
#include <filesystem>
#include <functional>
#include <iostream>
#include <set>

#include "../support/golden_cases.hpp"
#include "liocell/embedding.hpp"
#include "liocell/harness.hpp"
#include "liocell/policies.hpp"
#include "liocell/program_file.hpp"

using namespace liocell;
namespace fs = std::filesystem;

namespace {

const fs::path kRoot = LIOCELL_SOURCE_DIR;
const Lattice& two() { return Lattice::two_point(); }

struct Result {
  bool pass = true;
  std::string detail;
  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

Result attacks() {
  Result r;
  int leaks = 0, blocks = 0;
  for (const auto& a : attack_corpus()) {
    AttackRun naive = run_attack(a, Calculus::FS, Security::Naive);
    if (naive.leaked) ++leaks;
    else r.fail(fmt::format("{} does not leak under naive: {} / {}", a.name, naive.outcomes[0],
                            naive.outcomes[1]));
    std::vector<Calculus> secure{Calculus::FS};
    if (!a.concurrent) secure.push_back(Calculus::FSAU);
    for (Calculus c : secure) {
      AttackRun s = run_attack(a, c, Security::Secure);
      if (s.blocked) ++blocks;
      else r.fail(fmt::format("{} not blocked under {}: {} / {}", a.name, s.mode, s.outcomes[0],
                              s.outcomes[1]));
    }
  }
  if (r.pass) r.detail = fmt::format("{} naive leaks, {} secure blocks", leaks, blocks);
  return r;
}

Result permissiveness() {
  Result r;
  LoadedProgram p = load_program(read_text_file(kRoot / "programs/permissiveness.lio"), two());
  VariantConfig cfg;
  Outcome o = Machine(cfg).run(MachineState::initial(two().bottom()), p.term);
  if (o.kind != OutcomeKind::Value || o.value->kind != Kind::Unit || !(o.state.lcur == two().top()))
    r.fail("secure fs: " + describe_outcome(o));
  cfg.split_write_check = true;
  Outcome split = Machine(cfg).run(MachineState::initial(two().bottom()), p.term);
  if (split.kind == OutcomeKind::Value) r.fail("split check accepted the write");
  if (r.pass)
    r.detail = fmt::format("secure: {}; split: {}", describe_outcome(o), describe_outcome(split));
  return r;
}

Result cosimulation() {
  Result r;
  GenOptions g;
  g.calculus = Calculus::FS;
  g.max_size = 40;
  int matched = 0;
  for (std::uint64_t seed = 1; seed <= 500; ++seed) {
    GenCase c = gen_program(seed, g);
    if (term_size(c.term) > 40) {
      r.fail(fmt::format("seed {} exceeds the size bound", seed));
      continue;
    }
    CoSimReport rep = cosimulate(c.term, c.first);
    if (rep.match) ++matched;
    else r.fail(fmt::format("seed {}: {}", seed, rep.reason));
  }
  r.detail = fmt::format("{}/500 matched", matched) + (r.pass ? "" : "; first: " + r.detail);
  return r;
}

Result tini() {
  Result r;
  std::string summary;
  for (Calculus c : {Calculus::FS, Calculus::FSAU}) {
    VariantConfig cfg;
    cfg.calculus = c;
    GenOptions g;
    g.calculus = c;
    unsigned counts[3] = {0, 0, 0};
    for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
      g.attack_templates = seed % 4 == 0;
      GenCase gc = gen_program(seed, g);
      TrialResult t = tini_trial(gc.term, gc.first, gc.second, cfg);
      ++counts[static_cast<int>(t.verdict)];
      if (t.verdict == TrialVerdict::Counterexample)
        r.fail(fmt::format("{} seed {}: {}", calculus_name(c), seed, pretty(t.witness)));
    }
    summary += fmt::format("{} secure: {} pass/{} inconclusive/{} cex; ", calculus_name(c),
                           counts[0], counts[1], counts[2]);
  }
  VariantConfig naive;
  naive.security = Security::Naive;
  GenOptions g;
  g.attack_templates = true;
  std::uint64_t found = 0;
  for (std::uint64_t seed = 1; seed <= 1000 && !found; ++seed) {
    GenCase gc = gen_program(seed, g);
    if (tini_trial(gc.term, gc.first, gc.second, naive, false).verdict ==
        TrialVerdict::Counterexample)
      found = seed;
  }
  if (!found) r.fail("naive mode found no counterexample in 1000 trials");
  summary += found ? fmt::format("naive: counterexample at trial {}", found) : "naive: none";
  r.detail = r.pass ? summary : r.detail + " | " + summary;
  return r;
}

Result tsni() {
  Result r;
  GenOptions g;
  g.calculus = Calculus::FSAU;
  g.concurrent = true;
  unsigned counts[3] = {0, 0, 0};
  std::uint64_t observed = 0;
  for (std::uint64_t seed = 1; seed <= 500; ++seed) {
    g.attack_templates = seed % 3 == 0;
    GenCase gc = gen_program(seed, g);
    TrialResult t = tsni_trial(gc.term, gc.first, gc.second, Security::Secure, 100000);
    ++counts[static_cast<int>(t.verdict)];
    observed += t.observed_steps;
    if (t.verdict == TrialVerdict::Counterexample)
      r.fail(fmt::format("seed {}: {}", seed, t.detail));
    if (!t.scope_invariant_held) r.fail(fmt::format("seed {}: scope invariant broken", seed));
    if (t.out_of_scope_accesses)
      r.fail(fmt::format("seed {}: {} out-of-scope accesses", seed, t.out_of_scope_accesses));
  }
  std::string summary = fmt::format("{} pass/{} inconclusive/{} cex, {} L-visible states compared",
                                    counts[0], counts[1], counts[2], observed);
  r.detail = r.pass ? summary : r.detail + " | " + summary;
  return r;
}

Result policy_table() {
  Result r;
  auto programs = parse_imp(read_text_file(kRoot / "programs/label_change_policies.imp"));
  if (programs.size() != 4) {
    r.fail("expected 4 programs");
    return r;
  }
  ComparisonRow rows[4];
  for (int i = 0; i < 4; ++i) rows[i] = compare_policies(programs[i]);
  auto expect = [&](int i, const char* col, const Verdict& v, const std::string& want) {
    std::string got = verdict_string(v);
    if (got != want) r.fail(fmt::format("{} {}: {} (want {})", rows[i].program, col, got, want));
  };
  expect(0, "FS", rows[0].fs, "Accept");
  expect(1, "PU", rows[1].pu, "Reject");
  expect(1, "FS-AU", rows[1].fsau, "Accept");
  expect(2, "PU", rows[2].pu, "Accept [1]");
  expect(2, "FS-AU", rows[2].fsau, "Reject");
  expect(3, "PU", rows[3].pu, "Accept [1]");
  expect(3, "FS-AU", rows[3].fsau, "Accept [1]");
  if (r.pass) {
    for (const auto& row : rows)
      r.detail += fmt::format("{}: NSU={} PU={} FS={} FS-AU={}; ", row.program,
                              verdict_string(row.nsu), verdict_string(row.pu),
                              verdict_string(row.fs), verdict_string(row.fsau));
  }
  return r;
}

Result golden_traces() {
  Result r;
  static const std::set<std::string> rules{
      "app", "fix", "ifTrue", "ifFalse", "labelOp", "return", "bind", "getLabel", "label",
      "labelOf", "unlabel", "unlabel-au", "toLabeled", "newRef-FI", "newRef-FS", "readRef-FI",
      "readRef-FS", "writeRef-FI", "writeRef-FI-diverge", "writeRef-FS", "writeRef-FS-fail",
      "writeRef-FS-naive", "labelOf-FI", "labelOf-FS", "copyRef", "upgradeRef", "downgradeRef",
      "withRefs-Ctx", "withRefs-Opt", "withRefs-Done", "forkLIO", "unwrap", "upgradeStore"};
  auto first = golden::cases(), second = golden::cases();
  std::set<std::string> covered;
  for (std::size_t i = 0; i < first.size(); ++i) {
    const auto& c = first[i];
    covered.insert(c.rule);
    if (c.text != second[i].text) r.fail(c.rule + ": rendering is not stable");
    if (!golden::mentions_rule(c.text, c.rule)) r.fail(c.rule + ": rule does not fire");
    fs::path p = kRoot / "programs/golden" / (c.rule + ".txt");
    if (!fs::exists(p)) r.fail(c.rule + ": no stored trace");
    else if (read_text_file(p) != c.text) r.fail(c.rule + ": differs from " + p.string());
  }
  for (const auto& rule : rules)
    if (!covered.count(rule)) r.fail(rule + ": no golden case");
  if (r.pass) r.detail = fmt::format("{} rules byte-identical to programs/golden", covered.size());
  return r;
}

Result lattice_laws() {
  Result r;
  for (const char* name : {"two-point", "pu-three-point"}) {
    auto v = Lattice::builtin(name)->check_laws();
    if (!v.empty()) r.fail(std::string(name) + ": " + v.front());
  }
  for (const char* file : {"diamond.lat", "two_point.lat"}) {
    try {
      auto lat = Lattice::load_file(kRoot / "programs/lattices" / file);
      if (!lat->check_laws().empty()) r.fail(std::string(file) + ": law violation");
    } catch (const LatticeError& e) {
      r.fail(std::string(file) + ": " + e.what());
    }
  }
  std::string rejection;
  try {
    Lattice::load_file(kRoot / "programs/lattices/broken_no_join.lat");
    r.fail("broken_no_join.lat was accepted");
  } catch (const LatticeError& e) {
    rejection = e.what();
  }
  if (r.pass) r.detail = "built-ins and user lattices lawful; broken file rejected: " + rejection;
  return r;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Result()> run;
  };
  const Criterion all[] = {
      {"attacks", attacks},           {"permissiveness", permissiveness},
      {"cosimulation", cosimulation}, {"tini", tini},
      {"tsni", tsni},                 {"policy-table", policy_table},
      {"golden-traces", golden_traces}, {"lattice-laws", lattice_laws},
  };
  int failed = 0, index = 0;
  for (const auto& c : all) {
    ++index;
    auto start = std::chrono::steady_clock::now();
    Result res;
    try {
      res = c.run();
    } catch (const std::exception& e) {
      res.fail(std::string("exception: ") + e.what());
    }
    double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += !res.pass;
    std::cout << fmt::format("{} criterion {} {} ({:.1f}s): {}\n", res.pass ? "PASS" : "FAIL",
                             index, c.name, secs, res.detail)
              << std::flush;
  }
  return failed;
}
