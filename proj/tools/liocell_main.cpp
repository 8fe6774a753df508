#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdlib>
#include <iostream>
#include <json.hpp>
#include <memory>

#include "liocell/embedding.hpp"
#include "liocell/harness.hpp"
#include "liocell/policies.hpp"
#include "liocell/program_file.hpp"
#include "liocell/syntax.hpp"
#include "liocell/typecheck.hpp"

using namespace liocell;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kFailed = 1, kUsage = 2, kCounterexample = 3 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Config {
  std::string calculus = "fs";
  std::string mode = "secure";
  std::string lattice = "two-point";
  std::string label = "L";
  std::uint64_t fuel = 100000;
  bool json = false;
  bool concurrent = false;
  std::uint64_t seed = 1;
  std::string file;
  // set when the flag was given on the command line
  bool calculus_given = false, mode_given = false, label_given = false;
};

std::uint64_t default_fuel() {
  if (const char* env = std::getenv("LIOCELL_FUEL")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw UsageError(std::string("LIOCELL_FUEL is not a number: ") + env);
    }
  }
  return 100000;
}

std::shared_ptr<const Lattice> load_lattice(const std::string& spec) {
  if (const Lattice* b = Lattice::builtin(spec))
    return std::shared_ptr<const Lattice>(std::shared_ptr<const Lattice>{}, b);
  try {
    return Lattice::load_file(spec);
  } catch (const LatticeError& e) {
    throw UsageError(fmt::format("lattice {}: {}", spec, e.what()));
  }
}

struct Prepared {
  std::shared_ptr<const Lattice> lattice;
  LoadedProgram program;
  VariantConfig cfg;
  MachineState init;
};

// Command-line flags win over `;@` directives in the file.
Prepared prepare(const Config& c) {
  Prepared p;
  p.lattice = load_lattice(c.lattice);
  p.program = load_program(read_text_file(c.file), *p.lattice);
  const auto& o = p.program.options;
  auto calc = c.calculus_given ? parse_calculus(c.calculus)
                               : o.calculus ? o.calculus : parse_calculus(c.calculus);
  auto sec = c.mode_given ? parse_security(c.mode)
                          : o.security ? o.security : parse_security(c.mode);
  if (!calc) throw UsageError("unknown calculus: " + c.calculus);
  if (!sec) throw UsageError("unknown mode: " + c.mode);
  if (*sec == Security::Naive && (*calc == Calculus::FI || *calc == Calculus::Base))
    throw UsageError("--mode naive only applies to flow-sensitive calculi (fs, fs-au)");
  p.cfg.calculus = *calc;
  p.cfg.security = *sec;
  p.cfg.fuel = c.fuel;
  p.cfg.split_write_check = o.split_write_check;
  std::string label = c.label_given ? c.label : o.lcur.value_or(c.label);
  auto l = p.lattice->find(label);
  if (!l) throw UsageError("label " + label + " is not in lattice " + p.lattice->name());
  p.init = MachineState::initial(*l);
  return p;
}

int outcome_exit(const Outcome& o) { return o.kind == OutcomeKind::Value ? kOk : kFailed; }

int run_concurrent(const Config& c, const Prepared& p) {
  if (p.cfg.calculus != Calculus::FS && p.cfg.calculus != Calculus::FSAU)
    throw UsageError("concurrent runs use the flow-sensitive store (fs or fs-au)");
  Scheduler sched(p.cfg.security, p.cfg.fuel);
  ConcOutcome o = sched.run(Scheduler::initial(p.init, p.program.term));
  const ThreadResult* main = o.thread(0);
  if (c.json) {
    json threads = json::array();
    for (const auto& t : o.threads)
      threads.push_back({{"tid", t.tid},
                         {"status", thread_status_name(t.status)},
                         {"lcur", to_string(t.lcur)},
                         {"value", t.status == ThreadStatus::Done
                                       ? json(display_value(t.value))
                                       : json(nullptr)}});
    MachineState fin;
    fin.fi = o.final.fi;
    fin.fs = o.final.fs;
    json j = store_json(fin);
    j["threads"] = threads;
    j["steps"] = o.steps;
    j["fuel_exhausted"] = o.fuel_exhausted;
    std::cout << j.dump(2) << "\n";
  } else {
    for (const auto& t : o.threads) {
      std::cout << fmt::format("thread {} {}", t.tid, thread_status_name(t.status));
      if (t.status == ThreadStatus::Done) std::cout << " " << display_value(t.value);
      if (t.status == ThreadStatus::Error) std::cout << " rule=" << t.rule << ": " << t.detail;
      std::cout << " lcur=" << to_string(t.lcur) << "\n";
    }
    if (o.fuel_exhausted) std::cout << "FuelExhausted\n";
    MachineState fin;
    fin.fi = o.final.fi;
    fin.fs = o.final.fs;
    std::cout << describe_stores(fin);
  }
  return main && main->status == ThreadStatus::Done && !o.fuel_exhausted ? kOk : kFailed;
}

int cmd_run(const Config& c) {
  Prepared p = prepare(c);
  if (c.concurrent || p.program.options.concurrent) return run_concurrent(c, p);
  Outcome o = Machine(p.cfg).run(p.init, p.program.term);
  if (c.json) {
    std::cout << outcome_json(o).dump(2) << "\n";
  } else {
    std::cout << describe_outcome(o) << "\n" << describe_stores(o.state);
  }
  return outcome_exit(o);
}

int cmd_trace(const Config& c) {
  Prepared p = prepare(c);
  Machine m(p.cfg);
  Outcome o = m.run(p.init, p.program.term,
                    [](std::uint64_t step, const std::string& rule, const MachineState& s,
                       const Term& t) { std::cout << trace_line(step, rule, s.lcur, t) << "\n"; });
  std::cout << describe_outcome(o) << "\n";
  return outcome_exit(o);
}

int cmd_typecheck(const Config& c) {
  Prepared p = prepare(c);
  try {
    Type t = typecheck({}, {}, p.program.term);
    std::cout << type_to_string(t) << "\n";
    return kOk;
  } catch (const TypeError& e) {
    std::cout << "type error: " << e.what() << "\n";
    return kFailed;
  }
}

int cmd_embed(const Config& c) {
  Prepared p = prepare(c);
  Term t = embed_term(p.program.term, p.init);
  MachineState s = embed_state(p.init);
  json mu = json::array();
  for (const auto& [a, cell] : s.fi)
    mu.push_back({{"addr", a}, {"label", to_string(cell.label)}, {"value", pretty(cell.value)}});
  json j = {{"lcur", to_string(s.lcur)}, {"mu_fi", mu}};
  if (c.json) {
    j["program"] = pretty(t);
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << pretty(t) << "\n" << j.dump() << "\n";
  }
  return kOk;
}

struct NiConfig {
  std::string property = "tini";
  unsigned trials = 1000;
  std::string level = "L";
  bool templates = false;
  std::size_t max_size = 80;
};

int cmd_check_ni(const Config& c, const NiConfig& n) {
  auto calc = parse_calculus(c.calculus);
  auto sec = parse_security(c.mode);
  if (!calc || !sec) throw UsageError("unknown calculus or mode");
  if (*sec == Security::Naive && *calc != Calculus::FS && *calc != Calculus::FSAU)
    throw UsageError("--mode naive only applies to flow-sensitive calculi (fs, fs-au)");
  if (n.level != "L")
    throw UsageError("the generator uses the two-point lattice; --level must be L");
  if (n.property != "tini" && n.property != "tsni")
    throw UsageError("--property must be tini or tsni");
  const bool tsni = n.property == "tsni";
  GenOptions g;
  g.calculus = tsni ? Calculus::FSAU : *calc;
  g.concurrent = tsni;
  g.attack_templates = n.templates;
  g.max_size = n.max_size;
  VariantConfig cfg;
  cfg.calculus = *calc;
  cfg.security = *sec;
  cfg.fuel = c.fuel;
  unsigned counts[3] = {0, 0, 0};
  json examples = json::array();
  for (unsigned i = 0; i < n.trials; ++i) {
    std::uint64_t seed = c.seed + i;
    GenCase gc = gen_program(seed, g);
    TrialResult r = tsni ? tsni_trial(gc.term, gc.first, gc.second, *sec, c.fuel)
                         : tini_trial(gc.term, gc.first, gc.second, cfg);
    ++counts[static_cast<int>(r.verdict)];
    if (r.verdict == TrialVerdict::Counterexample && examples.size() < 5)
      examples.push_back({{"seed", seed},
                          {"program", pretty(gc.term)},
                          {"shrunk", pretty(r.witness)},
                          {"detail", r.detail}});
  }
  json out = {{"property", n.property},
              {"variant", tsni ? "concurrent" : calculus_name(*calc)},
              {"mode", security_name(*sec)},
              {"level", n.level},
              {"trials", n.trials},
              {"seed", c.seed},
              {"pass", counts[0]},
              {"inconclusive", counts[1]},
              {"counterexamples", counts[2]},
              {"examples", examples}};
  std::cout << out.dump(2) << "\n";
  return counts[2] ? kCounterexample : kOk;
}

int cmd_compare(const Config& c) {
  auto programs = parse_imp(read_text_file(c.file));
  json rows = json::array();
  if (!c.json)
    std::cout << fmt::format("{:<28} {:<14} {:<14} {:<14} {:<14}\n", "program", "NSU", "PU", "FS",
                             "FS-AU");
  for (const auto& p : programs) {
    ComparisonRow r = compare_policies(p);
    if (c.json) {
      rows.push_back({{"program", r.program},
                      {"nsu", verdict_string(r.nsu)},
                      {"pu", verdict_string(r.pu)},
                      {"fs", verdict_string(r.fs)},
                      {"fs_au", verdict_string(r.fsau)}});
    } else {
      std::cout << fmt::format("{:<28} {:<14} {:<14} {:<14} {:<14}\n", r.program,
                               verdict_string(r.nsu), verdict_string(r.pu), verdict_string(r.fs),
                               verdict_string(r.fsau));
    }
  }
  if (c.json) std::cout << rows.dump(2) << "\n";
  return kOk;
}

int cmd_attacks(const Config& c, bool mode_given, unsigned delay) {
  std::vector<Security> modes;
  if (mode_given) {
    auto s = parse_security(c.mode);
    if (!s) throw UsageError("unknown mode: " + c.mode);
    modes.push_back(*s);
  } else {
    modes = {Security::Naive, Security::Secure};
  }
  bool any_leak = false, as_expected = true;
  json rows = json::array();
  for (Security sec : modes) {
    for (const auto& a : attack_corpus()) {
      std::vector<Calculus> calcs{Calculus::FS};
      if (sec == Security::Secure && !a.concurrent) calcs.push_back(Calculus::FSAU);
      for (Calculus calc : calcs) {
        AttackRun r = run_attack(a, calc, sec, delay, c.fuel);
        const char* verdict = r.leaked ? "LEAK" : r.blocked ? "BLOCKED" : "NO-LEAK";
        any_leak = any_leak || r.leaked;
        as_expected = as_expected && (sec == Security::Naive ? r.leaked : r.blocked);
        if (c.json)
          rows.push_back({{"attack", r.attack},
                          {"mode", r.mode},
                          {"verdict", verdict},
                          {"secret_false", r.outcomes[0]},
                          {"secret_true", r.outcomes[1]}});
        else
          std::cout << fmt::format("{:<10} {:<18} {:<8} secret=False: {} | secret=True: {}\n",
                                   r.attack, r.mode, verdict, r.outcomes[0], r.outcomes[1]);
      }
    }
  }
  if (c.json) std::cout << rows.dump(2) << "\n";
  // Both modes together reproduce the expected split; a single mode reports leaks.
  if (!mode_given) return as_expected ? kOk : kCounterexample;
  return any_leak ? kCounterexample : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interpreter and property harness for floating-label IFC calculi"};
  app.require_subcommand(1);
  Config c;
  NiConfig ni;
  unsigned delay = 32;
  try {
    c.fuel = default_fuel();
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }

  auto common = [&](CLI::App* sub) {
    sub->add_option("--calculus,--variant", c.calculus, "base | fi | fs | fs-au")
        ->each([&](const std::string&) { c.calculus_given = true; });
    sub->add_option("--mode", c.mode, "secure | naive")
        ->each([&](const std::string&) { c.mode_given = true; });
    sub->add_option("--lattice", c.lattice, "two-point | pu-three-point | FILE");
    sub->add_option("--label", c.label, "initial current label")
        ->each([&](const std::string&) { c.label_given = true; });
    sub->add_option("--fuel", c.fuel, "step budget (default: LIOCELL_FUEL or 100000)");
    sub->add_flag("--json", c.json, "machine-readable output");
  };
  auto with_file = [&](CLI::App* sub) {
    common(sub);
    sub->add_option("file", c.file, "program file")->required();
    return sub;
  };
  auto* run = with_file(app.add_subcommand("run", "run a program"));
  run->add_flag("--concurrent", c.concurrent, "run under the round-robin scheduler");
  auto* trace = with_file(app.add_subcommand("trace", "print the per-step trace"));
  auto* tc = with_file(app.add_subcommand("typecheck", "infer the program's type"));
  auto* embed = with_file(app.add_subcommand("embed", "translate an fs program to fi"));
  auto* compare = app.add_subcommand("compare", "policy comparison for an .imp file");
  compare->add_option("file", c.file, "imperative program file")->required();
  compare->add_flag("--json", c.json, "machine-readable output");
  auto* check = app.add_subcommand("check-ni", "randomized non-interference trials");
  common(check);
  check->add_option("--trials", ni.trials, "number of trials");
  check->add_option("--seed", c.seed, "first seed");
  check->add_option("--level", ni.level, "observation level");
  check->add_option("--property", ni.property, "tini | tsni");
  check->add_flag("--templates", ni.templates, "splice attack-shaped probes into programs");
  check->add_option("--max-size", ni.max_size, "term size bound");
  auto* attacks = app.add_subcommand("attacks", "run the attack corpus");
  common(attacks);
  attacks->add_option("--delay", delay, "idle quanta before the fork attack observes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*run) return cmd_run(c);
    if (*trace) return cmd_trace(c);
    if (*tc) return cmd_typecheck(c);
    if (*embed) return cmd_embed(c);
    if (*compare) return cmd_compare(c);
    if (*check) return cmd_check_ni(c, ni);
    if (*attacks) return cmd_attacks(c, c.mode_given, delay);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ParseError& e) {
    std::cerr << c.file << ":" << e.line() << ":" << e.column() << ": " << e.what() << "\n";
    return kUsage;
  } catch (const ImpError& e) {
    std::cerr << c.file << ": " << e.what() << "\n";
    return kUsage;
  } catch (const EmbedError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailed;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
