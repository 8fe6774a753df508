#include "liocell/program_file.hpp"

#include <fmt/format.h>

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "liocell/syntax.hpp"

namespace liocell {

std::optional<Calculus> parse_calculus(std::string_view s) {
  if (s == "base") return Calculus::Base;
  if (s == "fi") return Calculus::FI;
  if (s == "fs") return Calculus::FS;
  if (s == "fs-au" || s == "fsau") return Calculus::FSAU;
  return std::nullopt;
}

std::optional<Security> parse_security(std::string_view s) {
  if (s == "secure") return Security::Secure;
  if (s == "naive") return Security::Naive;
  return std::nullopt;
}

LoadedProgram load_program(std::string_view source, const Lattice& lattice) {
  LoadedProgram p;
  std::istringstream lines{std::string(source)};
  for (std::string line; std::getline(lines, line);) {
    if (line.rfind(";@", 0) != 0) continue;
    std::istringstream words(line.substr(2));
    for (std::string w; words >> w;) {
      auto eq = w.find('=');
      if (eq == std::string::npos) throw std::invalid_argument("directive without '=': " + w);
      std::string key = w.substr(0, eq), val = w.substr(eq + 1);
      if (key == "calculus") {
        p.options.calculus = parse_calculus(val);
        if (!p.options.calculus) throw std::invalid_argument("unknown calculus: " + val);
      } else if (key == "mode") {
        p.options.security = parse_security(val);
        if (!p.options.security) throw std::invalid_argument("unknown mode: " + val);
      } else if (key == "lcur") {
        p.options.lcur = val;
      } else if (key == "concurrent") {
        p.options.concurrent = val == "on";
      } else if (key == "split-write") {
        p.options.split_write_check = val == "on";
      } else {
        throw std::invalid_argument("unknown directive: " + key);
      }
    }
  }
  p.term = parse_program(source, lattice);
  return p;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string describe_outcome(const Outcome& o) {
  std::string lcur = to_string(o.state.lcur);
  switch (o.kind) {
    case OutcomeKind::Value:
      return fmt::format("Value {} lcur={}", display_value(o.value), lcur);
    case OutcomeKind::MonitorError:
      return fmt::format("MonitorError({}) rule={} lcur={}: {}", error_name(o.error), o.rule,
                         lcur, o.detail);
    default:
      return fmt::format("{} lcur={}", outcome_name(o.kind), lcur);
  }
}

std::string describe_stores(const MachineState& s) {
  std::string out;
  for (const auto& [a, c] : s.fi)
    out += fmt::format("fi:{} = Lb {} {}\n", a, to_string(c.label), display_value(c.value));
  for (const auto& [a, c] : s.fs)
    out += fmt::format("fs:{} = Lb {} (Lb {} {})\n", a, to_string(c.outer), to_string(c.inner),
                       display_value(c.value));
  return out;
}

std::string render_trace(const VariantConfig& cfg, const MachineState& init, const Term& t) {
  std::string out;
  Machine m(cfg);
  Outcome o = m.run(init, t, [&](std::uint64_t step, const std::string& rule,
                                 const MachineState& s, const Term& term) {
    out += trace_line(step, rule, s.lcur, term);
    out += '\n';
  });
  return out + describe_outcome(o) + '\n';
}

nlohmann::json store_json(const MachineState& s) {
  nlohmann::json fi = nlohmann::json::array(), fs = nlohmann::json::array();
  for (const auto& [a, c] : s.fi)
    fi.push_back({{"addr", "fi:" + std::to_string(a)},
                  {"label", to_string(c.label)},
                  {"value", display_value(c.value)}});
  for (const auto& [a, c] : s.fs)
    fs.push_back({{"addr", "fs:" + std::to_string(a)},
                  {"label_on_label", to_string(c.outer)},
                  {"label", to_string(c.inner)},
                  {"value", display_value(c.value)}});
  return {{"mu_fi", fi}, {"mu_fs", fs}};
}

nlohmann::json outcome_json(const Outcome& o) {
  nlohmann::json j = store_json(o.state);
  j["outcome"] = outcome_name(o.kind);
  j["lcur"] = to_string(o.state.lcur);
  j["value"] = o.kind == OutcomeKind::Value ? nlohmann::json(display_value(o.value))
                                            : nlohmann::json(nullptr);
  j["steps"] = o.steps;
  if (o.kind == OutcomeKind::MonitorError) {
    j["error"] = {{"kind", error_name(o.error)}, {"rule", o.rule}, {"detail", o.detail}};
  }
  return j;
}

}  // namespace liocell
