#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "liocell/machine.hpp"

namespace liocell {

// Settings a program file may pin with `;@ key=value` lines:
// calculus=base|fi|fs|fs-au, mode=secure|naive, lcur=<label>, split-write=on,
// concurrent=on (run under the scheduler).
struct ProgramOptions {
  std::optional<Calculus> calculus;
  std::optional<Security> security;
  std::optional<std::string> lcur;
  bool split_write_check = false;
  bool concurrent = false;
};

struct LoadedProgram {
  Term term;
  ProgramOptions options;
};

// Throws ParseError for the program, std::invalid_argument for a bad directive.
LoadedProgram load_program(std::string_view source, const Lattice& lattice);

// Throws std::runtime_error when the file cannot be read.
std::string read_text_file(const std::filesystem::path& path);

std::optional<Calculus> parse_calculus(std::string_view s);
std::optional<Security> parse_security(std::string_view s);

// "Value () lcur=H", "MonitorError(LabelCheck) rule=writeRef-FI lcur=L: ...".
std::string describe_outcome(const Outcome& o);

// One line per store cell, ascending address within each store.
std::string describe_stores(const MachineState& s);

// Trace lines for every step followed by the outcome line.
std::string render_trace(const VariantConfig& cfg, const MachineState& init, const Term& t);

// {outcome, lcur, value, steps, mu_fi:[...], mu_fs:[...]}
nlohmann::json outcome_json(const Outcome& o);
nlohmann::json store_json(const MachineState& s);

}  // namespace liocell
