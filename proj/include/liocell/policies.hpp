#pragma once

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "liocell/machine.hpp"

namespace liocell {

// Imperative mini-language used to compare label-change policies.
struct ImpExpr {
  enum class Kind { Lit, Var, Number };
  Kind kind = Kind::Lit;
  bool value = false;
  std::string text;  // variable name or numeral
};

struct ImpStmt;
using ImpBlock = std::vector<ImpStmt>;

struct ImpStmt {
  enum class Kind { Assign, If, Skip, Output, Upgrade, Reset, WithRefs };
  Kind kind = Kind::Skip;
  std::vector<std::string> targets;  // Assign (x, y := e), Upgrade/Reset (one), WithRefs (scope)
  ImpExpr expr;                      // Assign, Output, If condition, Reset value
  std::string label;                 // Upgrade, Reset
  ImpBlock then_block, else_block;   // If; WithRefs uses then_block
  int line = 0;
};

struct ImpInput {
  std::string name;
  std::string label;
  std::optional<bool> fixed;  // otherwise both values are tried
};

struct ImpProgram {
  std::string name;
  std::vector<ImpInput> inputs;
  ImpBlock body;
};

class ImpError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parses one or more programs; `program <name>` starts a new one.
std::vector<ImpProgram> parse_imp(const std::string& text);

// The program as a flow-sensitive term plus the initial state holding one
// L-labeled FI output cell per output statement.
struct Desugared {
  Term term;
  MachineState init;
  std::map<Addr, std::string> output_cells;  // address -> numeral, or "" for a variable
};

Desugared desugar_imp(const ImpProgram& p, const Lattice& lat,
                      const std::map<std::string, bool>& secrets);

struct PolicyOutcome {
  bool accepted = false;
  std::vector<std::string> outputs;
  std::string reason;  // failing check when rejected
  int line = 0;        // statement where it was rejected
  std::map<std::string, std::string> labels;
};

// Monitors run against explicit values for every input.
PolicyOutcome run_nsu(const ImpProgram& p, const std::map<std::string, bool>& secrets);
PolicyOutcome run_pu(const ImpProgram& p, const std::map<std::string, bool>& secrets);
PolicyOutcome run_lio(const ImpProgram& p, Calculus calculus,
                      const std::map<std::string, bool>& secrets, std::uint64_t fuel = 100000);

struct Verdict {
  bool accepted = false;
  std::vector<std::string> outputs;  // from the all-true assignment of the inputs
  std::string reason;
};

struct ComparisonRow {
  std::string program;
  Verdict nsu, pu, fs, fsau;
};

// Every assignment of the inputs: a monitor accepts when it accepts them all.
std::vector<std::map<std::string, bool>> input_assignments(const ImpProgram& p);
ComparisonRow compare_policies(const ImpProgram& p);

std::string verdict_string(const Verdict& v);

}  // namespace liocell
