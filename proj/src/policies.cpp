#include "liocell/policies.hpp"

#include <cctype>
#include <functional>
#include <sstream>

#include <fmt/format.h>

namespace liocell {

namespace {

// ---------------------------------------------------------------- parsing

struct Token {
  std::string text;
  int line = 0;
};

std::vector<Token> tokenize(const std::string& src) {
  std::vector<Token> out;
  int line = 1;
  for (std::size_t i = 0; i < src.size();) {
    char c = src[i];
    if (c == '\n') {
      ++line;
      ++i;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == '#') {
      while (i < src.size() && src[i] != '\n') ++i;
    } else if (c == ':' && i + 1 < src.size() && src[i + 1] == '=') {
      out.push_back({":=", line});
      i += 2;
    } else if (c == '{' || c == '}' || c == '(' || c == ')' || c == ',') {
      out.push_back({std::string(1, c), line});
      ++i;
    } else if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_'))
        ++j;
      out.push_back({src.substr(i, j - i), line});
      i = j;
    } else {
      throw ImpError(fmt::format("line {}: unexpected character '{}'", line, c));
    }
  }
  return out;
}

bool is_ident(const std::string& s) {
  return !s.empty() && (std::isalpha(static_cast<unsigned char>(s[0]))) &&
         s != "if" && s != "else" && s != "skip" && s != "output" && s != "upgrade" &&
         s != "reset" && s != "withRefs" && s != "input" && s != "program" && !s.empty();
}

std::optional<bool> as_bool(const std::string& s) {
  if (s == "true" || s == "True") return true;
  if (s == "false" || s == "False") return false;
  return std::nullopt;
}

class ImpParser {
 public:
  explicit ImpParser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  std::vector<ImpProgram> programs() {
    std::vector<ImpProgram> out;
    while (!done()) {
      ImpProgram p;
      if (peek() == "program") {
        next();
        p.name = ident("program name");
      } else if (!out.empty()) {
        fail("expected 'program'");
      }
      while (peek() == "input") {
        next();
        ImpInput in;
        in.name = ident("input name");
        in.label = ident("input label");
        if (auto b = as_bool(peek())) {
          next();
          in.fixed = *b;
        }
        p.inputs.push_back(in);
      }
      while (!done() && peek() != "program") p.body.push_back(statement());
      out.push_back(std::move(p));
    }
    return out;
  }

 private:
  bool done() const { return pos_ >= toks_.size(); }
  const std::string& peek() const {
    static const std::string eof;
    return done() ? eof : toks_[pos_].text;
  }
  int line() const { return done() ? (toks_.empty() ? 1 : toks_.back().line) : toks_[pos_].line; }
  std::string next() {
    if (done()) fail("unexpected end of input");
    return toks_[pos_++].text;
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw ImpError(fmt::format("line {}: {}", line(), what));
  }
  void expect(const std::string& t) {
    if (peek() != t) fail("expected '" + t + "', found '" + peek() + "'");
    next();
  }
  std::string ident(const char* what) {
    if (!is_ident(peek())) fail(std::string("expected ") + what);
    return next();
  }

  ImpExpr expr() {
    ImpExpr e;
    std::string t = next();
    if (auto b = as_bool(t)) {
      e.kind = ImpExpr::Kind::Lit;
      e.value = *b;
    } else if (std::isdigit(static_cast<unsigned char>(t[0]))) {
      e.kind = ImpExpr::Kind::Number;
      e.text = t;
    } else if (is_ident(t)) {
      e.kind = ImpExpr::Kind::Var;
      e.text = t;
    } else {
      fail("expected an expression, found '" + t + "'");
    }
    return e;
  }

  ImpBlock block() {
    expect("{");
    ImpBlock b;
    while (peek() != "}") {
      if (done()) fail("unterminated block");
      b.push_back(statement());
    }
    expect("}");
    return b;
  }

  ImpStmt statement() {
    ImpStmt s;
    s.line = line();
    std::string head = peek();
    if (head == "skip") {
      next();
      s.kind = ImpStmt::Kind::Skip;
    } else if (head == "if") {
      next();
      s.kind = ImpStmt::Kind::If;
      s.expr = expr();
      s.then_block = block();
      if (peek() == "else") {
        next();
        s.else_block = block();
      }
    } else if (head == "output") {
      next();
      s.kind = ImpStmt::Kind::Output;
      expect("(");
      s.expr = expr();
      expect(")");
    } else if (head == "upgrade") {
      next();
      s.kind = ImpStmt::Kind::Upgrade;
      s.targets.push_back(ident("variable"));
      s.label = ident("label");
    } else if (head == "reset") {
      next();
      s.kind = ImpStmt::Kind::Reset;
      s.targets.push_back(ident("variable"));
      s.label = ident("label");
      s.expr = expr();
      if (s.expr.kind != ImpExpr::Kind::Lit) fail("reset needs a Boolean literal");
    } else if (head == "withRefs") {
      next();
      s.kind = ImpStmt::Kind::WithRefs;
      expect("(");
      s.targets.push_back(ident("variable"));
      while (peek() == ",") {
        next();
        s.targets.push_back(ident("variable"));
      }
      expect(")");
      s.then_block = block();
    } else if (is_ident(head)) {
      s.kind = ImpStmt::Kind::Assign;
      s.targets.push_back(next());
      while (peek() == ",") {
        next();
        s.targets.push_back(ident("variable"));
      }
      expect(":=");
      s.expr = expr();
      if (s.expr.kind == ImpExpr::Kind::Number) fail("only Booleans can be assigned");
    } else {
      fail("expected a statement, found '" + head + "'");
    }
    return s;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

// ------------------------------------------------------------- desugaring

const ImpInput* find_input(const ImpProgram& p, const std::string& x) {
  for (const auto& in : p.inputs)
    if (in.name == x) return &in;
  return nullptr;
}

class Desugarer {
 public:
  Desugarer(const ImpProgram& p, const Lattice& lat) : p_(p), lat_(lat) {}

  Desugared run(const std::map<std::string, bool>& secrets) {
    Desugared d;
    d.init = MachineState::initial(lat_.bottom());
    out_ = &d;
    Term t = block(p_.body, 0, {});
    for (auto it = p_.inputs.rbegin(); it != p_.inputs.rend(); ++it) {
      auto v = secrets.find(it->name);
      bool value = v != secrets.end() ? v->second : it->fixed.value_or(false);
      t = mk::app(mk::lam(it->name, t), mk::labeled(lat_.label(it->label), mk::boolean(value)));
    }
    d.term = t;
    return d;
  }

 private:
  using Env = std::set<std::string>;  // declared program variables in scope
  using Cont = std::function<Term(Term)>;

  std::string fresh() { return "_v" + std::to_string(++counter_); }

  [[noreturn]] static void fail(const ImpStmt& s, const std::string& what) {
    throw ImpError(fmt::format("line {}: {}", s.line, what));
  }

  // Reads an expression's value and hands it to `k`.
  Term read(const ImpStmt& s, const ImpExpr& e, const Env& env, const Cont& k) {
    switch (e.kind) {
      case ImpExpr::Kind::Lit:
        return k(mk::boolean(e.value));
      case ImpExpr::Kind::Number:
        return k(mk::unit());
      case ImpExpr::Kind::Var: {
        std::string v = fresh();
        Term source;
        if (env.count(e.text))
          source = mk::read_ref(Flavor::FS, mk::var(e.text));
        else if (find_input(p_, e.text))
          source = mk::unlabel(mk::var(e.text));
        else
          fail(s, "variable '" + e.text + "' used before assignment");
        return mk::bind(source, mk::lam(v, k(mk::var(v))));
      }
    }
    return k(mk::unit());
  }

  Term assign(const ImpStmt& s, std::size_t j, const Term& value, Env env, const ImpBlock& b,
              std::size_t i) {
    if (j == s.targets.size()) return block(b, i + 1, env);
    const std::string& x = s.targets[j];
    if (find_input(p_, x)) fail(s, "cannot assign to input '" + x + "'");
    if (env.count(x))
      return mk::seq(mk::write_ref(Flavor::FS, mk::var(x), value), assign(s, j + 1, value, env, b, i));
    env.insert(x);
    return mk::bind(mk::new_ref(Flavor::FS, mk::label_const(lat_.bottom()), value),
                    mk::lam(x, assign(s, j + 1, value, env, b, i)));
  }

  void require_declared(const ImpStmt& s, const std::string& x, const Env& env) {
    if (!env.count(x)) fail(s, "variable '" + x + "' used before assignment");
  }

  Term block(const ImpBlock& b, std::size_t i, const Env& env) {
    if (i == b.size()) return mk::ret(mk::unit());
    const ImpStmt& s = b[i];
    auto rest = [&] { return block(b, i + 1, env); };
    switch (s.kind) {
      case ImpStmt::Kind::Skip:
        return mk::seq(mk::ret(mk::unit()), rest());
      case ImpStmt::Kind::Assign:
        return read(s, s.expr, env, [&](Term v) { return assign(s, 0, v, env, b, i); });
      case ImpStmt::Kind::If: {
        Term branch = read(s, s.expr, env, [&](Term c) {
          return mk::ite(c, block(s.then_block, 0, env), block(s.else_block, 0, env));
        });
        return mk::seq(mk::to_labeled(mk::label_const(lat_.top()), branch), rest());
      }
      case ImpStmt::Kind::Output: {
        Addr cell = out_->init.next_addr++;
        bool numeral = s.expr.kind == ImpExpr::Kind::Number;
        out_->init.fi[cell] = FiCell{lat_.bottom(), numeral ? mk::unit() : mk::fls()};
        out_->output_cells[cell] = numeral ? s.expr.text : "";
        return read(s, s.expr, env, [&](Term v) {
          return mk::seq(mk::write_ref(Flavor::FI, mk::ref_fi(lat_.bottom(), cell), v), rest());
        });
      }
      case ImpStmt::Kind::Upgrade:
        require_declared(s, s.targets[0], env);
        return mk::seq(mk::upgrade(mk::var(s.targets[0]), mk::label_const(lat_.label(s.label))),
                       rest());
      case ImpStmt::Kind::Reset: {
        const std::string& x = s.targets[0];
        require_declared(s, x, env);
        Term reset = mk::seq(mk::downgrade(mk::var(x), mk::label_const(lat_.label(s.label))),
                             mk::write_ref(Flavor::FS, mk::var(x), mk::boolean(s.expr.value)));
        return mk::seq(reset, rest());
      }
      case ImpStmt::Kind::WithRefs: {
        std::vector<Term> scope;
        for (const auto& x : s.targets) {
          require_declared(s, x, env);
          scope.push_back(mk::var(x));
        }
        return mk::seq(mk::with_refs(mk::bag(scope), block(s.then_block, 0, env)), rest());
      }
    }
    return rest();
  }

  const ImpProgram& p_;
  const Lattice& lat_;
  Desugared* out_ = nullptr;
  int counter_ = 0;
};

// ---------------------------------------------------------------- monitors

struct Rejected {
  int line;
  std::string reason;
};

// Big-step interpreter with a pc label. The no-sensitive-upgrade monitor
// stops on a public write in a secret context; the permissive-upgrade one
// marks the variable P instead and stops on a later branch over it.
class PolicyMonitor {
 public:
  PolicyMonitor(const ImpProgram& p, bool permissive, const std::map<std::string, bool>& secrets)
      : p_(p),
        permissive_(permissive),
        lat_(permissive ? Lattice::pu_three_point() : Lattice::two_point()),
        secrets_(secrets) {}

  PolicyOutcome run() {
    PolicyOutcome out;
    scopes_.assign(1, {});
    try {
      exec(p_.body, lat_.bottom());
      out.accepted = true;
    } catch (const Rejected& r) {
      out.reason = r.reason;
      out.line = r.line;
    }
    out.outputs = outputs_;
    for (const auto& scope : scopes_)
      for (const auto& [x, v] : scope) out.labels[x] = to_string(v.label);
    return out;
  }

 private:
  struct Var {
    bool value = false;
    Label label;
  };
  using Scope = std::map<std::string, Var>;

  Label marked() const { return lat_.top(); }
  bool is_marked(Label l) const { return permissive_ && l == marked(); }

  Var* lookup(const std::string& x) {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      auto f = it->find(x);
      if (f != it->end()) return &f->second;
    }
    return nullptr;
  }

  Var eval(const ImpStmt& s, const ImpExpr& e) {
    switch (e.kind) {
      case ImpExpr::Kind::Lit:
        return Var{e.value, lat_.bottom()};
      case ImpExpr::Kind::Number:
        return Var{true, lat_.bottom()};
      case ImpExpr::Kind::Var: {
        if (Var* v = lookup(e.text)) return *v;
        if (const ImpInput* in = find_input(p_, e.text)) {
          auto sv = secrets_.find(e.text);
          bool value = sv != secrets_.end() ? sv->second : in->fixed.value_or(false);
          return Var{value, lat_.label(in->label)};
        }
        throw ImpError(fmt::format("line {}: variable '{}' used before assignment", s.line, e.text));
      }
    }
    return Var{};
  }

  std::string show(Label l) const { return to_string(l); }

  // New label for a write of `incoming` into a variable labelled `old`.
  Label update(const ImpStmt& s, Label pc, Label old, Label incoming, const std::string& x) {
    if (!flows(pc, old)) {
      if (permissive_) return marked();
      throw Rejected{s.line, fmt::format("no-sensitive-upgrade: pc {} does not flow to label {} of {}",
                                         show(pc), show(old), x)};
    }
    return join(old, incoming);
  }

  void exec(const ImpBlock& b, Label pc) {
    for (const auto& s : b) exec(s, pc);
  }

  void exec(const ImpStmt& s, Label pc) {
    switch (s.kind) {
      case ImpStmt::Kind::Skip:
        return;
      case ImpStmt::Kind::Assign: {
        Var v = eval(s, s.expr);
        for (const auto& x : s.targets) {
          if (Var* cur = lookup(x)) {
            cur->label = update(s, pc, cur->label, v.label, x);
            cur->value = v.value;
          } else {
            scopes_.back()[x] = Var{v.value, join(pc, v.label)};
          }
        }
        return;
      }
      case ImpStmt::Kind::If: {
        Var c = eval(s, s.expr);
        if (is_marked(c.label))
          throw Rejected{s.line, "permissive-upgrade: branch on marked variable " + s.expr.text};
        scopes_.emplace_back();
        exec(c.value ? s.then_block : s.else_block, join(pc, c.label));
        scopes_.pop_back();
        return;
      }
      case ImpStmt::Kind::Output: {
        Var v = eval(s, s.expr);
        Label level = join(pc, v.label);
        if (!flows(level, lat_.bottom()))
          throw Rejected{s.line, fmt::format("output at level {} is not public", show(level))};
        outputs_.push_back(s.expr.kind == ImpExpr::Kind::Number ? s.expr.text
                                                                : (v.value ? "True" : "False"));
        return;
      }
      case ImpStmt::Kind::Upgrade: {
        Var* x = declared(s, s.targets[0]);
        x->label = update(s, pc, x->label, lat_.label(s.label), s.targets[0]);
        return;
      }
      case ImpStmt::Kind::Reset: {
        Var* x = declared(s, s.targets[0]);
        Label target = join(pc, lat_.label(s.label));
        x->label = flows(pc, x->label) ? target : update(s, pc, x->label, target, s.targets[0]);
        x->value = s.expr.value;
        return;
      }
      case ImpStmt::Kind::WithRefs:
        for (const auto& x : s.targets) declared(s, x);
        scopes_.emplace_back();
        exec(s.then_block, pc);
        scopes_.pop_back();
        return;
    }
  }

  Var* declared(const ImpStmt& s, const std::string& x) {
    Var* v = lookup(x);
    if (!v) throw ImpError(fmt::format("line {}: variable '{}' used before assignment", s.line, x));
    return v;
  }

  const ImpProgram& p_;
  bool permissive_;
  const Lattice& lat_;
  const std::map<std::string, bool>& secrets_;
  std::vector<Scope> scopes_;
  std::vector<std::string> outputs_;
};

}  // namespace

std::vector<ImpProgram> parse_imp(const std::string& text) {
  return ImpParser(tokenize(text)).programs();
}

Desugared desugar_imp(const ImpProgram& p, const Lattice& lat,
                      const std::map<std::string, bool>& secrets) {
  return Desugarer(p, lat).run(secrets);
}

PolicyOutcome run_nsu(const ImpProgram& p, const std::map<std::string, bool>& secrets) {
  return PolicyMonitor(p, false, secrets).run();
}

PolicyOutcome run_pu(const ImpProgram& p, const std::map<std::string, bool>& secrets) {
  return PolicyMonitor(p, true, secrets).run();
}

PolicyOutcome run_lio(const ImpProgram& p, Calculus calculus,
                      const std::map<std::string, bool>& secrets, std::uint64_t fuel) {
  Desugared d = desugar_imp(p, Lattice::two_point(), secrets);
  VariantConfig cfg;
  cfg.calculus = calculus;
  cfg.fuel = fuel;
  Machine m(cfg);
  PolicyOutcome out;
  m.on_fi_write = [&](Addr a, const Term& v) {
    auto it = d.output_cells.find(a);
    if (it == d.output_cells.end()) return;
    out.outputs.push_back(it->second.empty() ? display_value(v) : it->second);
  };
  Outcome o = m.run(d.init, d.term);
  out.accepted = o.kind == OutcomeKind::Value;
  if (!out.accepted) {
    out.reason = outcome_name(o.kind);
    if (!o.rule.empty()) out.reason += " in " + o.rule;
    if (!o.detail.empty()) out.reason += ": " + o.detail;
  }
  return out;
}

std::vector<std::map<std::string, bool>> input_assignments(const ImpProgram& p) {
  std::vector<std::map<std::string, bool>> out(1);
  for (const auto& in : p.inputs) {
    std::vector<std::map<std::string, bool>> grown;
    for (const auto& partial : out) {
      std::vector<bool> values =
          in.fixed ? std::vector<bool>{*in.fixed} : std::vector<bool>{false, true};
      for (bool v : values) {
        auto m = partial;
        m[in.name] = v;
        grown.push_back(std::move(m));
      }
    }
    out = std::move(grown);
  }
  return out;
}

ComparisonRow compare_policies(const ImpProgram& p) {
  ComparisonRow row;
  row.program = p.name;
  auto column = [&](const std::function<PolicyOutcome(const std::map<std::string, bool>&)>& run) {
    Verdict v;
    v.accepted = true;
    // Assignments are enumerated false-first, so the last one is all-true.
    for (const auto& secrets : input_assignments(p)) {
      PolicyOutcome o = run(secrets);
      if (!o.accepted && v.accepted) {
        v.accepted = false;
        v.reason = o.reason;
      }
      v.outputs = o.outputs;
    }
    return v;
  };
  row.nsu = column([&](const auto& s) { return run_nsu(p, s); });
  row.pu = column([&](const auto& s) { return run_pu(p, s); });
  row.fs = column([&](const auto& s) { return run_lio(p, Calculus::FS, s); });
  row.fsau = column([&](const auto& s) { return run_lio(p, Calculus::FSAU, s); });
  return row;
}

std::string verdict_string(const Verdict& v) {
  if (!v.accepted) return "Reject";
  if (v.outputs.empty()) return "Accept";
  std::string s = "Accept [";
  for (std::size_t i = 0; i < v.outputs.size(); ++i) s += (i ? "," : "") + v.outputs[i];
  return s + "]";
}

}  // namespace liocell
