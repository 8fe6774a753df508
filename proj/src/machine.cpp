#include "liocell/machine.hpp"

#include <optional>
#include <set>
#include <utility>

#include "liocell/syntax.hpp"

namespace liocell {

const char* calculus_name(Calculus c) {
  switch (c) {
    case Calculus::Base: return "base";
    case Calculus::FI: return "fi";
    case Calculus::FS: return "fs";
    case Calculus::FSAU: return "fs-au";
  }
  return "?";
}

const char* security_name(Security s) { return s == Security::Secure ? "secure" : "naive"; }

const char* outcome_name(OutcomeKind k) {
  switch (k) {
    case OutcomeKind::Value: return "Value";
    case OutcomeKind::Diverged: return "Diverged";
    case OutcomeKind::MonitorError: return "MonitorError";
    case OutcomeKind::FuelExhausted: return "FuelExhausted";
  }
  return "?";
}

const char* error_name(ErrorKind k) {
  return k == ErrorKind::LabelCheck ? "LabelCheck" : "StuckRedex";
}

std::string trace_line(std::uint64_t step, const std::string& rule, Label lcur, const Term& term) {
  std::string text = pretty(term);
  if (text.size() > 120) text.resize(120);
  return "step=" + std::to_string(step) + " rule=" + rule + " lcur=" + to_string(lcur) +
         " term=" + text;
}

namespace {

// Any label mentioned by t; impure redexes probed below need an lcur from the
// same lattice even though their result is discarded.
std::optional<Label> some_label(const Term& t) {
  if (t->kind == Kind::LabelConst || t->kind == Kind::Labeled || t->kind == Kind::RefFi)
    return t->label;
  for (const auto& k : t->kids)
    if (auto l = some_label(k)) return l;
  return std::nullopt;
}

}  // namespace

Term normalize_value(const Term& v, std::uint64_t fuel) {
  static const std::set<std::string> pure{"app",     "fix",        "ifTrue", "ifFalse",
                                          "labelOp", "labelOf",    "labelOf-FI",
                                          "unwrap"};
  VariantConfig cfg;
  cfg.calculus = Calculus::FS;
  cfg.fuel = fuel;
  Machine m(cfg);
  MachineState scratch;
  scratch.lcur = some_label(v).value_or(Lattice::two_point().bottom());
  Term t = v;
  while (m.fuel_left() > 0) {
    StepResult r = m.step(scratch, t);
    if (r.kind != StepResult::Kind::Next || !pure.count(r.rule)) break;
    t = r.term;
  }
  switch (t->kind) {
    case Kind::Labeled:
    case Kind::Bag:
    case Kind::WrapRef:
    case Kind::LioVal: {
      auto n = std::make_shared<Node>(*t);
      for (auto& kid : n->kids) kid = normalize_value(kid, fuel);
      return n;
    }
    default:
      return t;
  }
}

std::string display_value(const Term& v0) {
  Term v = normalize_value(v0);
  switch (v->kind) {
    case Kind::Unit: return "()";
    case Kind::True: return "True";
    case Kind::False: return "False";
    default: return pretty(v);
  }
}

struct Machine::Reduction {
  enum class Status { Stepped, NoRedex, Terminal, Fork };
  Status status = Status::NoRedex;
  Term term;
  std::string rule;
  Term forked;
  OutcomeKind terminal = OutcomeKind::MonitorError;
  ErrorKind error = ErrorKind::StuckRedex;
  std::string detail;
};

namespace {

using Red = Machine::Reduction;

Term replace_kid(const Term& t, std::size_t i, Term kid) {
  auto n = std::make_shared<Node>(*t);
  n->kids[i] = std::move(kid);
  return n;
}

std::string name(Label l) { return to_string(l); }

}  // namespace

namespace {
Red stepped(Term t, std::string rule) {
  Red r;
  r.status = Red::Status::Stepped;
  r.term = std::move(t);
  r.rule = std::move(rule);
  return r;
}

Red terminal(OutcomeKind kind, ErrorKind err, std::string rule, std::string detail, Term at) {
  Red r;
  r.status = Red::Status::Terminal;
  r.terminal = kind;
  r.error = err;
  r.rule = std::move(rule);
  r.detail = std::move(detail);
  r.term = std::move(at);
  return r;
}

Red from_outcome(const Outcome& o) {
  return terminal(o.kind, o.error, o.rule, o.detail, o.value);
}

// Sequenced upgrades of every address in the store, ascending.
Term upgrade_chain(const FsStore& fs, Label l) {
  if (fs.empty()) return mk::ret(mk::unit());
  std::vector<Term> ups;
  for (const auto& [a, cell] : fs) ups.push_back(mk::upgrade(mk::ref_fs(a), mk::label_const(l)));
  Term chain = ups.back();
  for (std::size_t i = ups.size() - 1; i-- > 0;) chain = mk::seq(ups[i], chain);
  return chain;
}
}  // namespace

Machine::Machine(VariantConfig cfg) : cfg_(cfg), fuel_left_(cfg.fuel) {}

bool Machine::allows_fi() const { return cfg_.calculus != Calculus::Base; }
bool Machine::allows_fs() const {
  return cfg_.calculus == Calculus::FS || cfg_.calculus == Calculus::FSAU;
}

Red Machine::stuck(const Term& at, const std::string& why) {
  if (at->kind == Kind::Bottom)
    return terminal(OutcomeKind::MonitorError, ErrorKind::StuckRedex, "bottom",
                    "undefined value reached evaluation position", at);
  return terminal(OutcomeKind::MonitorError, ErrorKind::StuckRedex, "stuck", why, at);
}

Red Machine::label_error(const std::string& rule, const std::string& check) {
  return terminal(OutcomeKind::MonitorError, ErrorKind::LabelCheck, rule, check, nullptr);
}

Red Machine::reduce_kid(const Term& t, std::size_t i, MachineState& s) {
  Red r = reduce(t->kids[i], s);
  if (r.status == Red::Status::Stepped || r.status == Red::Status::Fork)
    r.term = replace_kid(t, i, r.term);
  return r;
}

Red Machine::unlabel_rule(const Term& labeled, MachineState& s) {
  Label raised = join(s.lcur, labeled->label);
  std::string rule = "unlabel";
  if (cfg_.calculus == Calculus::FSAU) {
    Outcome up = sub_run(s, mk::upgrade_store(mk::label_const(raised)));
    s = up.state;
    if (up.kind != OutcomeKind::Value) return from_outcome(up);
    rule = "unlabel-au";
  }
  s.lcur = raised;
  const Term& payload = labeled->kids[0];
  if (payload->kind == Kind::Diverge) return stepped(payload, rule);
  if (payload->kind == Kind::Bottom)
    return terminal(OutcomeKind::MonitorError, ErrorKind::StuckRedex, "bottom",
                    "unlabel of an undefined value", payload);
  return stepped(mk::ret(payload), rule);
}

Outcome Machine::sub_run(MachineState s, Term t) {
  for (;;) {
    if (t->kind == Kind::LioVal) {
      Outcome o;
      o.kind = OutcomeKind::Value;
      o.value = t->kids[0];
      o.state = std::move(s);
      return o;
    }
    StepResult r = step(s, t);
    if (r.kind == StepResult::Kind::Terminal) return r.outcome;
    if (r.kind == StepResult::Kind::Fork) {
      Outcome o;
      o.kind = OutcomeKind::MonitorError;
      o.error = ErrorKind::StuckRedex;
      o.rule = "forkLIO";
      o.detail = "fork inside a nested evaluation";
      o.state = r.state;
      o.value = r.term;
      return o;
    }
    s = std::move(r.state);
    t = std::move(r.term);
  }
}

Red Machine::to_labeled(const Term& t, MachineState& s) {
  if (cfg_.concurrent)
    return terminal(OutcomeKind::MonitorError, ErrorKind::StuckRedex, "toLabeled",
                    "toLabeled is not part of the concurrent calculus", t);
  Label l = t->kids[0]->label;
  if (!flows(s.lcur, l))
    return label_error("toLabeled", "lcur " + name(s.lcur) + " must flow to " + name(l));
  Outcome inner = sub_run(s, t->kids[1]);
  if (inner.kind != OutcomeKind::Value) {
    s = inner.state;
    return from_outcome(inner);
  }
  if (!flows(inner.state.lcur, l)) {
    s.fi = inner.state.fi;
    s.fs = inner.state.fs;
    s.next_addr = inner.state.next_addr;
    return label_error("toLabeled",
                       "final lcur " + name(inner.state.lcur) + " must flow to " + name(l));
  }
  // Outer lcur survives; stores from the block are kept.
  s.fi = std::move(inner.state.fi);
  s.fs = std::move(inner.state.fs);
  s.next_addr = inner.state.next_addr;
  return stepped(mk::label(mk::label_const(l), inner.value), "toLabeled");
}

Red Machine::fs_write(const Term& t, MachineState& s) {
  Addr a = t->kids[0]->addr;
  auto it = s.fs.find(a);
  if (it == s.fs.end()) return stuck(t->kids[0], "reference outside scope");
  FsCell& cell = it->second;
  if (cfg_.security == Security::Naive) {
    cell.inner = join(cell.inner, s.lcur);
    cell.value = t->kids[1];
    return stepped(mk::ret(mk::unit()), "writeRef-FS-naive");
  }
  bool ok = cfg_.split_write_check ? flows(s.lcur, cell.outer) && flows(s.lcur, cell.inner)
                                   : flows(s.lcur, join(cell.outer, cell.inner));
  if (!ok) return stepped(mk::unlabel(mk::labeled(cell.outer, mk::diverge())), "writeRef-FS-fail");
  cell.value = t->kids[1];
  return stepped(mk::ret(mk::unit()), "writeRef-FS");
}

Red Machine::with_refs(const Term& t, MachineState& s) {
  const Term& bag = t->kids[0];
  if (!is_value(bag)) return reduce_kid(t, 0, s);
  if (bag->kind != Kind::Bag) return stuck(bag, "withRefs expects a bag");
  const Term& body = t->kids[1];
  if (body->kind == Kind::LioVal) return stepped(body, "withRefs-Done");
  if (is_value(body)) return stuck(body, "withRefs body is not a computation");

  if (cfg_.concurrent && body->kind == Kind::WithRefs && is_value(body->kids[0]) &&
      body->kids[0]->kind == Kind::Bag) {
    std::set<Addr> both;
    std::set<Addr> inner = addrs(body->kids[0]);
    for (Addr a : addrs(bag))
      if (inner.count(a)) both.insert(a);
    Red r = with_refs(mk::with_refs(addrs_inv(both), body->kids[1]), s);
    if (r.status == Red::Status::Stepped || r.status == Red::Status::Fork)
      r.rule = "withRefs-Opt(" + r.rule + ")";
    return r;
  }

  MachineState inner = s;
  inner.fs.clear();
  for (Addr a : addrs_plus(s.fs, bag)) {
    auto it = s.fs.find(a);
    if (it != s.fs.end()) inner.fs.emplace(a, it->second);
  }
  Red r = reduce(body, inner);
  s.lcur = inner.lcur;
  s.fi = std::move(inner.fi);
  s.next_addr = inner.next_addr;
  FsStore merged = merge_stores(inner.fs, s.fs);
  std::set<Addr> scope;
  for (const auto& [a, cell] : inner.fs) scope.insert(a);
  s.fs = std::move(merged);
  if (r.status == Red::Status::Stepped || r.status == Red::Status::Fork) {
    r.term = mk::with_refs(addrs_inv(scope), r.term);
    r.rule = "withRefs-Ctx(" + r.rule + ")";
  }
  return r;
}

Red Machine::reduce(const Term& t, MachineState& s) {
  const auto& k = t->kids;
  auto need_value = [&](std::size_t i) { return !is_value(k[i]); };
  auto not_available = [&](const char* what) {
    return terminal(OutcomeKind::MonitorError, ErrorKind::StuckRedex, "stuck",
                    std::string(what) + " is not available in calculus " +
                        calculus_name(cfg_.calculus),
                    t);
  };

  switch (t->kind) {
    case Kind::Var:
      return stuck(t, "free variable '" + t->name + "'");

    case Kind::App:
      if (need_value(0)) return reduce_kid(t, 0, s);
      if (k[0]->kind != Kind::Lam) return stuck(k[0], "application of a non-function");
      return stepped(subst(k[0]->kids[0], k[0]->name, k[1]), "app");

    case Kind::Fix:
      if (need_value(0)) return reduce_kid(t, 0, s);
      if (k[0]->kind != Kind::Lam) return stuck(k[0], "fix of a non-function");
      return stepped(subst(k[0]->kids[0], k[0]->name, t), "fix");

    case Kind::If:
      if (need_value(0)) return reduce_kid(t, 0, s);
      if (k[0]->kind == Kind::True) return stepped(k[1], "ifTrue");
      if (k[0]->kind == Kind::False) return stepped(k[2], "ifFalse");
      return stuck(k[0], "if condition is not a Boolean");

    case Kind::LabelOp: {
      if (need_value(0)) return reduce_kid(t, 0, s);
      if (need_value(1)) return reduce_kid(t, 1, s);
      if (k[0]->kind != Kind::LabelConst) return stuck(k[0], "label operand expected");
      if (k[1]->kind != Kind::LabelConst) return stuck(k[1], "label operand expected");
      Label a = k[0]->label, b = k[1]->label;
      switch (t->op) {
        case LabelOpKind::Join: return stepped(mk::label_const(join(a, b)), "labelOp");
        case LabelOpKind::Meet: return stepped(mk::label_const(meet(a, b)), "labelOp");
        case LabelOpKind::Flows: return stepped(mk::boolean(flows(a, b)), "labelOp");
      }
      return stuck(t, "unknown label operator");
    }

    case Kind::Return:
      return stepped(mk::lio(k[0]), "return");

    case Kind::Bind:
      if (need_value(0)) return reduce_kid(t, 0, s);
      if (k[0]->kind != Kind::LioVal) return stuck(k[0], "bind of a non-computation");
      return stepped(mk::app(k[1], k[0]->kids[0]), "bind");

    case Kind::GetLabel:
      return stepped(mk::ret(mk::label_const(s.lcur)), "getLabel");

    case Kind::MkLabel: {
      if (need_value(0)) return reduce_kid(t, 0, s);
      if (k[0]->kind != Kind::LabelConst) return stuck(k[0], "label expected");
      Label l = k[0]->label;
      if (!flows(s.lcur, l))
        return label_error("label", "lcur " + name(s.lcur) + " must flow to " + name(l));
      return stepped(mk::ret(mk::labeled(l, k[1])), "label");
    }

    case Kind::Unlabel:
      if (need_value(0)) return reduce_kid(t, 0, s);
      if (k[0]->kind != Kind::Labeled) return stuck(k[0], "unlabel of a non-labeled value");
      return unlabel_rule(k[0], s);

    case Kind::LabelOf:
      if (need_value(0)) return reduce_kid(t, 0, s);
      if (k[0]->kind != Kind::Labeled) return stuck(k[0], "labelOf of a non-labeled value");
      return stepped(mk::label_const(k[0]->label), "labelOf");

    case Kind::ToLabeled:
      if (need_value(0)) return reduce_kid(t, 0, s);
      if (k[0]->kind != Kind::LabelConst) return stuck(k[0], "label expected");
      return to_labeled(t, s);

    case Kind::NewRef: {
      if (t->flavor == Flavor::FI ? !allows_fi() : !allows_fs()) return not_available("newRef");
      if (need_value(0)) return reduce_kid(t, 0, s);
      if (k[0]->kind != Kind::LabelConst) return stuck(k[0], "label expected");
      Label l = k[0]->label;
      const char* rule = t->flavor == Flavor::FI ? "newRef-FI" : "newRef-FS";
      if (!flows(s.lcur, l))
        return label_error(rule, "lcur " + name(s.lcur) + " must flow to " + name(l));
      Addr a = s.next_addr++;
      if (t->flavor == Flavor::FI) {
        s.fi[a] = FiCell{l, k[1]};
        return stepped(mk::ret(mk::ref_fi(l, a)), rule);
      }
      s.fs[a] = FsCell{s.lcur, l, k[1]};
      return stepped(mk::ret(mk::ref_fs(a)), rule);
    }

    case Kind::ReadRef: {
      if (t->flavor == Flavor::FI ? !allows_fi() : !allows_fs()) return not_available("readRef");
      if (need_value(0)) return reduce_kid(t, 0, s);
      if (t->flavor == Flavor::FI) {
        if (k[0]->kind != Kind::RefFi) return stuck(k[0], "FI reference expected");
        auto it = s.fi.find(k[0]->addr);
        if (it == s.fi.end()) return stuck(k[0], "dangling reference");
        return stepped(mk::unlabel(mk::labeled(it->second.label, it->second.value)),
                       "readRef-FI");
      }
      if (k[0]->kind != Kind::RefFs) return stuck(k[0], "FS reference expected");
      auto it = s.fs.find(k[0]->addr);
      if (it == s.fs.end()) return stuck(k[0], "reference outside scope");
      const FsCell& c = it->second;
      return stepped(mk::unlabel(mk::labeled(join(c.outer, c.inner), c.value)), "readRef-FS");
    }

    case Kind::WriteRef: {
      if (t->flavor == Flavor::FI ? !allows_fi() : !allows_fs()) return not_available("writeRef");
      if (need_value(0)) return reduce_kid(t, 0, s);
      if (t->flavor == Flavor::FS) {
        if (k[0]->kind != Kind::RefFs) return stuck(k[0], "FS reference expected");
        return fs_write(t, s);
      }
      if (k[0]->kind != Kind::RefFi) return stuck(k[0], "FI reference expected");
      Addr a = k[0]->addr;
      Label l = k[0]->label;
      if (!s.fi.count(a)) return stuck(k[0], "dangling reference");
      if (!flows(s.lcur, l)) {
        if (t->diverge_on_fail) return stepped(mk::diverge(), "writeRef-FI-diverge");
        return label_error("writeRef-FI", "lcur " + name(s.lcur) + " must flow to " + name(l));
      }
      s.fi[a] = FiCell{l, k[1]};
      if (on_fi_write) on_fi_write(a, k[1]);
      return stepped(mk::ret(mk::unit()), "writeRef-FI");
    }

    case Kind::LabelOfRef: {
      if (t->flavor == Flavor::FI ? !allows_fi() : !allows_fs())
        return not_available("labelOfRef");
      if (need_value(0)) return reduce_kid(t, 0, s);
      if (t->flavor == Flavor::FI) {
        if (k[0]->kind != Kind::RefFi) return stuck(k[0], "FI reference expected");
        return stepped(mk::label_const(k[0]->label), "labelOf-FI");
      }
      if (k[0]->kind != Kind::RefFs) return stuck(k[0], "FS reference expected");
      auto it = s.fs.find(k[0]->addr);
      if (it == s.fs.end()) return stuck(k[0], "reference outside scope");
      return stepped(
          mk::unlabel(mk::labeled(it->second.outer, mk::label_const(it->second.inner))),
          "labelOf-FS");
    }

    case Kind::CopyRef: {
      if (!allows_fi()) return not_available("copyRef");
      if (need_value(0)) return reduce_kid(t, 0, s);
      if (need_value(1)) return reduce_kid(t, 1, s);
      if (k[0]->kind != Kind::RefFi) return stuck(k[0], "FI reference expected");
      if (k[1]->kind != Kind::RefFi) return stuck(k[1], "FI reference expected");
      auto src = s.fi.find(k[0]->addr);
      if (src == s.fi.end() || !s.fi.count(k[1]->addr)) return stuck(t, "dangling reference");
      Label l1 = k[0]->label, l2 = k[1]->label;
      if (!flows(l1, l2))
        return label_error("copyRef", "source " + name(l1) + " must flow to target " + name(l2));
      if (!flows(s.lcur, l2))
        return label_error("copyRef", "lcur " + name(s.lcur) + " must flow to " + name(l2));
      Term v = src->second.value;
      s.fi[k[1]->addr] = FiCell{l2, v};
      if (on_fi_write) on_fi_write(k[1]->addr, v);
      return stepped(mk::ret(mk::unit()), "copyRef");
    }

    case Kind::Upgrade:
    case Kind::Downgrade: {
      bool up = t->kind == Kind::Upgrade;
      if (!allows_fs()) return not_available(up ? "upgrade" : "downgrade");
      if (need_value(0)) return reduce_kid(t, 0, s);
      if (need_value(1)) return reduce_kid(t, 1, s);
      if (k[0]->kind != Kind::RefFs) return stuck(k[0], "FS reference expected");
      if (k[1]->kind != Kind::LabelConst) return stuck(k[1], "label expected");
      auto it = s.fs.find(k[0]->addr);
      if (it == s.fs.end()) return stuck(k[0], "reference outside scope");
      FsCell& c = it->second;
      const char* rule = up ? "upgradeRef" : "downgradeRef";
      if (!flows(s.lcur, c.outer))
        return label_error(rule, "lcur " + name(s.lcur) + " must flow to label-on-label " +
                                     name(c.outer));
      Label l = k[1]->label;
      if (up) {
        c.inner = join(c.inner, l);
      } else {
        c.inner = join(c.outer, meet(c.inner, l));
        c.value = mk::diverge();
      }
      return stepped(mk::ret(mk::unit()), rule);
    }

    case Kind::WithRefs:
      if (!allows_fs()) return not_available("withRefs");
      return with_refs(t, s);

    case Kind::Fork: {
      if (!cfg_.concurrent)
        return terminal(OutcomeKind::MonitorError, ErrorKind::StuckRedex, "forkLIO",
                        "forkLIO requires the concurrent runtime", t);
      Red r = stepped(mk::ret(mk::unit()), "forkLIO");
      r.status = Red::Status::Fork;
      r.forked = k[0];
      return r;
    }

    case Kind::Bag:
      for (std::size_t i = 0; i < k.size(); ++i)
        if (need_value(i)) return reduce_kid(t, i, s);
      return Red{};

    case Kind::Unwrap:
      if (need_value(0)) return reduce_kid(t, 0, s);
      if (k[0]->kind != Kind::WrapRef) return stuck(k[0], "unwrap of a non-wrapped reference");
      return stepped(k[0]->kids[0], "unwrap");

    case Kind::Diverge:
      return terminal(OutcomeKind::Diverged, ErrorKind::StuckRedex, "diverge", "", t);

    case Kind::UpgradeStore:
      if (need_value(0)) return reduce_kid(t, 0, s);
      if (k[0]->kind != Kind::LabelConst) return stuck(k[0], "label expected");
      return stepped(upgrade_chain(s.fs, k[0]->label), "upgradeStore");

    case Kind::True:
    case Kind::False:
    case Kind::Unit:
    case Kind::Lam:
    case Kind::LabelConst:
    case Kind::LioVal:
    case Kind::Labeled:
    case Kind::RefFi:
    case Kind::RefFs:
    case Kind::WrapRef:
    case Kind::Bottom:
      return Red{};
  }
  return stuck(t, "unknown term");
}

StepResult Machine::step(const MachineState& state, const Term& term) {
  StepResult out;
  if (fuel_left_ == 0) {
    out.kind = StepResult::Kind::Terminal;
    out.outcome.kind = OutcomeKind::FuelExhausted;
    out.outcome.state = state;
    out.outcome.value = term;
    return out;
  }
  --fuel_left_;
  MachineState s = state;
  Red r = reduce(term, s);
  switch (r.status) {
    case Red::Status::Stepped:
      out.kind = StepResult::Kind::Next;
      out.term = std::move(r.term);
      out.state = std::move(s);
      out.rule = std::move(r.rule);
      return out;
    case Red::Status::Fork:
      out.kind = StepResult::Kind::Fork;
      out.term = std::move(r.term);
      out.state = std::move(s);
      out.rule = std::move(r.rule);
      out.forked = std::move(r.forked);
      return out;
    case Red::Status::NoRedex:
      r = stuck(term, "value is not a computation");
      break;
    case Red::Status::Terminal:
      break;
  }
  out.kind = StepResult::Kind::Terminal;
  out.outcome.kind = r.terminal;
  out.outcome.error = r.error;
  out.outcome.rule = std::move(r.rule);
  out.outcome.detail = std::move(r.detail);
  out.outcome.value = r.term ? r.term : term;
  out.outcome.state = std::move(s);
  return out;
}

Outcome Machine::run(MachineState state, Term term, const TraceSink& trace) {
  fuel_left_ = cfg_.fuel;
  std::uint64_t steps = 0;
  for (;;) {
    if (term->kind == Kind::LioVal) {
      Outcome o;
      o.kind = OutcomeKind::Value;
      o.value = term->kids[0];
      o.state = std::move(state);
      o.steps = steps;
      return o;
    }
    StepResult r = step(state, term);
    if (r.kind == StepResult::Kind::Terminal) {
      r.outcome.steps = steps;
      return r.outcome;
    }
    ++steps;
    state = std::move(r.state);
    term = std::move(r.term);
    if (trace) trace(steps, r.rule, state, term);
  }
}

Outcome upgrade_store(const MachineState& state, Label l) {
  VariantConfig cfg;
  cfg.calculus = Calculus::FSAU;
  cfg.fuel = state.fs.size() * 4 + 8;
  Machine m(cfg);
  return m.run(state, mk::upgrade_store(mk::label_const(l)));
}

}  // namespace liocell
