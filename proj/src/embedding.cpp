#include "liocell/embedding.hpp"

#include <map>
#include <set>

#include "liocell/syntax.hpp"

namespace liocell {

namespace {

Term clone_with(const Term& t, std::vector<Term> kids) {
  auto n = std::make_shared<Node>(*t);
  n->kids = std::move(kids);
  return n;
}

class Translator {
 public:
  explicit Translator(const FsStore& mu) : mu_(mu) {}

  Term operator()(const Term& t) { return tr(t, mu_); }

 private:
  // Binder names for the expansions; suffixed until they cannot capture.
  std::string fresh(const std::string& base, const std::vector<Term>& avoid) {
    for (;;) {
      std::string x = base + "_" + std::to_string(++counter_);
      bool clash = false;
      for (const auto& a : avoid)
        if (free_vars(a).count(x)) clash = true;
      if (!clash) return x;
    }
  }

  Term tr(const Term& t, const FsStore& mu) {
    const auto& k = t->kids;
    auto kid = [&](std::size_t i) { return tr(k[i], mu); };
    switch (t->kind) {
      case Kind::RefFs: {
        auto it = mu.find(t->addr);
        if (it == mu.end())
          throw EmbedError("fs:" + std::to_string(t->addr) + " is not in the store");
        return mk::wrap(mk::ref_fi(it->second.outer, t->addr));
      }
      case Kind::NewRef: {
        if (t->flavor == Flavor::FI) break;
        Term l = kid(0), v = kid(1);
        std::string i = fresh("i", {l, v}), lc = fresh("lc", {}), o = fresh("o", {});
        return mk::bind(
            mk::new_ref(Flavor::FI, l, v),
            mk::lam(i, mk::bind(mk::get_label(),
                                mk::lam(lc, mk::bind(mk::new_ref(Flavor::FI, mk::var(lc), mk::var(i)),
                                                     mk::lam(o, mk::ret(mk::wrap(mk::var(o)))))))));
      }
      case Kind::ReadRef: {
        if (t->flavor == Flavor::FI) break;
        std::string i = fresh("i", {});
        return mk::bind(mk::read_ref(Flavor::FI, mk::unwrap(kid(0))),
                        mk::lam(i, mk::read_ref(Flavor::FI, mk::var(i))));
      }
      case Kind::LabelOfRef: {
        if (t->flavor == Flavor::FI) break;
        std::string i = fresh("i", {});
        return mk::bind(mk::read_ref(Flavor::FI, mk::unwrap(kid(0))),
                        mk::lam(i, mk::ret(mk::label_of_ref(Flavor::FI, mk::var(i)))));
      }
      case Kind::WriteRef: {
        if (t->flavor == Flavor::FI) break;
        Term r = kid(0), v = kid(1);
        std::string o = fresh("o", {v}), lc = fresh("lc", {v}), i = fresh("i", {v});
        Term body = mk::bind(mk::read_ref(Flavor::FI, mk::var(o)),
                             mk::lam(i, mk::write_ref(Flavor::FI, mk::var(i), v, true)));
        return scoped_update(o, lc, r, body);
      }
      case Kind::Upgrade:
      case Kind::Downgrade: {
        bool up = t->kind == Kind::Upgrade;
        Term r = kid(0), l = kid(1);
        std::string o = fresh("o", {l}), lc = fresh("lc", {l}), i = fresh("i", {l}),
                    cur = fresh("lcur", {l}), n = fresh("n", {l});
        Term target = mk::label_op(up ? LabelOpKind::Join : LabelOpKind::Meet, l,
                                   mk::label_of_ref(Flavor::FI, mk::var(i)));
        Term store_back = mk::write_ref(Flavor::FI, mk::var(o), mk::var(n));
        Term after_alloc =
            up ? mk::seq(mk::copy_ref(mk::var(i), mk::var(n)), store_back) : store_back;
        Term body = mk::bind(
            mk::read_ref(Flavor::FI, mk::var(o)),
            mk::lam(i, mk::bind(mk::get_label(),
                                mk::lam(cur, mk::bind(mk::new_ref(Flavor::FI,
                                                                  mk::label_op(LabelOpKind::Join,
                                                                               mk::var(cur), target),
                                                                  mk::bottom()),
                                                      mk::lam(n, after_alloc))))));
        return scoped_update(o, lc, r, body);
      }
      case Kind::WithRefs: {
        const Term& bag = k[0];
        bool literal = bag->kind == Kind::Bag;
        if (literal)
          for (const auto& e : bag->kids) literal = literal && e->kind == Kind::RefFs;
        if (!literal) return kid(1);
        FsStore restricted;
        for (Addr a : addrs_plus(mu, bag)) {
          auto it = mu.find(a);
          if (it != mu.end()) restricted.emplace(a, it->second);
        }
        return tr(k[1], restricted);
      }
      default:
        break;
    }
    std::vector<Term> kids;
    kids.reserve(k.size());
    for (std::size_t i = 0; i < k.size(); ++i) kids.push_back(kid(i));
    return clone_with(t, std::move(kids));
  }

  // (\o. (getLabel >>= \lc. toLabeled (lc join labelOf o) body) >> return ()) (unwrap r)
  Term scoped_update(const std::string& o, const std::string& lc, const Term& r, const Term& body) {
    Term scope = mk::label_op(LabelOpKind::Join, mk::var(lc), mk::label_of_ref(Flavor::FI, mk::var(o)));
    Term block = mk::bind(mk::get_label(), mk::lam(lc, mk::to_labeled(scope, body)));
    return mk::app(mk::lam(o, mk::seq(block, mk::ret(mk::unit()))), mk::unwrap(r));
  }

  const FsStore& mu_;
  int counter_ = 0;
};

// Pure head reduction used when comparing results. `fix` is left alone so
// that recursive closures compare structurally.
Term head_normal(const Term& t) {
  static const std::set<std::string> pure{"app",     "ifTrue",     "ifFalse", "labelOp",
                                          "labelOf", "labelOf-FI", "unwrap"};
  VariantConfig cfg;
  cfg.fuel = 2000;
  Machine m(cfg);
  MachineState scratch;
  Term cur = t;
  while (m.fuel_left() > 0) {
    StepResult r = m.step(scratch, cur);
    if (r.kind != StepResult::Kind::Next || !pure.count(r.rule)) break;
    cur = r.term;
  }
  return cur;
}

// Walks an FS-side result (already translated) and the FI-side result in
// parallel, growing an address bijection as references are met.
class Matcher {
 public:
  Matcher(const MachineState& fs_final, const MachineState& fi_final)
      : fs_(fs_final), fi_(fi_final), translate_(fs_final.fs) {}

  bool pair_fs(Addr a, Addr b) { return bind(fs_map_, fs_inv_, a, b, fs_todo_); }
  bool pair_fi(Addr a, Addr b) { return bind(fi_map_, fi_inv_, a, b, fi_todo_); }

  // Compares an FS-world term with an FI-world term.
  bool terms(const Term& fs_term, const Term& fi_term) {
    Term lhs;
    try {
      lhs = translate_(fs_term);
    } catch (const EmbedError& e) {
      return fail(e.what());
    }
    std::map<std::string, std::string> binders;
    return same(lhs, fi_term, binders, 0);
  }

  // Drains pending cell pairs; true if every reachable cell agrees.
  bool stores() {
    while (!fs_todo_.empty() || !fi_todo_.empty()) {
      if (!fs_todo_.empty()) {
        auto [a, b] = fs_todo_.back();
        fs_todo_.pop_back();
        if (!fs_cell(a, b)) return false;
      } else {
        auto [a, b] = fi_todo_.back();
        fi_todo_.pop_back();
        if (!fi_cell(a, b)) return false;
      }
    }
    return true;
  }

  const std::string& reason() const { return reason_; }

 private:
  using Map = std::map<Addr, Addr>;
  using Todo = std::vector<std::pair<Addr, Addr>>;

  bool fail(const std::string& why) {
    if (reason_.empty()) reason_ = why;
    return false;
  }

  bool bind(Map& fwd, Map& inv, Addr a, Addr b, Todo& todo) {
    auto f = fwd.find(a);
    auto i = inv.find(b);
    if (f == fwd.end() && i == inv.end()) {
      fwd[a] = b;
      inv[b] = a;
      todo.emplace_back(a, b);
      return true;
    }
    if (f != fwd.end() && f->second == b) return true;
    return fail("address renaming is not a bijection at " + std::to_string(a) + "/" +
                std::to_string(b));
  }

  bool fs_cell(Addr a, Addr b) {
    auto c = fs_.fs.find(a);
    auto outer = fi_.fi.find(b);
    if (c == fs_.fs.end() || outer == fi_.fi.end())
      return fail("missing cell for fs:" + std::to_string(a));
    Term inner_ref = normalize_value(outer->second.value);
    if (outer->second.label != c->second.outer || inner_ref->kind != Kind::RefFi)
      return fail("outer cell of fs:" + std::to_string(a) + " differs");
    auto inner = fi_.fi.find(inner_ref->addr);
    if (inner == fi_.fi.end()) return fail("inner cell of fs:" + std::to_string(a) + " missing");
    if (inner_ref->label != c->second.inner || inner->second.label != c->second.inner)
      return fail("label of fs:" + std::to_string(a) + " differs: " + to_string(c->second.inner) +
                  " vs " + to_string(inner->second.label));
    if (!terms(c->second.value, inner->second.value))
      return fail("contents of fs:" + std::to_string(a) + " differ");
    return true;
  }

  bool fi_cell(Addr a, Addr b) {
    auto x = fs_.fi.find(a);
    auto y = fi_.fi.find(b);
    if (x == fs_.fi.end() || y == fi_.fi.end())
      return fail("missing cell for fi:" + std::to_string(a));
    if (x->second.label != y->second.label) return fail("label of fi:" + std::to_string(a) + " differs");
    if (!terms(x->second.value, y->second.value))
      return fail("contents of fi:" + std::to_string(a) + " differ");
    return true;
  }

  bool same(const Term& x0, const Term& y0, std::map<std::string, std::string>& binders, int depth) {
    if (depth > 400) return fail("comparison depth limit");
    Term x = head_normal(x0), y = head_normal(y0);
    // Destroyed contents: the FS side diverges where the FI side holds the
    // undefined placeholder.
    if (x->kind == Kind::Diverge || x->kind == Kind::Bottom)
      return y->kind == Kind::Diverge || y->kind == Kind::Bottom ||
             fail("expected destroyed value, got " + pretty(y));
    if (x->kind != y->kind)
      return fail("shape mismatch: " + pretty(x).substr(0, 60) + " vs " + pretty(y).substr(0, 60));
    if (x->flavor != y->flavor || x->op != y->op || x->diverge_on_fail != y->diverge_on_fail)
      return fail("node mismatch at " + pretty(x).substr(0, 60));
    switch (x->kind) {
      case Kind::Var: {
        auto it = binders.find(x->name);
        std::string want = it == binders.end() ? x->name : it->second;
        return want == y->name || fail("variable mismatch " + x->name + " vs " + y->name);
      }
      case Kind::Lam: {
        auto saved = binders;
        binders[x->name] = y->name;
        bool ok = same(x->kids[0], y->kids[0], binders, depth + 1);
        binders = std::move(saved);
        return ok;
      }
      case Kind::LabelConst:
      case Kind::Labeled:
        if (x->label != y->label) return fail("label mismatch");
        break;
      case Kind::WrapRef: {
        const Term& rx = x->kids[0];
        Term ry = head_normal(y->kids[0]);
        if (rx->kind == Kind::RefFi && ry->kind == Kind::RefFi) {
          if (rx->label != ry->label) return fail("reference label mismatch");
          return pair_fs(rx->addr, ry->addr);
        }
        break;
      }
      case Kind::RefFi:
        if (x->label != y->label) return fail("reference label mismatch");
        return pair_fi(x->addr, y->addr);
      default:
        break;
    }
    if (x->kids.size() != y->kids.size()) return fail("arity mismatch");
    for (std::size_t i = 0; i < x->kids.size(); ++i)
      if (!same(x->kids[i], y->kids[i], binders, depth + 1)) return false;
    return true;
  }

  const MachineState& fs_;
  const MachineState& fi_;
  Translator translate_;
  Map fs_map_, fs_inv_, fi_map_, fi_inv_;
  Todo fs_todo_, fi_todo_;
  std::string reason_;
};

bool is_bottom_error(const Outcome& o) {
  return o.kind == OutcomeKind::MonitorError && o.error == ErrorKind::StuckRedex &&
         o.rule == "bottom";
}

// Normalizes the termination mode so both sides can be compared.
OutcomeKind mode(const Outcome& o) {
  return is_bottom_error(o) ? OutcomeKind::Diverged : o.kind;
}

}  // namespace

Term embed_term(const Term& t, const MachineState& sigma) { return Translator(sigma.fs)(t); }

MachineState embed_state(const MachineState& sigma) {
  MachineState out;
  out.lcur = sigma.lcur;
  out.next_addr = sigma.next_addr;
  Translator tr(sigma.fs);
  for (const auto& [a, cell] : sigma.fi) out.fi[a] = FiCell{cell.label, tr(cell.value)};
  for (const auto& [a, cell] : sigma.fs) {
    Addr b = out.next_addr++;
    out.fi[a] = FiCell{cell.outer, mk::ref_fi(cell.inner, b)};
    out.fi[b] = FiCell{cell.inner, tr(cell.value)};
  }
  return out;
}

bool contains_fs_syntax(const Term& t) {
  switch (t->kind) {
    case Kind::NewRef:
    case Kind::ReadRef:
    case Kind::WriteRef:
    case Kind::LabelOfRef:
      if (t->flavor == Flavor::FS) return true;
      break;
    case Kind::Upgrade:
    case Kind::Downgrade:
    case Kind::WithRefs:
    case Kind::RefFs:
    case Kind::UpgradeStore:
      return true;
    default:
      break;
  }
  for (const auto& k : t->kids)
    if (contains_fs_syntax(k)) return true;
  return false;
}

CoSimReport cosimulate(const Term& t, const MachineState& sigma, std::uint64_t fuel,
                       bool keep_traces) {
  CoSimReport rep;
  VariantConfig fs_cfg;
  fs_cfg.calculus = Calculus::FS;
  fs_cfg.fuel = fuel;
  VariantConfig fi_cfg;
  fi_cfg.calculus = Calculus::FI;
  // Each FS primitive expands to a handful of FI steps.
  fi_cfg.fuel = fuel * 40;

  auto recorder = [keep_traces](std::vector<std::string>& lines) -> TraceSink {
    if (!keep_traces) return {};
    return [&lines](std::uint64_t n, const std::string& rule, const MachineState& s,
                    const Term& term) { lines.push_back(trace_line(n, rule, s.lcur, term)); };
  };

  Term translated;
  MachineState translated_state;
  try {
    translated = embed_term(t, sigma);
    translated_state = embed_state(sigma);
  } catch (const EmbedError& e) {
    rep.reason = std::string("translation failed: ") + e.what();
    return rep;
  }
  rep.fs = Machine(fs_cfg).run(sigma, t, recorder(rep.fs_trace));
  rep.fi = Machine(fi_cfg).run(translated_state, translated, recorder(rep.fi_trace));

  OutcomeKind a = mode(rep.fs), b = mode(rep.fi);
  if (a != b) {
    rep.reason = std::string("termination differs: fs ") + outcome_name(rep.fs.kind) + " (" +
                 rep.fs.rule + ") vs fi " + outcome_name(rep.fi.kind) + " (" + rep.fi.rule + ")";
    return rep;
  }
  if (a == OutcomeKind::MonitorError || a == OutcomeKind::FuelExhausted) {
    rep.match = true;
    return rep;
  }
  if (rep.fs.state.lcur != rep.fi.state.lcur) {
    rep.reason = "final lcur differs: " + to_string(rep.fs.state.lcur) + " vs " +
                 to_string(rep.fi.state.lcur);
    return rep;
  }
  Matcher m(rep.fs.state, rep.fi.state);
  bool ok = true;
  // Cells present initially keep their addresses under the translation.
  for (const auto& [addr, cell] : sigma.fs) ok = ok && m.pair_fs(addr, addr);
  for (const auto& [addr, cell] : sigma.fi) ok = ok && m.pair_fi(addr, addr);
  if (ok && a == OutcomeKind::Value) ok = m.terms(rep.fs.value, rep.fi.value);
  ok = ok && m.stores();
  rep.match = ok;
  if (!ok) rep.reason = m.reason();
  return rep;
}

}  // namespace liocell
