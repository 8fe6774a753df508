#include "liocell/harness.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <random>

#include "liocell/syntax.hpp"
#include "liocell/typecheck.hpp"

namespace liocell {

namespace {

const Lattice& lat() { return Lattice::two_point(); }
Label low() { return lat().bottom(); }
Label high() { return lat().top(); }

Term with_kids(const Term& t, std::vector<Term> kids) {
  auto n = std::make_shared<Node>(*t);
  n->kids = std::move(kids);
  return n;
}

// Address renaming for one observation: visible cells get 1..n, the rest 0.
struct Renumbering {
  std::map<Addr, Addr> fi, fs;
};

Renumbering renumber(const FiStore& fi, const FsStore& fs, Label level) {
  std::map<Addr, Flavor> visible;
  for (const auto& [a, c] : fi)
    if (flows(c.label, level)) visible[a] = Flavor::FI;
  for (const auto& [a, c] : fs)
    if (flows(c.outer, level)) visible[a] = Flavor::FS;
  Renumbering r;
  Addr next = 1;
  for (const auto& [a, f] : visible) (f == Flavor::FI ? r.fi : r.fs)[a] = next++;
  return r;
}

Term canon(const Term& t, const Renumbering& r, Label level) {
  switch (t->kind) {
    case Kind::Labeled:
      if (!flows(t->label, level)) return mk::labeled(t->label, hole());
      break;
    case Kind::RefFi:
    case Kind::RefFs: {
      const auto& m = t->kind == Kind::RefFi ? r.fi : r.fs;
      auto it = m.find(t->addr);
      auto n = std::make_shared<Node>(*t);
      n->addr = it == m.end() ? 0 : it->second;
      return n;
    }
    default:
      break;
  }
  if (t->kids.empty()) return t;
  std::vector<Term> kids;
  kids.reserve(t->kids.size());
  for (const auto& k : t->kids) kids.push_back(canon(k, r, level));
  return with_kids(t, std::move(kids));
}

MachineState erase_store(const FiStore& fi, const FsStore& fs, const Renumbering& r,
                         Label lcur, Label level) {
  MachineState out;
  out.lcur = lcur;
  out.next_addr = 0;
  for (const auto& [a, c] : fi)
    if (auto it = r.fi.find(a); it != r.fi.end())
      out.fi[it->second] = FiCell{c.label, canon(normalize_value(c.value), r, level)};
  for (const auto& [a, c] : fs)
    if (auto it = r.fs.find(a); it != r.fs.end())
      out.fs[it->second] = FsCell{
          c.outer, c.inner,
          flows(c.inner, level) ? canon(normalize_value(c.value), r, level) : hole()};
  return out;
}

bool same_store(const MachineState& a, const MachineState& b) {
  if (a.fi.size() != b.fi.size() || a.fs.size() != b.fs.size()) return false;
  for (auto i = a.fi.begin(), j = b.fi.begin(); i != a.fi.end(); ++i, ++j)
    if (i->first != j->first || !(i->second.label == j->second.label) ||
        !alpha_equal(i->second.value, j->second.value))
      return false;
  for (auto i = a.fs.begin(), j = b.fs.begin(); i != a.fs.end(); ++i, ++j)
    if (i->first != j->first || !(i->second.outer == j->second.outer) ||
        !(i->second.inner == j->second.inner) || !alpha_equal(i->second.value, j->second.value))
      return false;
  return true;
}

std::string describe_store(const MachineState& s) {
  std::string out;
  for (const auto& [a, c] : s.fi)
    out += fmt::format(" fi:{}=Lb {} {}", a, to_string(c.label), pretty(c.value));
  for (const auto& [a, c] : s.fs)
    out += fmt::format(" fs:{}=Lb {} (Lb {} {})", a, to_string(c.outer), to_string(c.inner),
                       pretty(c.value));
  return out;
}

}  // namespace

Term hole() {
  static const Term h = mk::var("•");
  return h;
}

bool is_hole(const Term& t) { return t->kind == Kind::Var && t->name == "•"; }

Term erase_term(const Term& t, Label level) {
  if (t->kind == Kind::Labeled && !flows(t->label, level)) return mk::labeled(t->label, hole());
  if (t->kids.empty()) return t;
  std::vector<Term> kids;
  for (const auto& k : t->kids) kids.push_back(erase_term(k, level));
  return with_kids(t, std::move(kids));
}

ErasedConfig erase(const MachineState& s, const Term& t, Label level) {
  Renumbering r = renumber(s.fi, s.fs, level);
  ErasedConfig e;
  e.hidden = !flows(s.lcur, level);
  e.state = erase_store(s.fi, s.fs, r, s.lcur, level);
  e.term = e.hidden ? hole() : canon(normalize_value(t), r, level);
  return e;
}

bool operator==(const ErasedConfig& a, const ErasedConfig& b) {
  if (a.hidden != b.hidden) return false;
  if (!a.hidden && (!(a.state.lcur == b.state.lcur) || !alpha_equal(a.term, b.term)))
    return false;
  return same_store(a.state, b.state);
}

std::string describe(const ErasedConfig& e) {
  std::string head = e.hidden ? "lcur=hidden" : "lcur=" + to_string(e.state.lcur);
  return fmt::format("{} term={} store:{}", head, pretty(e.term), describe_store(e.state));
}

ErasedSched erase(const SchedState& s, Label level) {
  Renumbering r = renumber(s.fi, s.fs, level);
  ErasedSched e;
  e.store = erase_store(s.fi, s.fs, r, low(), level);
  for (const auto& th : s.queue) {
    if (!flows(th.lcur, level)) continue;
    std::vector<Term> elems;
    for (const auto& el : th.bag->kids)
      if (el->kind == Kind::RefFs && r.fs.count(el->addr))
        elems.push_back(mk::ref_fs(r.fs.at(el->addr)));
    std::sort(elems.begin(), elems.end(),
              [](const Term& x, const Term& y) { return x->addr < y->addr; });
    e.threads.push_back(ErasedThread{th.lcur, mk::bag(std::move(elems)), canon(th.term, r, level)});
  }
  return e;
}

bool operator==(const ErasedSched& a, const ErasedSched& b) {
  if (a.threads.size() != b.threads.size()) return false;
  for (std::size_t i = 0; i < a.threads.size(); ++i) {
    const auto &x = a.threads[i], &y = b.threads[i];
    if (!(x.lcur == y.lcur) || !alpha_equal(x.bag, y.bag) || !alpha_equal(x.term, y.term))
      return false;
  }
  return same_store(a.store, b.store);
}

std::string describe(const ErasedSched& e) {
  std::string out = fmt::format("{} visible thread(s)", e.threads.size());
  for (const auto& t : e.threads)
    out += fmt::format(" [lcur={} {}]", to_string(t.lcur), pretty(t.term).substr(0, 80));
  return out + " store:" + describe_store(e.store);
}

bool l_equiv(const Term& a, const Term& b, Label level) {
  return alpha_equal(erase_term(a, level), erase_term(b, level));
}

bool l_equiv(const MachineState& sa, const Term& a, const MachineState& sb, const Term& b,
             Label level) {
  return erase(sa, a, level) == erase(sb, b, level);
}

// --------------------------------------------------------------- generation

namespace {

// RefUnit marks the probe's private cell; generic statements never pick it.
enum class GT { Bool, Unit, Label, Labeled, RefFs, RefFi, RefUnit };

struct Entry {
  Term term;
  GT type;
};
using Env = std::vector<Entry>;

class Generator {
 public:
  Generator(std::uint64_t seed, const GenOptions& o) : rng_(seed), o_(o) {}

  GenCase make() {
    GenCase g;
    g.first = MachineState::initial(low());
    g.second = g.first;
    Env env;
    Addr next = 1;
    bool fs = has_fs();
    if (fs) {
      std::size_t n = o_.attack_templates ? 1 + pick(2) : pick(3);
      for (std::size_t i = 0; i < n; ++i) {
        bool secret = o_.attack_templates && i == 0;
        Label ld = secret || coin(50) ? high() : low();
        bool v1 = secret ? false : coin(50);
        bool v2 = secret ? true : ld == high() ? coin(50) : v1;
        g.first.fs[next] = FsCell{low(), ld, mk::boolean(v1)};
        g.second.fs[next] = FsCell{low(), ld, mk::boolean(v2)};
        if (secret) secret_ = mk::ref_fs(next);
        env.push_back({mk::ref_fs(next), GT::RefFs});
        ++next;
      }
    }
    if (o_.calculus != Calculus::Base) {
      std::size_t n = pick(3);
      for (std::size_t i = 0; i < n; ++i) {
        Label l = coin(50) ? high() : low();
        bool v1 = coin(50);
        bool v2 = l == high() ? coin(50) : v1;
        g.first.fi[next] = FiCell{l, mk::boolean(v1)};
        g.second.fi[next] = FiCell{l, mk::boolean(v2)};
        env.push_back({mk::ref_fi(l, next), GT::RefFi});
        ++next;
      }
    }
    g.first.next_addr = g.second.next_addr = next;
    budget_ = std::max<int>(3, static_cast<int>(o_.max_size / 6));
    g.term = top(env);
    return g;
  }

 private:
  bool has_fs() const { return o_.calculus == Calculus::FS || o_.calculus == Calculus::FSAU; }
  unsigned pick(unsigned n) { return n == 0 ? 0 : static_cast<unsigned>(rng_() % n); }
  bool coin(unsigned pct) { return pick(100) < pct; }
  Term any_label() { return mk::label_const(coin(50) ? high() : low()); }
  std::string fresh() { return "v" + std::to_string(names_++); }

  std::vector<Term> of(const Env& env, GT t) const {
    std::vector<Term> out;
    for (const auto& e : env)
      if (e.type == t) out.push_back(e.term);
    return out;
  }
  Term choose(const std::vector<Term>& v) { return v[pick(static_cast<unsigned>(v.size()))]; }

  Term pure(GT t, const Env& env, int depth) {
    auto vars = of(env, t);
    switch (t) {
      case GT::Bool: {
        unsigned c = pick(depth > 0 ? 4 : 2);
        if (c == 1 && !vars.empty()) return choose(vars);
        if (c == 2)
          return mk::ite(pure(GT::Bool, env, depth - 1), pure(GT::Bool, env, depth - 1),
                         pure(GT::Bool, env, depth - 1));
        if (c == 3)
          return mk::label_op(LabelOpKind::Flows, pure(GT::Label, env, depth - 1),
                              pure(GT::Label, env, depth - 1));
        return mk::boolean(coin(50));
      }
      case GT::Label: {
        unsigned c = pick(depth > 0 ? 4 : 2);
        if (c == 1 && !vars.empty()) return choose(vars);
        if (c == 2)
          return mk::label_op(coin(50) ? LabelOpKind::Join : LabelOpKind::Meet,
                              pure(GT::Label, env, depth - 1), pure(GT::Label, env, depth - 1));
        if (c == 3) {
          auto ls = of(env, GT::Labeled);
          if (!ls.empty()) return mk::label_of(choose(ls));
        }
        return any_label();
      }
      case GT::Unit:
        return mk::unit();
      default:
        return choose(vars);
    }
  }

  // One statement: the action plus the type of the value it binds (if kept).
  struct Stmt {
    Term action;
    std::optional<GT> binds;
  };

  std::vector<Stmt> statement(const Env& env, int depth) {
    --budget_;
    auto fsr = of(env, GT::RefFs), fir = of(env, GT::RefFi), lb = of(env, GT::Labeled);
    std::vector<int> kinds{0, 1, 2};
    if (!lb.empty()) kinds.insert(kinds.end(), {3, 3});
    if (depth > 0 && !o_.concurrent) kinds.push_back(4);
    if (depth > 0) kinds.insert(kinds.end(), {5, 6});
    if (o_.calculus != Calculus::Base) {
      kinds.push_back(7);
      if (!fir.empty()) kinds.insert(kinds.end(), {8, 8, 9, 9, 10});
    }
    if (has_fs()) {
      kinds.push_back(11);
      if (!fsr.empty()) kinds.insert(kinds.end(), {12, 12, 12, 13, 13, 14, 15, 16});
      if (!fsr.empty() && depth > 0) kinds.push_back(17);
    }
    if (o_.concurrent && depth > 0) kinds.insert(kinds.end(), {18, 18});
    const int d = depth - 1;
    switch (kinds[pick(static_cast<unsigned>(kinds.size()))]) {
      case 0: return {{mk::ret(pure(GT::Bool, env, 2)), GT::Bool}};
      case 1: return {{mk::get_label(), GT::Label}};
      case 2: return {{mk::label(any_label(), pure(GT::Bool, env, 1)), GT::Labeled}};
      case 3: return {{mk::unlabel(choose(lb)), GT::Bool}};
      case 4: return {{mk::to_labeled(any_label(), block(env, GT::Bool, d)), GT::Labeled}};
      case 5:
        return {{mk::ite(pure(GT::Bool, env, 1), block(env, GT::Unit, d), block(env, GT::Unit, d)),
                 std::nullopt}};
      case 6:
        return {{mk::ite(pure(GT::Bool, env, 1), block(env, GT::Unit, d), mk::ret(mk::unit())),
                 std::nullopt}};
      case 7: return {{mk::new_ref(Flavor::FI, any_label(), pure(GT::Bool, env, 1)), GT::RefFi}};
      case 8: return {{mk::read_ref(Flavor::FI, choose(fir)), GT::Bool}};
      case 9:
        return {{mk::write_ref(Flavor::FI, choose(fir), pure(GT::Bool, env, 1)), std::nullopt}};
      case 10: return {{mk::copy_ref(choose(fir), choose(fir)), std::nullopt}};
      case 11: return {{mk::new_ref(Flavor::FS, any_label(), pure(GT::Bool, env, 1)), GT::RefFs}};
      case 12: return {{mk::read_ref(Flavor::FS, choose(fsr)), GT::Bool}};
      case 13:
        return {{mk::write_ref(Flavor::FS, choose(fsr), pure(GT::Bool, env, 1)), std::nullopt}};
      case 14: return {{mk::label_of_ref(Flavor::FS, choose(fsr)), GT::Label}};
      case 15: return {{mk::upgrade(choose(fsr), any_label()), std::nullopt}};
      case 16: return {{mk::downgrade(choose(fsr), any_label()), std::nullopt}};
      case 17: {
        std::vector<Term> elems;
        for (const auto& r : fsr)
          if (coin(70)) elems.push_back(r);
        // Literal references outside the bag would not typecheck in the body.
        Env inner;
        for (const auto& e : env)
          if (e.term->kind != Kind::RefFs ||
              std::any_of(elems.begin(), elems.end(),
                          [&](const Term& b) { return b.get() == e.term.get(); }))
            inner.push_back(e);
        return {{mk::with_refs(mk::bag(elems), block(inner, GT::Unit, d)), std::nullopt}};
      }
      default: return {{mk::fork(block(env, GT::Unit, d)), std::nullopt}};
    }
  }

  // Label-channel probes: the secret steers a write in a raised context and
  // the result is observed at L. Each binds a Bool.
  std::vector<Stmt> probe() {
    Term secret = mk::read_ref(Flavor::FS, secret_);
    std::string tmp = fresh(), h = fresh(), l = fresh();
    probe_var_ = fresh();
    auto raised = [&](Term body) {
      return o_.concurrent ? mk::fork(body) : mk::to_labeled(mk::label_const(high()), body);
    };
    std::vector<Stmt> out;
    if (coin(50)) {
      // labelOf probe
      out.push_back({mk::new_ref(Flavor::FS, mk::label_const(low()), mk::unit()), GT::RefUnit});
      out.back().action = bind_named(out.back().action, tmp);
      out.push_back({raised(mk::bind(secret, mk::lam(h, mk::ite(mk::var(h),
                                          mk::write_ref(Flavor::FS, mk::var(tmp), mk::unit()),
                                          mk::ret(mk::unit()))))),
                     std::nullopt});
      if (o_.concurrent) out.push_back({delay_term(24), std::nullopt});
      out.push_back({bind_named(mk::bind(mk::label_of_ref(Flavor::FS, mk::var(tmp)),
                                         mk::lam(l, mk::ret(mk::label_op(
                                                        LabelOpKind::Flows,
                                                        mk::label_const(high()), mk::var(l))))),
                                probe_var_),
                     GT::Bool});
    } else {
      // reference probe: the L cell is overwritten only if the secret is false
      std::string lr = fresh(), t = fresh();
      out.push_back({bind_named(mk::new_ref(Flavor::FS, mk::label_const(low()), mk::tru()), lr),
                     std::nullopt});
      out.push_back(
          {bind_named(mk::new_ref(Flavor::FS, mk::label_const(low()), mk::fls()), tmp),
           std::nullopt});
      out.push_back({raised(mk::bind(secret, mk::lam(h, mk::ite(mk::var(h),
                                          mk::write_ref(Flavor::FS, mk::var(tmp), mk::tru()),
                                          mk::ret(mk::unit()))))),
                     std::nullopt});
      if (o_.concurrent) out.push_back({delay_term(24), std::nullopt});
      out.push_back({raised(mk::bind(mk::read_ref(Flavor::FS, mk::var(tmp)),
                                     mk::lam(t, mk::ite(mk::var(t), mk::ret(mk::unit()),
                                                        mk::write_ref(Flavor::FS, mk::var(lr),
                                                                      mk::fls()))))),
                     std::nullopt});
      if (o_.concurrent) out.push_back({delay_term(24), std::nullopt});
      out.push_back({bind_named(mk::read_ref(Flavor::FS, mk::var(lr)), probe_var_), GT::Bool});
    }
    return out;
  }

  // Marks an action whose result must be bound to `name` (see fold()).
  Term bind_named(Term action, const std::string& name) {
    pending_[action.get()] = name;
    return action;
  }

  Term block(const Env& env, GT result, int depth) {
    return build(env, 1 + static_cast<int>(pick(3)), depth,
                 [this, result](const Env& e) { return mk::ret(pure(result, e, 1)); });
  }

  // Builds `count` statements then `last`, binding each result to the name
  // chosen while generating it.
  Term build(const Env& env0, int count, int depth, const std::function<Term(const Env&)>& last,
             std::vector<Stmt> prefix = {}) {
    Env env = env0;
    std::vector<std::pair<Stmt, std::string>> stmts;
    auto add = [&](Stmt s) {
      std::string x = kWildcard;
      if (auto n = pending_.find(s.action.get()); n != pending_.end()) {
        x = n->second;
        env.push_back({mk::var(x), s.binds.value_or(GT::RefFs)});
      } else if (s.binds) {
        x = fresh();
        env.push_back({mk::var(x), *s.binds});
      }
      stmts.emplace_back(std::move(s), x);
    };
    for (auto& s : prefix) add(std::move(s));
    for (int i = 0; i < count && budget_ > 0; ++i)
      for (auto& s : statement(env, depth)) add(std::move(s));
    Term t = last(env);
    for (auto it = stmts.rbegin(); it != stmts.rend(); ++it)
      t = mk::bind(it->first.action, mk::lam(it->second, t));
    return t;
  }

  Term top(const Env& env) {
    std::vector<Stmt> prefix;
    if (o_.attack_templates && secret_) prefix = probe();
    bool return_probe = !prefix.empty() && coin(60);
    int count = return_probe ? static_cast<int>(pick(2)) : 2 + static_cast<int>(pick(5));
    GT result = std::vector<GT>{GT::Bool, GT::Label, GT::Unit}[pick(3)];
    return build(
        env, count, 2,
        [&](const Env& e) {
          if (return_probe) return mk::ret(mk::var(probe_var_));
          return mk::ret(pure(result, e, 2));
        },
        std::move(prefix));
  }

  std::mt19937_64 rng_;
  GenOptions o_;
  Term secret_;
  int names_ = 0;
  int budget_ = 0;
  std::string probe_var_;
  std::map<const Node*, std::string> pending_;
};

}  // namespace

GenCase gen_program(std::uint64_t seed, const GenOptions& opts) {
  std::mt19937_64 derive(seed);
  GenCase best;
  for (int attempt = 0; attempt < 64; ++attempt) {
    std::uint64_t s = attempt == 0 ? seed : derive();
    GenCase g = Generator(s, opts).make();
    g.seed = seed;
    if (term_size(g.term) <= opts.max_size) return g;
    if (!best.term || term_size(g.term) < term_size(best.term)) best = g;
  }
  return best;
}

// ------------------------------------------------------------------- trials

const char* verdict_name(TrialVerdict v) {
  switch (v) {
    case TrialVerdict::Pass: return "pass";
    case TrialVerdict::Inconclusive: return "inconclusive";
    case TrialVerdict::Counterexample: return "counterexample";
  }
  return "?";
}

namespace {

bool well_typed_like(const Term& t, const MachineState& s, const Type& want) {
  try {
    return unifiable(typecheck(store_typing(s), {}, t), want);
  } catch (const TypeError&) {
    return false;
  }
}

// Every way of replacing one subterm of t by one of its own subterms.
void replacements(const Term& t, std::vector<Term>& out) {
  for (const auto& k : t->kids) out.push_back(k);
  for (const auto& k : t->kids)
    for (const auto& g : k->kids) out.push_back(g);
  // m >>= \x. rest where x is unused: drop m.
  if (t->kind == Kind::Bind && t->kids[1]->kind == Kind::Lam &&
      !free_vars(t->kids[1]->kids[0]).count(t->kids[1]->name))
    out.push_back(t->kids[1]->kids[0]);
  if (t->kind != Kind::Return && t->kind != Kind::LioVal) out.push_back(mk::ret(mk::unit()));
  for (std::size_t i = 0; i < t->kids.size(); ++i) {
    std::vector<Term> inner;
    replacements(t->kids[i], inner);
    for (auto& r : inner) {
      auto kids = t->kids;
      kids[i] = std::move(r);
      out.push_back(with_kids(t, std::move(kids)));
    }
  }
}

ErasedConfig observe(const Outcome& o) { return erase(o.state, o.value, low()); }

std::optional<std::string> tini_mismatch(const Term& t, const MachineState& s1,
                                         const MachineState& s2, const VariantConfig& cfg,
                                         bool& both_done) {
  Outcome a = Machine(cfg).run(s1, t);
  Outcome b = Machine(cfg).run(s2, t);
  both_done = a.kind == OutcomeKind::Value && b.kind == OutcomeKind::Value;
  if (!both_done) return std::nullopt;
  ErasedConfig ea = observe(a), eb = observe(b);
  if (ea == eb) return std::nullopt;
  return fmt::format("first: {}\nsecond: {}", describe(ea), describe(eb));
}

struct SchedTrace {
  std::vector<ErasedSched> states;
  ConcOutcome outcome;
};

SchedTrace observe_sched(const Term& t, const MachineState& s, Security security,
                         std::uint64_t fuel) {
  SchedTrace tr;
  Scheduler sched(security, fuel);
  SchedState init = Scheduler::initial(s, t);
  tr.states.push_back(erase(init, low()));
  sched.observer = [&](const SchedState& st, const ConcTraceEntry&) {
    ErasedSched e = erase(st, low());
    if (!(e == tr.states.back())) tr.states.push_back(std::move(e));
  };
  tr.outcome = sched.run(init);
  return tr;
}

std::optional<std::string> tsni_mismatch(const SchedTrace& a, const SchedTrace& b) {
  std::size_t n = std::min(a.states.size(), b.states.size());
  for (std::size_t i = 0; i < n; ++i)
    if (!(a.states[i] == b.states[i]))
      return fmt::format("L-visible state {} differs\nfirst: {}\nsecond: {}", i,
                         describe(a.states[i]), describe(b.states[i]));
  bool cut = a.outcome.fuel_exhausted || b.outcome.fuel_exhausted;
  if (!cut && a.states.size() != b.states.size())
    return fmt::format("L-visible state counts differ: {} vs {}", a.states.size(),
                       b.states.size());
  return std::nullopt;
}

}  // namespace

Term shrink_program(const Term& t, const MachineState& s,
                    const std::function<bool(const Term&)>& still_fails) {
  Type want;
  try {
    want = typecheck(store_typing(s), {}, t);
  } catch (const TypeError&) {
    return t;
  }
  Term cur = t;
  for (bool improved = true; improved;) {
    improved = false;
    std::vector<Term> cands;
    replacements(cur, cands);
    std::stable_sort(cands.begin(), cands.end(), [](const Term& a, const Term& b) {
      return term_size(a) < term_size(b);
    });
    const std::size_t size = term_size(cur);
    for (const auto& c : cands) {
      if (term_size(c) >= size) break;
      if (!free_vars(c).empty() || !well_typed_like(c, s, want) || !still_fails(c)) continue;
      cur = c;
      improved = true;
      break;
    }
  }
  return cur;
}

TrialResult tini_trial(const Term& t, const MachineState& s1, const MachineState& s2,
                       const VariantConfig& cfg, bool shrink) {
  TrialResult r;
  bool done = false;
  auto diff = tini_mismatch(t, s1, s2, cfg, done);
  if (!diff) {
    r.verdict = done ? TrialVerdict::Pass : TrialVerdict::Inconclusive;
    return r;
  }
  r.verdict = TrialVerdict::Counterexample;
  r.detail = *diff;
  r.witness = t;
  if (shrink) {
    r.witness = shrink_program(t, s1, [&](const Term& c) {
      bool d = false;
      return tini_mismatch(c, s1, s2, cfg, d).has_value();
    });
    bool d = false;
    if (auto w = tini_mismatch(r.witness, s1, s2, cfg, d)) r.detail = *w;
  }
  return r;
}

TrialResult tsni_trial(const Term& t, const MachineState& s1, const MachineState& s2,
                       Security security, std::uint64_t fuel, bool shrink) {
  TrialResult r;
  SchedTrace a = observe_sched(t, s1, security, fuel);
  SchedTrace b = observe_sched(t, s2, security, fuel);
  r.scope_invariant_held = a.outcome.scope_invariant_held && b.outcome.scope_invariant_held;
  r.out_of_scope_accesses = a.outcome.out_of_scope_accesses + b.outcome.out_of_scope_accesses;
  r.observed_steps = std::min(a.states.size(), b.states.size());
  auto diff = tsni_mismatch(a, b);
  if (!diff) {
    bool cut = a.outcome.fuel_exhausted || b.outcome.fuel_exhausted;
    r.verdict = cut ? TrialVerdict::Inconclusive : TrialVerdict::Pass;
    return r;
  }
  r.verdict = TrialVerdict::Counterexample;
  r.detail = *diff;
  r.witness = t;
  if (shrink) {
    auto fails = [&](const Term& c) {
      return tsni_mismatch(observe_sched(c, s1, security, fuel),
                           observe_sched(c, s2, security, fuel))
          .has_value();
    };
    r.witness = shrink_program(t, s1, fails);
  }
  return r;
}

// ------------------------------------------------------------------ attacks

std::vector<Attack> attack_corpus() {
  return {
      {"intro", "implicit flow through two raised regions",
       "(do (l <- (newRef fs L (bool true)))"
       "    (tmp <- (newRef fs L (bool false)))"
       "    (toLabeled H (do (h <- (readRef fs (var href)))"
       "                     (if (var h) (writeRef fs (var tmp) (bool true)) (return (unit)))))"
       "    (toLabeled H (do (t <- (readRef fs (var tmp)))"
       "                     (if (var t) (return (unit)) (writeRef fs (var l) (bool false)))))"
       "    (readRef fs (var l)))",
       false},
      {"labelof", "label of a reference written under a secret branch",
       "(do (tmp <- (newRef fs L (unit)))"
       "    (toLabeled H (do (h <- (readRef fs (var href)))"
       "                     (when (var h) (writeRef fs (var tmp) (unit)))))"
       "    (l <- (labelOfRef fs (var tmp)))"
       "    (return (lop flows H (var l))))",
       false},
      {"fork", "label of a reference written by a forked thread",
       "(do (tmp <- (newRef fs L (unit)))"
       "    (fork (do (h <- (readRef fs (var href)))"
       "              (when (var h) (writeRef fs (var tmp) (unit)))))"
       "    (var delay)"
       "    (l <- (labelOfRef fs (var tmp)))"
       "    (return (lop flows H (var l))))",
       true},
      {"nolabelof", "implicit flow without label inspection",
       "(do (lref <- (newRef fs L (bool true)))"
       "    (tmp <- (newRef fs L (bool false)))"
       "    (toLabeled H (do (h <- (readRef fs (var href)))"
       "                     (when (var h) (writeRef fs (var tmp) (bool true)))))"
       "    (toLabeled H (do (t <- (readRef fs (var tmp)))"
       "                     (when (if (var t) (bool false) (bool true))"
       "                           (writeRef fs (var lref) (bool false)))))"
       "    (readRef fs (var lref)))",
       false},
  };
}

Term instantiate_attack(const Attack& a, unsigned delay) {
  Term t = parse_program(a.source, lat());
  t = subst(t, "href", mk::ref_fs(1));
  return subst(t, "delay", delay_term(delay));
}

MachineState attack_state(bool secret) {
  MachineState s = MachineState::initial(low());
  s.fs[1] = FsCell{low(), high(), mk::boolean(secret)};
  s.next_addr = 2;
  return s;
}

namespace {

std::string describe_outcome(const Outcome& o) {
  switch (o.kind) {
    case OutcomeKind::Value:
      return fmt::format("Value {} lcur={}", display_value(o.value), to_string(o.state.lcur));
    case OutcomeKind::MonitorError:
      return fmt::format("MonitorError({}) in {}", error_name(o.error), o.rule);
    default:
      return fmt::format("{} lcur={}", outcome_name(o.kind), to_string(o.state.lcur));
  }
}

bool recovers(const Term& value, Label lcur, bool secret) {
  if (!(lcur == low())) return false;
  Term v = normalize_value(value);
  return (v->kind == Kind::True || v->kind == Kind::False) && (v->kind == Kind::True) == secret;
}

}  // namespace

AttackRun run_attack(const Attack& a, Calculus calculus, Security security, unsigned delay,
                     std::uint64_t fuel) {
  AttackRun run;
  run.attack = a.name;
  Term t = instantiate_attack(a, delay);
  bool leaked = true, terminated = true;
  if (!a.concurrent) {
    VariantConfig cfg;
    cfg.calculus = calculus;
    cfg.security = security;
    cfg.fuel = fuel;
    run.mode = fmt::format("{}/{}", calculus_name(calculus), security_name(security));
    std::optional<ErasedConfig> seen[2];
    for (int i = 0; i < 2; ++i) {
      Outcome o = Machine(cfg).run(attack_state(i == 1), t);
      run.outcomes[i] = describe_outcome(o);
      if (o.kind == OutcomeKind::Value) {
        seen[i] = observe(o);
        leaked = leaked && recovers(o.value, o.state.lcur, i == 1);
      } else {
        leaked = false;
        terminated = false;
      }
    }
    run.leaked = leaked;
    run.blocked = !leaked && (!terminated || *seen[0] == *seen[1]);
    return run;
  }
  run.mode = fmt::format("scheduler/{}", security_name(security));
  std::optional<std::pair<ErasedSched, ErasedConfig>> seen[2];
  for (int i = 0; i < 2; ++i) {
    Scheduler sched(security, fuel);
    ConcOutcome o = sched.run(Scheduler::initial(attack_state(i == 1), t));
    const ThreadResult* main = o.thread(0);
    if (!main || main->status != ThreadStatus::Done) {
      run.outcomes[i] = main ? fmt::format("main {} {}", thread_status_name(main->status),
                                           main->rule)
                             : "main thread did not finish";
      leaked = false;
      terminated = false;
      continue;
    }
    run.outcomes[i] = fmt::format("Value {} lcur={}", display_value(main->value),
                                  to_string(main->lcur));
    leaked = leaked && recovers(main->value, main->lcur, i == 1);
    MachineState fin;
    fin.lcur = main->lcur;
    fin.fi = o.final.fi;
    fin.fs = o.final.fs;
    seen[i] = std::make_pair(erase(o.final, low()), erase(fin, main->value, low()));
  }
  run.leaked = leaked;
  run.blocked = !leaked && (!terminated || (seen[0]->first == seen[1]->first &&
                                            seen[0]->second == seen[1]->second));
  return run;
}

}  // namespace liocell
