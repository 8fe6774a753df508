#include "liocell/term.hpp"

#include <atomic>
#include <utility>

namespace liocell {

namespace {

Term make(Kind k, std::vector<Term> kids = {}) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  n->kids = std::move(kids);
  return n;
}

Term make_ref_op(Kind k, Flavor f, std::vector<Term> kids) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  n->flavor = f;
  n->kids = std::move(kids);
  return n;
}

Term with_kids(const Term& t, std::vector<Term> kids) {
  auto n = std::make_shared<Node>(*t);
  n->kids = std::move(kids);
  return n;
}

std::atomic<std::uint64_t> g_fresh{0};

std::string fresh_name(const std::string& base) {
  auto cut = base.find('\'');
  std::string stem = cut == std::string::npos ? base : base.substr(0, cut);
  return stem + "'" + std::to_string(++g_fresh);
}

void collect_free(const Term& t, std::vector<std::string>& bound,
                  std::set<std::string>& out) {
  if (t->kind == Kind::Var) {
    for (const auto& b : bound)
      if (b == t->name) return;
    out.insert(t->name);
    return;
  }
  if (t->kind == Kind::Lam) {
    bound.push_back(t->name);
    collect_free(t->kids[0], bound, out);
    bound.pop_back();
    return;
  }
  for (const auto& k : t->kids) collect_free(k, bound, out);
}

bool occurs_free(const Term& t, const std::string& x) {
  if (t->kind == Kind::Var) return t->name == x;
  if (t->kind == Kind::Lam && t->name == x) return false;
  for (const auto& k : t->kids)
    if (occurs_free(k, x)) return true;
  return false;
}

Term subst_rec(const Term& t, const std::string& x, const Term& s,
               const std::set<std::string>& s_free) {
  switch (t->kind) {
    case Kind::Var:
      return t->name == x ? s : t;
    case Kind::Lam: {
      if (t->name == x) return t;
      const Term& body = t->kids[0];
      if (s_free.count(t->name) && occurs_free(body, x)) {
        auto fresh = fresh_name(t->name);
        Term renamed = subst_rec(body, t->name, mk::var(fresh), {fresh});
        return mk::lam(fresh, subst_rec(renamed, x, s, s_free));
      }
      Term nb = subst_rec(body, x, s, s_free);
      if (nb == body) return t;
      return with_kids(t, {nb});
    }
    default:
      break;
  }
  if (t->kids.empty()) return t;
  std::vector<Term> kids;
  kids.reserve(t->kids.size());
  bool changed = false;
  for (const auto& k : t->kids) {
    kids.push_back(subst_rec(k, x, s, s_free));
    changed = changed || kids.back() != k;
  }
  return changed ? with_kids(t, std::move(kids)) : t;
}

bool alpha_rec(const Term& a, const Term& b,
               std::vector<std::pair<std::string, std::string>>& env) {
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case Kind::Var: {
      for (auto it = env.rbegin(); it != env.rend(); ++it) {
        bool left = it->first == a->name, right = it->second == b->name;
        if (left || right) return left && right;
      }
      return a->name == b->name;
    }
    case Kind::Lam: {
      env.emplace_back(a->name, b->name);
      bool ok = alpha_rec(a->kids[0], b->kids[0], env);
      env.pop_back();
      return ok;
    }
    case Kind::LabelConst:
    case Kind::Labeled:
      if (!(a->label == b->label)) return false;
      break;
    case Kind::LabelOp:
      if (a->op != b->op) return false;
      break;
    case Kind::RefFi:
      return a->label == b->label && a->addr == b->addr;
    case Kind::RefFs:
      return a->addr == b->addr;
    case Kind::NewRef:
    case Kind::ReadRef:
    case Kind::LabelOfRef:
      if (a->flavor != b->flavor) return false;
      break;
    case Kind::WriteRef:
      if (a->flavor != b->flavor || a->diverge_on_fail != b->diverge_on_fail)
        return false;
      break;
    default:
      break;
  }
  if (a->kids.size() != b->kids.size()) return false;
  for (std::size_t i = 0; i < a->kids.size(); ++i)
    if (!alpha_rec(a->kids[i], b->kids[i], env)) return false;
  return true;
}

void collect_addrs(const Term& t, Kind k, std::set<Addr>& out) {
  if (t->kind == k) out.insert(t->addr);
  for (const auto& c : t->kids) collect_addrs(c, k, out);
}

}  // namespace

namespace mk {
Term tru() { return make(Kind::True); }
Term fls() { return make(Kind::False); }
Term boolean(bool b) { return b ? tru() : fls(); }
Term unit() { return make(Kind::Unit); }
Term var(std::string x) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Var;
  n->name = std::move(x);
  return n;
}
Term lam(std::string x, Term body) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Lam;
  n->name = std::move(x);
  n->kids = {std::move(body)};
  return n;
}
Term app(Term f, Term a) { return make(Kind::App, {std::move(f), std::move(a)}); }
Term fix(Term t) { return make(Kind::Fix, {std::move(t)}); }
Term ite(Term c, Term t, Term e) {
  return make(Kind::If, {std::move(c), std::move(t), std::move(e)});
}
Term label_const(Label l) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::LabelConst;
  n->label = l;
  return n;
}
Term label_op(LabelOpKind op, Term a, Term b) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::LabelOp;
  n->op = op;
  n->kids = {std::move(a), std::move(b)};
  return n;
}
Term ret(Term t) { return make(Kind::Return, {std::move(t)}); }
Term bind(Term m, Term k) { return make(Kind::Bind, {std::move(m), std::move(k)}); }
Term seq(Term m, Term next) { return bind(std::move(m), lam(kWildcard, std::move(next))); }
Term get_label() { return make(Kind::GetLabel); }
Term label(Term l, Term t) { return make(Kind::MkLabel, {std::move(l), std::move(t)}); }
Term unlabel(Term t) { return make(Kind::Unlabel, {std::move(t)}); }
Term label_of(Term t) { return make(Kind::LabelOf, {std::move(t)}); }
Term to_labeled(Term l, Term t) {
  return make(Kind::ToLabeled, {std::move(l), std::move(t)});
}
Term new_ref(Flavor f, Term l, Term t) {
  return make_ref_op(Kind::NewRef, f, {std::move(l), std::move(t)});
}
Term read_ref(Flavor f, Term r) { return make_ref_op(Kind::ReadRef, f, {std::move(r)}); }
Term write_ref(Flavor f, Term r, Term t, bool diverge_on_fail) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::WriteRef;
  n->flavor = f;
  n->diverge_on_fail = diverge_on_fail;
  n->kids = {std::move(r), std::move(t)};
  return n;
}
Term label_of_ref(Flavor f, Term r) {
  return make_ref_op(Kind::LabelOfRef, f, {std::move(r)});
}
Term copy_ref(Term from, Term to) {
  return make_ref_op(Kind::CopyRef, Flavor::FI, {std::move(from), std::move(to)});
}
Term upgrade(Term r, Term l) {
  return make_ref_op(Kind::Upgrade, Flavor::FS, {std::move(r), std::move(l)});
}
Term downgrade(Term r, Term l) {
  return make_ref_op(Kind::Downgrade, Flavor::FS, {std::move(r), std::move(l)});
}
Term with_refs(Term bag, Term body) {
  return make(Kind::WithRefs, {std::move(bag), std::move(body)});
}
Term fork(Term t) { return make(Kind::Fork, {std::move(t)}); }
Term bag(std::vector<Term> elems) { return make(Kind::Bag, std::move(elems)); }
Term lio(Term t) { return make(Kind::LioVal, {std::move(t)}); }
Term labeled(Label l, Term t) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Labeled;
  n->label = l;
  n->kids = {std::move(t)};
  return n;
}
Term ref_fi(Label l, Addr a) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::RefFi;
  n->flavor = Flavor::FI;
  n->label = l;
  n->addr = a;
  return n;
}
Term ref_fs(Addr a) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::RefFs;
  n->flavor = Flavor::FS;
  n->addr = a;
  return n;
}
Term wrap(Term t) { return make(Kind::WrapRef, {std::move(t)}); }
Term unwrap(Term t) { return make(Kind::Unwrap, {std::move(t)}); }
Term diverge() { return make(Kind::Diverge); }
Term bottom() { return make(Kind::Bottom); }
Term upgrade_store(Term l) { return make(Kind::UpgradeStore, {std::move(l)}); }
}  // namespace mk

bool is_value(const Term& t) {
  switch (t->kind) {
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
      return true;
    case Kind::Bag:
      for (const auto& k : t->kids)
        if (!is_value(k)) return false;
      return true;
    default:
      return false;
  }
}

bool is_tcb_kind(Kind k) { return k >= Kind::LioVal; }

bool contains_tcb(const Term& t) {
  if (is_tcb_kind(t->kind) || t->diverge_on_fail) return true;
  for (const auto& k : t->kids)
    if (contains_tcb(k)) return true;
  return false;
}

bool contains_kind(const Term& t, Kind k) {
  if (t->kind == k) return true;
  for (const auto& c : t->kids)
    if (contains_kind(c, k)) return true;
  return false;
}

std::size_t term_size(const Term& t) {
  std::size_t n = 1;
  for (const auto& k : t->kids) n += term_size(k);
  return n;
}

std::set<std::string> free_vars(const Term& t) {
  std::set<std::string> out;
  std::vector<std::string> bound;
  collect_free(t, bound, out);
  return out;
}

Term subst(const Term& t, const std::string& x, const Term& s) {
  return subst_rec(t, x, s, free_vars(s));
}

bool alpha_equal(const Term& a, const Term& b) {
  std::vector<std::pair<std::string, std::string>> env;
  return alpha_rec(a, b, env);
}

std::set<Addr> fs_addresses(const Term& t) {
  std::set<Addr> out;
  collect_addrs(t, Kind::RefFs, out);
  return out;
}

std::set<Addr> fi_addresses(const Term& t) {
  std::set<Addr> out;
  collect_addrs(t, Kind::RefFi, out);
  return out;
}

const char* kind_name(Kind k) {
  switch (k) {
    case Kind::True: return "true";
    case Kind::False: return "false";
    case Kind::Unit: return "unit";
    case Kind::Var: return "var";
    case Kind::Lam: return "lam";
    case Kind::App: return "app";
    case Kind::Fix: return "fix";
    case Kind::If: return "if";
    case Kind::LabelConst: return "label-constant";
    case Kind::LabelOp: return "lop";
    case Kind::Return: return "return";
    case Kind::Bind: return "bind";
    case Kind::GetLabel: return "getLabel";
    case Kind::MkLabel: return "label";
    case Kind::Unlabel: return "unlabel";
    case Kind::LabelOf: return "labelOf";
    case Kind::ToLabeled: return "toLabeled";
    case Kind::NewRef: return "newRef";
    case Kind::ReadRef: return "readRef";
    case Kind::WriteRef: return "writeRef";
    case Kind::LabelOfRef: return "labelOfRef";
    case Kind::CopyRef: return "copyRef";
    case Kind::Upgrade: return "upgrade";
    case Kind::Downgrade: return "downgrade";
    case Kind::WithRefs: return "withRefs";
    case Kind::Fork: return "fork";
    case Kind::Bag: return "bag";
    case Kind::LioVal: return "LIO";
    case Kind::Labeled: return "Lb";
    case Kind::RefFi: return "Ref-fi";
    case Kind::RefFs: return "Ref-fs";
    case Kind::WrapRef: return "WrapRef";
    case Kind::Unwrap: return "unwrap";
    case Kind::Diverge: return "diverge";
    case Kind::Bottom: return "bottom";
    case Kind::UpgradeStore: return "upgradeStore";
  }
  return "?";
}

}  // namespace liocell
