#include "liocell/typecheck.hpp"

#include <atomic>
#include <functional>

#include "liocell/syntax.hpp"

namespace liocell {

namespace {

std::atomic<int> g_next_var{0};

Type node(TypeKind k, std::vector<Type> args = {}, Flavor f = Flavor::FI) {
  auto n = std::make_shared<TypeNode>();
  n->kind = k;
  n->args = std::move(args);
  n->flavor = f;
  return n;
}

bool occurs(const Type& v, const Type& t) {
  Type r = resolve(t);
  if (r == v) return true;
  for (const auto& a : r->args)
    if (occurs(v, a)) return true;
  return false;
}

bool unify_raw(const Type& a0, const Type& b0) {
  Type a = resolve(a0), b = resolve(b0);
  if (a == b) return true;
  if (a->kind == TypeKind::Var) {
    if (occurs(a, b)) return false;
    a->link = b;
    return true;
  }
  if (b->kind == TypeKind::Var) return unify_raw(b, a);
  if (a->kind != b->kind) return false;
  if (a->kind == TypeKind::Ref && a->flavor != b->flavor) return false;
  if (a->args.size() != b->args.size()) return false;
  for (std::size_t i = 0; i < a->args.size(); ++i)
    if (!unify_raw(a->args[i], b->args[i])) return false;
  return true;
}

Type copy_type(const Type& t, std::map<TypeNode*, Type>& vars) {
  Type r = resolve(t);
  if (r->kind == TypeKind::Var) {
    auto it = vars.find(r.get());
    if (it != vars.end()) return it->second;
    Type v = ty::fresh();
    vars[r.get()] = v;
    return v;
  }
  std::vector<Type> args;
  for (const auto& a : r->args) args.push_back(copy_type(a, vars));
  return node(r->kind, std::move(args), r->flavor);
}

class Checker {
 public:
  explicit Checker(const StoreTyping& delta) : delta_(delta) {}

  Type infer(const TypeEnv& env, const Term& t) {
    const auto& k = t->kids;
    switch (t->kind) {
      case Kind::True:
      case Kind::False:
        return ty::boolean();
      case Kind::Unit:
        return ty::unit();
      case Kind::Var: {
        auto it = env.find(t->name);
        if (it == env.end()) throw TypeError("unbound variable '" + t->name + "'");
        return it->second;
      }
      case Kind::Lam: {
        TypeEnv inner = env;
        Type param = ty::fresh();
        inner[t->name] = param;
        return ty::arrow(param, infer(inner, k[0]));
      }
      case Kind::App: {
        Type f = infer(env, k[0]);
        Type a = infer(env, k[1]);
        Type r = ty::fresh();
        expect(f, ty::arrow(a, r), t, "function application");
        return r;
      }
      case Kind::Fix: {
        Type f = infer(env, k[0]);
        Type a = ty::fresh();
        expect(f, ty::arrow(a, a), t, "fix");
        return a;
      }
      case Kind::If: {
        expect(infer(env, k[0]), ty::boolean(), t, "if condition");
        Type a = infer(env, k[1]);
        expect(infer(env, k[2]), a, t, "if branches");
        return a;
      }
      case Kind::LabelConst:
        return ty::label();
      case Kind::LabelOp:
        expect(infer(env, k[0]), ty::label(), t, "label operand");
        expect(infer(env, k[1]), ty::label(), t, "label operand");
        return t->op == LabelOpKind::Flows ? ty::boolean() : ty::label();
      case Kind::Return:
      case Kind::LioVal:
        return ty::lio(infer(env, k[0]));
      case Kind::Bind: {
        Type a = ty::fresh(), b = ty::fresh();
        expect(infer(env, k[0]), ty::lio(a), t, "bind left operand");
        expect(infer(env, k[1]), ty::arrow(a, ty::lio(b)), t, "bind continuation");
        return ty::lio(b);
      }
      case Kind::GetLabel:
        return ty::lio(ty::label());
      case Kind::MkLabel:
        expect(infer(env, k[0]), ty::label(), t, "label argument");
        return ty::lio(ty::labeled(infer(env, k[1])));
      case Kind::Unlabel: {
        Type a = ty::fresh();
        expect(infer(env, k[0]), ty::labeled(a), t, "unlabel argument");
        return ty::lio(a);
      }
      case Kind::LabelOf:
        expect(infer(env, k[0]), ty::labeled(ty::fresh()), t, "labelOf argument");
        return ty::label();
      case Kind::ToLabeled: {
        expect(infer(env, k[0]), ty::label(), t, "toLabeled label");
        Type a = ty::fresh();
        expect(infer(env, k[1]), ty::lio(a), t, "toLabeled body");
        return ty::lio(ty::labeled(a));
      }
      case Kind::NewRef:
        expect(infer(env, k[0]), ty::label(), t, "newRef label");
        return ty::lio(ty::ref(t->flavor, infer(env, k[1])));
      case Kind::ReadRef: {
        Type a = ty::fresh();
        expect(infer(env, k[0]), ty::ref(t->flavor, a), t, "readRef reference");
        return ty::lio(a);
      }
      case Kind::WriteRef: {
        Type a = ty::fresh();
        expect(infer(env, k[0]), ty::ref(t->flavor, a), t, "writeRef reference");
        expect(infer(env, k[1]), a, t, "writeRef value");
        return ty::lio(ty::unit());
      }
      case Kind::LabelOfRef:
        expect(infer(env, k[0]), ty::ref(t->flavor, ty::fresh()), t, "labelOfRef reference");
        return t->flavor == Flavor::FI ? ty::label() : ty::lio(ty::label());
      case Kind::CopyRef: {
        Type a = ty::fresh();
        expect(infer(env, k[0]), ty::ref(Flavor::FI, a), t, "copyRef source");
        expect(infer(env, k[1]), ty::ref(Flavor::FI, a), t, "copyRef target");
        return ty::lio(ty::unit());
      }
      case Kind::Upgrade:
      case Kind::Downgrade:
        expect(infer(env, k[0]), ty::ref(Flavor::FS, ty::fresh()), t, "upgrade/downgrade reference");
        expect(infer(env, k[1]), ty::label(), t, "upgrade/downgrade label");
        return ty::lio(ty::unit());
      case Kind::WithRefs: {
        StoreTyping restricted;
        std::set<Addr> scope;
        if (k[0]->kind == Kind::Bag)
          for (const auto& e : k[0]->kids)
            if (e->kind == Kind::RefFs) scope.insert(e->addr);
        for (const auto& [key, type] : delta_)
          if (key.first == Flavor::FI || scope.count(key.second)) restricted[key] = type;
        Checker inner(restricted);
        Type b = inner.infer(env, k[0]);
        if (resolve(b)->kind != TypeKind::Bag && resolve(b)->kind != TypeKind::Var)
          throw TypeError("withRefs expects a bag, got " + type_to_string(b));
        Type a = ty::fresh();
        expect(inner.infer(env, k[1]), ty::lio(a), t, "withRefs body");
        return ty::lio(a);
      }
      case Kind::Fork:
        expect(infer(env, k[0]), ty::lio(ty::fresh()), t, "fork body");
        return ty::lio(ty::unit());
      case Kind::Bag: {
        std::vector<Type> elems;
        for (const auto& e : k) {
          Type et = ty::fresh();
          expect(infer(env, e), ty::ref(Flavor::FS, et), t, "bag element");
          elems.push_back(ty::ref(Flavor::FS, et));
        }
        return ty::bag(std::move(elems));
      }
      case Kind::Labeled:
        return ty::labeled(infer(env, k[0]));
      case Kind::RefFi:
      case Kind::RefFs: {
        auto it = delta_.find({t->flavor, t->addr});
        if (it == delta_.end())
          throw TypeError(std::string("address ") + (t->flavor == Flavor::FI ? "fi:" : "fs:") +
                              std::to_string(t->addr) + " is outside the store typing",
                          t->addr);
        return ty::ref(t->flavor, it->second);
      }
      case Kind::WrapRef: {
        Type a = ty::fresh();
        expect(infer(env, k[0]), ty::ref(Flavor::FI, ty::ref(Flavor::FI, a)), t, "WrapRef");
        return ty::ref(Flavor::FS, a);
      }
      case Kind::Unwrap: {
        Type a = ty::fresh();
        expect(infer(env, k[0]), ty::ref(Flavor::FS, a), t, "unwrap");
        return ty::ref(Flavor::FI, ty::ref(Flavor::FI, a));
      }
      case Kind::Diverge:
      case Kind::Bottom:
        return ty::fresh();
      case Kind::UpgradeStore:
        expect(infer(env, k[0]), ty::label(), t, "upgradeStore label");
        return ty::lio(ty::unit());
    }
    throw TypeError("unknown term");
  }

 private:
  static void expect(const Type& got, const Type& want, const Term& at, const char* what) {
    if (!unify_raw(got, want))
      throw TypeError(std::string("type mismatch in ") + what + ": expected " +
                      type_to_string(want) + ", got " + type_to_string(got) + " in " +
                      pretty(at).substr(0, 80));
  }

  const StoreTyping& delta_;
};

}  // namespace

namespace ty {
Type boolean() { return node(TypeKind::Bool); }
Type unit() { return node(TypeKind::Unit); }
Type arrow(Type a, Type b) { return node(TypeKind::Arrow, {std::move(a), std::move(b)}); }
Type label() { return node(TypeKind::Label); }
Type lio(Type t) { return node(TypeKind::LIO, {std::move(t)}); }
Type labeled(Type t) { return node(TypeKind::Labeled, {std::move(t)}); }
Type ref(Flavor f, Type t) { return node(TypeKind::Ref, {std::move(t)}, f); }
Type bag(std::vector<Type> elems) { return node(TypeKind::Bag, std::move(elems)); }
Type fresh() {
  auto n = node(TypeKind::Var);
  n->var_id = ++g_next_var;
  return n;
}
}  // namespace ty

Type resolve(const Type& t) {
  Type r = t;
  while (r->kind == TypeKind::Var && r->link) r = r->link;
  return r;
}

Type typecheck(const StoreTyping& delta, const TypeEnv& gamma, const Term& t) {
  return resolve(Checker(delta).infer(gamma, t));
}

StoreTyping store_typing(const MachineState& s) {
  StoreTyping delta;
  for (const auto& [a, cell] : s.fi) delta[{Flavor::FI, a}] = ty::fresh();
  for (const auto& [a, cell] : s.fs) delta[{Flavor::FS, a}] = ty::fresh();
  for (const auto& [a, cell] : s.fi) {
    Type v = typecheck(delta, {}, cell.value);
    if (!unify_raw(delta[{Flavor::FI, a}], v))
      throw TypeError("ill-typed contents at fi:" + std::to_string(a), a);
  }
  for (const auto& [a, cell] : s.fs) {
    Type v = typecheck(delta, {}, cell.value);
    if (!unify_raw(delta[{Flavor::FS, a}], v))
      throw TypeError("ill-typed contents at fs:" + std::to_string(a), a);
  }
  return delta;
}

bool unifiable(const Type& a, const Type& b) {
  std::map<TypeNode*, Type> vars;
  Type ca = copy_type(a, vars), cb = copy_type(b, vars);
  return unify_raw(ca, cb);
}

std::string type_to_string(const Type& t0) {
  Type t = resolve(t0);
  auto arg = [&](std::size_t i) { return type_to_string(t->args[i]); };
  switch (t->kind) {
    case TypeKind::Bool: return "Bool";
    case TypeKind::Unit: return "()";
    case TypeKind::Arrow: return "(" + arg(0) + " -> " + arg(1) + ")";
    case TypeKind::Label: return "Label";
    case TypeKind::LIO: return "(LIO " + arg(0) + ")";
    case TypeKind::Labeled: return "(Labeled " + arg(0) + ")";
    case TypeKind::Ref:
      return std::string("(Ref ") + (t->flavor == Flavor::FI ? "fi " : "fs ") + arg(0) + ")";
    case TypeKind::Bag: {
      std::string s = "<";
      for (std::size_t i = 0; i < t->args.size(); ++i) s += (i ? ", " : "") + arg(i);
      return s + ">";
    }
    case TypeKind::Var: return "t" + std::to_string(t->var_id);
  }
  return "?";
}

}  // namespace liocell
