#pragma once

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "liocell/state.hpp"
#include "liocell/term.hpp"

namespace liocell {

enum class TypeKind { Bool, Unit, Arrow, Label, LIO, Labeled, Ref, Bag, Var };

struct TypeNode;
using Type = std::shared_ptr<TypeNode>;

// Types are unification nodes; a Var may be bound (via `link`) during checking.
struct TypeNode {
  TypeKind kind = TypeKind::Unit;
  Flavor flavor = Flavor::FI;
  std::vector<Type> args;
  int var_id = 0;
  Type link;
};

namespace ty {
Type boolean();
Type unit();
Type arrow(Type a, Type b);
Type label();
Type lio(Type t);
Type labeled(Type t);
Type ref(Flavor f, Type t);
Type bag(std::vector<Type> elems);
Type fresh();
}  // namespace ty

class TypeError : public std::runtime_error {
 public:
  explicit TypeError(const std::string& msg, std::optional<Addr> addr = std::nullopt)
      : std::runtime_error(msg), addr_(addr) {}
  std::optional<Addr> address() const { return addr_; }

 private:
  std::optional<Addr> addr_;
};

using StoreTyping = std::map<std::pair<Flavor, Addr>, Type>;
using TypeEnv = std::map<std::string, Type>;

// Infers the simple type of t. Unification may refine type variables that
// occur in `delta` and `gamma`.
Type typecheck(const StoreTyping& delta, const TypeEnv& gamma, const Term& t);

// Store typing induced by the cells of a machine state.
StoreTyping store_typing(const MachineState& s);

Type resolve(const Type& t);
bool unifiable(const Type& a, const Type& b);
std::string type_to_string(const Type& t);

}  // namespace liocell
