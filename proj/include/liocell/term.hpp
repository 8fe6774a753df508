#pragma once

#include <cstdint>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "liocell/lattice.hpp"

namespace liocell {

using Addr = std::uint64_t;

enum class Flavor : std::uint8_t { FI, FS };
enum class LabelOpKind : std::uint8_t { Join, Meet, Flows };

enum class Kind : std::uint8_t {
  // surface
  True,
  False,
  Unit,
  Var,
  Lam,
  App,
  Fix,
  If,
  LabelConst,
  LabelOp,
  Return,
  Bind,
  GetLabel,
  MkLabel,     // label l t
  Unlabel,
  LabelOf,
  ToLabeled,
  NewRef,
  ReadRef,
  WriteRef,
  LabelOfRef,
  CopyRef,
  Upgrade,
  Downgrade,
  WithRefs,
  Fork,
  Bag,
  // trusted, never produced by the parser
  LioVal,        // LIO^TCB t
  Labeled,       // Lb^TCB l t
  RefFi,         // Ref^TCB_fi l a
  RefFs,         // Ref^TCB_fs a
  WrapRef,
  Unwrap,
  Diverge,
  Bottom,
  UpgradeStore,
};

struct Node;
using Term = std::shared_ptr<const Node>;

struct Node {
  Kind kind = Kind::Unit;
  Flavor flavor = Flavor::FI;
  LabelOpKind op = LabelOpKind::Join;
  // Set only on the write emitted by the embedding: a failed label check
  // diverges instead of raising a monitor error.
  bool diverge_on_fail = false;
  Label label{};
  Addr addr = 0;
  std::string name;
  std::vector<Term> kids;
};

namespace mk {
Term tru();
Term fls();
Term boolean(bool b);
Term unit();
Term var(std::string x);
Term lam(std::string x, Term body);
Term app(Term f, Term a);
Term fix(Term t);
Term ite(Term c, Term t, Term e);
Term label_const(Label l);
Term label_op(LabelOpKind op, Term a, Term b);
Term ret(Term t);
Term bind(Term m, Term k);
Term seq(Term m, Term next);  // m >>= \_ -> next
Term get_label();
Term label(Term l, Term t);
Term unlabel(Term t);
Term label_of(Term t);
Term to_labeled(Term l, Term t);
Term new_ref(Flavor f, Term l, Term t);
Term read_ref(Flavor f, Term r);
Term write_ref(Flavor f, Term r, Term t, bool diverge_on_fail = false);
Term label_of_ref(Flavor f, Term r);
Term copy_ref(Term from, Term to);
Term upgrade(Term r, Term l);
Term downgrade(Term r, Term l);
Term with_refs(Term bag, Term body);
Term fork(Term t);
Term bag(std::vector<Term> elems);
Term lio(Term t);
Term labeled(Label l, Term t);
Term ref_fi(Label l, Addr a);
Term ref_fs(Addr a);
Term wrap(Term t);
Term unwrap(Term t);
Term diverge();
Term bottom();
Term upgrade_store(Term l);
}  // namespace mk

// Name given to binders introduced by `seq`; never a legal variable reference.
inline constexpr const char* kWildcard = "_";

bool is_value(const Term& t);
bool is_tcb_kind(Kind k);
bool contains_tcb(const Term& t);
bool contains_kind(const Term& t, Kind k);
std::size_t term_size(const Term& t);

std::set<std::string> free_vars(const Term& t);
// Capture-avoiding substitution {s/x}t.
Term subst(const Term& t, const std::string& x, const Term& s);

bool alpha_equal(const Term& a, const Term& b);

// Every Ref^TCB_fs address occurring anywhere in t.
std::set<Addr> fs_addresses(const Term& t);
std::set<Addr> fi_addresses(const Term& t);

const char* kind_name(Kind k);

}  // namespace liocell
