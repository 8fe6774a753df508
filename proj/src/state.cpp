#include "liocell/state.hpp"

#include <vector>

namespace liocell {

FsStore merge_stores(const FsStore& left, const FsStore& right) {
  FsStore out = left;
  for (const auto& [a, cell] : right) out.emplace(a, cell);
  return out;
}

std::set<Addr> addrs(const Term& bag) {
  std::set<Addr> out;
  if (bag->kind != Kind::Bag) return out;
  for (const auto& e : bag->kids)
    if (e->kind == Kind::RefFs) out.insert(e->addr);
  return out;
}

Term addrs_inv(const std::set<Addr>& as) {
  std::vector<Term> elems;
  elems.reserve(as.size());
  for (Addr a : as) elems.push_back(mk::ref_fs(a));
  return mk::bag(std::move(elems));
}

std::set<Addr> addrs_plus(const FsStore& mu, const Term& v) {
  std::set<Addr> seen;
  std::vector<Addr> todo;
  for (Addr a : fs_addresses(v)) todo.push_back(a);
  while (!todo.empty()) {
    Addr a = todo.back();
    todo.pop_back();
    if (!seen.insert(a).second) continue;
    auto it = mu.find(a);
    if (it == mu.end()) continue;
    for (Addr b : fs_addresses(it->second.value))
      if (!seen.count(b)) todo.push_back(b);
  }
  return seen;
}

}  // namespace liocell
