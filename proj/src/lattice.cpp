#include "liocell/lattice.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace liocell {

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

bool valid_element_name(const std::string& s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  });
}

}  // namespace

std::shared_ptr<const Lattice> Lattice::from_order(
    std::string name, std::vector<std::string> elements,
    const std::vector<std::pair<std::string, std::string>>& generators) {
  if (elements.empty()) throw LatticeError("lattice has no elements");
  if (elements.size() > 256) throw LatticeError("lattice too large (max 256)");
  auto lat = std::shared_ptr<Lattice>(new Lattice());
  lat->name_ = std::move(name);
  for (auto& e : elements) {
    if (!valid_element_name(e))
      throw LatticeError("invalid element name '" + e + "'");
    if (std::find(lat->names_.begin(), lat->names_.end(), e) !=
        lat->names_.end())
      throw LatticeError("duplicate element '" + e + "'");
    lat->names_.push_back(e);
  }
  const std::size_t n = lat->names_.size();
  auto index_of = [&](const std::string& e) -> std::size_t {
    auto it = std::find(lat->names_.begin(), lat->names_.end(), e);
    if (it == lat->names_.end())
      throw LatticeError("order mentions unknown element '" + e + "'");
    return static_cast<std::size_t>(it - lat->names_.begin());
  };

  lat->leq_.assign(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i) lat->leq_[i][i] = true;
  for (const auto& [a, b] : generators) lat->leq_[index_of(a)][index_of(b)] = true;
  // Warshall closure.
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      if (lat->leq_[i][k])
        for (std::size_t j = 0; j < n; ++j)
          if (lat->leq_[k][j]) lat->leq_[i][j] = true;

  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (lat->leq_[i][j] && lat->leq_[j][i])
        throw LatticeError("order is not antisymmetric: " + lat->names_[i] +
                           " and " + lat->names_[j] + " are mutually below");

  lat->join_.assign(n, std::vector<std::uint16_t>(n, 0));
  lat->meet_.assign(n, std::vector<std::uint16_t>(n, 0));
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      std::optional<std::size_t> lub, glb;
      for (std::size_t c = 0; c < n; ++c) {
        if (lat->leq_[a][c] && lat->leq_[b][c]) {
          bool least = true;
          for (std::size_t d = 0; d < n && least; ++d)
            if (lat->leq_[a][d] && lat->leq_[b][d] && !lat->leq_[c][d])
              least = false;
          if (least) lub = c;
        }
        if (lat->leq_[c][a] && lat->leq_[c][b]) {
          bool greatest = true;
          for (std::size_t d = 0; d < n && greatest; ++d)
            if (lat->leq_[d][a] && lat->leq_[d][b] && !lat->leq_[d][c])
              greatest = false;
          if (greatest) glb = c;
        }
      }
      if (!lub)
        throw LatticeError("no least upper bound for " + lat->names_[a] +
                           " and " + lat->names_[b]);
      if (!glb)
        throw LatticeError("no greatest lower bound for " + lat->names_[a] +
                           " and " + lat->names_[b]);
      lat->join_[a][b] = static_cast<std::uint16_t>(*lub);
      lat->meet_[a][b] = static_cast<std::uint16_t>(*glb);
    }
  }
  lat->compute_bounds();
  auto violations = lat->check_laws();
  if (!violations.empty()) throw LatticeError(violations.front());
  return lat;
}

void Lattice::compute_bounds() {
  std::uint16_t lo = 0, hi = 0;
  for (std::uint16_t i = 1; i < names_.size(); ++i) {
    lo = meet_[lo][i];
    hi = join_[hi][i];
  }
  bottom_ = lo;
  top_ = hi;
}

std::shared_ptr<const Lattice> Lattice::parse(std::string_view text,
                                              std::string name) {
  enum class Section { None, Elements, Order } section = Section::None;
  std::vector<std::string> elements;
  std::vector<std::pair<std::string, std::string>> order;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    std::string line = trim(raw);
    if (line.empty()) continue;
    auto where = [&] { return "line " + std::to_string(line_no) + ": "; };
    // A section header may carry items on the same line.
    if (line.rfind("elements:", 0) == 0) {
      section = Section::Elements;
      line = trim(line.substr(9));
    } else if (line.rfind("order:", 0) == 0) {
      section = Section::Order;
      line = trim(line.substr(6));
    }
    if (line.empty()) continue;
    switch (section) {
      case Section::None:
        throw LatticeError(where() + "expected 'elements:' or 'order:'");
      case Section::Elements: {
        std::string tok;
        std::istringstream parts(line);
        while (std::getline(parts, tok, ',')) {
          auto e = trim(tok);
          if (!e.empty()) elements.push_back(e);
        }
        break;
      }
      case Section::Order: {
        auto le = line.find("<=");
        if (le == std::string::npos)
          throw LatticeError(where() + "expected 'a <= b'");
        auto a = trim(line.substr(0, le));
        auto b = trim(line.substr(le + 2));
        if (a.empty() || b.empty())
          throw LatticeError(where() + "expected 'a <= b'");
        order.emplace_back(a, b);
        break;
      }
    }
  }
  return from_order(std::move(name), std::move(elements), order);
}

std::shared_ptr<const Lattice> Lattice::load_file(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LatticeError("cannot read lattice file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path.stem().string());
}

const Lattice& Lattice::two_point() {
  static const auto lat = from_order("two-point", {"L", "H"}, {{"L", "H"}});
  return *lat;
}

const Lattice& Lattice::pu_three_point() {
  static const auto lat = from_order("pu-three-point", {"L", "H", "P"},
                                     {{"L", "H"}, {"H", "P"}});
  return *lat;
}

const Lattice* Lattice::builtin(std::string_view name) {
  if (name == "two-point") return &two_point();
  if (name == "pu-three-point") return &pu_three_point();
  return nullptr;
}

std::vector<Label> Lattice::elements() const {
  std::vector<Label> out;
  for (std::uint16_t i = 0; i < names_.size(); ++i) out.push_back(Label{this, i});
  return out;
}

std::optional<Label> Lattice::find(std::string_view element) const {
  for (std::uint16_t i = 0; i < names_.size(); ++i)
    if (names_[i] == element) return Label{this, i};
  return std::nullopt;
}

Label Lattice::label(std::string_view element) const {
  if (auto l = find(element)) return *l;
  throw LatticeError("unknown label '" + std::string(element) +
                     "' in lattice " + name_);
}

void Lattice::require_own(Label a) const {
  if (a.lattice != this)
    throw LabelMismatch("label does not belong to lattice " + name_);
}

const std::string& Lattice::name_of(Label l) const {
  require_own(l);
  return names_[l.index];
}

bool Lattice::flows(Label a, Label b) const {
  require_own(a);
  require_own(b);
  return leq_[a.index][b.index];
}

Label Lattice::join(Label a, Label b) const {
  require_own(a);
  require_own(b);
  return Label{this, join_[a.index][b.index]};
}

Label Lattice::meet(Label a, Label b) const {
  require_own(a);
  require_own(b);
  return Label{this, meet_[a.index][b.index]};
}

std::vector<std::string> Lattice::check_laws() const {
  std::vector<std::string> bad;
  const std::size_t n = names_.size();
  auto nm = [&](std::size_t i) { return names_[i]; };
  for (std::size_t a = 0; a < n; ++a) {
    if (!leq_[a][a]) bad.push_back("not reflexive at " + nm(a));
    if (join_[a][a] != a) bad.push_back("join not idempotent at " + nm(a));
    if (meet_[a][a] != a) bad.push_back("meet not idempotent at " + nm(a));
    for (std::size_t b = 0; b < n; ++b) {
      std::string pair = nm(a) + "," + nm(b);
      if (a != b && leq_[a][b] && leq_[b][a])
        bad.push_back("not antisymmetric at " + pair);
      std::size_t j = join_[a][b], m = meet_[a][b];
      if (!leq_[a][j] || !leq_[b][j]) bad.push_back("join not an upper bound at " + pair);
      if (!leq_[m][a] || !leq_[m][b]) bad.push_back("meet not a lower bound at " + pair);
      if (join_[a][b] != join_[b][a]) bad.push_back("join not commutative at " + pair);
      if (meet_[a][b] != meet_[b][a]) bad.push_back("meet not commutative at " + pair);
      if (meet_[a][join_[a][b]] != a) bad.push_back("absorption fails at " + pair);
      if (join_[a][meet_[a][b]] != a) bad.push_back("dual absorption fails at " + pair);
      if (leq_[a][b] != (join_[a][b] == b)) bad.push_back("order and join disagree at " + pair);
      for (std::size_t c = 0; c < n; ++c) {
        if (leq_[a][b] && leq_[b][c] && !leq_[a][c])
          bad.push_back("not transitive at " + pair + "," + nm(c));
        if (leq_[a][c] && leq_[b][c] && !leq_[j][c])
          bad.push_back("join not least at " + pair);
        if (leq_[c][a] && leq_[c][b] && !leq_[c][m])
          bad.push_back("meet not greatest at " + pair);
        if (join_[join_[a][b]][c] != join_[a][join_[b][c]])
          bad.push_back("join not associative at " + pair + "," + nm(c));
        if (meet_[meet_[a][b]][c] != meet_[a][meet_[b][c]])
          bad.push_back("meet not associative at " + pair + "," + nm(c));
      }
    }
  }
  return bad;
}

std::string to_string(Label l) {
  if (!l.lattice) return "?";
  return l.lattice->name_of(l);
}

}  // namespace liocell
