#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace liocell {

class Lattice;

// A security label: an element index tagged with the lattice it belongs to.
struct Label {
  const Lattice* lattice = nullptr;
  std::uint16_t index = 0;

  friend bool operator==(const Label& a, const Label& b) {
    return a.lattice == b.lattice && a.index == b.index;
  }
  friend bool operator<(const Label& a, const Label& b) {
    return a.index < b.index;
  }
};

// Thrown when a lattice description is malformed or violates a law.
class LatticeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Thrown when labels from two different lattices are combined.
class LabelMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class Lattice {
 public:
  // Builds a lattice from elements and generating pairs (a <= b); the order is
  // the reflexive-transitive closure. Throws LatticeError on any law violation.
  static std::shared_ptr<const Lattice> from_order(
      std::string name, std::vector<std::string> elements,
      const std::vector<std::pair<std::string, std::string>>& generators);

  // Parses the `elements:` / `order:` text format.
  static std::shared_ptr<const Lattice> parse(std::string_view text,
                                              std::string name = "user");
  static std::shared_ptr<const Lattice> load_file(
      const std::filesystem::path& path);

  static const Lattice& two_point();
  static const Lattice& pu_three_point();

  // Built-in by name ("two-point", "pu-three-point") or nullptr.
  static const Lattice* builtin(std::string_view name);

  const std::string& name() const { return name_; }
  std::size_t size() const { return names_.size(); }
  std::vector<Label> elements() const;

  std::optional<Label> find(std::string_view element) const;
  Label label(std::string_view element) const;  // throws LatticeError
  const std::string& name_of(Label l) const;

  bool flows(Label a, Label b) const;
  Label join(Label a, Label b) const;
  Label meet(Label a, Label b) const;
  Label bottom() const { return Label{this, bottom_}; }
  Label top() const { return Label{this, top_}; }

  // Exhaustive law check; returns human-readable violations (empty if lawful).
  std::vector<std::string> check_laws() const;

 private:
  Lattice() = default;
  void require_own(Label a) const;
  void compute_bounds();

  std::string name_;
  std::vector<std::string> names_;
  std::vector<std::vector<bool>> leq_;
  std::vector<std::vector<std::uint16_t>> join_;
  std::vector<std::vector<std::uint16_t>> meet_;
  std::uint16_t bottom_ = 0;
  std::uint16_t top_ = 0;
};

inline bool flows(Label a, Label b) { return a.lattice->flows(a, b); }
inline Label join(Label a, Label b) { return a.lattice->join(a, b); }
inline Label meet(Label a, Label b) { return a.lattice->meet(a, b); }
std::string to_string(Label l);

}  // namespace liocell
