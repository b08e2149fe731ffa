#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

namespace costlam {

// Identifiers, labels, regions and type variables are distinct name kinds
// that all compare by their rendered text.
template <class Tag>
struct Name {
  std::string text;

  Name() = default;
  explicit Name(std::string s) : text(std::move(s)) {}
  explicit Name(const char* s) : text(s) {}

  auto operator<=>(const Name&) const = default;
  bool operator==(const Name&) const = default;
};

struct IdentTag {};
struct LabelTag {};
struct RegionTag {};
struct TyVarTag {};

using Ident = Name<IdentTag>;
using Label = Name<LabelTag>;
using RegionId = Name<RegionTag>;
using TyVar = Name<TyVarTag>;

// The initial continuation's free name; never a binder.
inline const Ident kHalt{"halt"};

// Names starting with '_' are produced only by a NameSupply.
inline bool is_reserved_name(std::string_view s) {
  return !s.empty() && s.front() == '_';
}

class NameSupply {
 public:
  explicit NameSupply(std::uint64_t start = 0) : next_(start) {}

  Ident fresh_ident() { return Ident("_k" + std::to_string(next_++)); }
  Label fresh_label() { return Label("_l" + std::to_string(next_++)); }
  RegionId fresh_region() { return RegionId("_r" + std::to_string(next_++)); }
  TyVar fresh_tyvar() { return TyVar("_s" + std::to_string(next_++)); }

  // Moves the counter past the index of a reserved name such as "_k12", so
  // later draws cannot collide with names already present in a term.
  void avoid(std::string_view name);

  std::uint64_t counter() const { return next_; }

 private:
  std::uint64_t next_;
};

}  // namespace costlam

template <class Tag>
struct std::hash<costlam::Name<Tag>> {
  std::size_t operator()(const costlam::Name<Tag>& n) const noexcept {
    return std::hash<std::string>{}(n.text);
  }
};
