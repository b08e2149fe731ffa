#include "costlam/names.hpp"

#include <cctype>

namespace costlam {

void NameSupply::avoid(std::string_view name) {
  if (name.size() < 3 || name[0] != '_') return;
  std::uint64_t n = 0;
  for (std::size_t i = 2; i < name.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(name[i]))) return;
    n = n * 10 + static_cast<std::uint64_t>(name[i] - '0');
  }
  if (n >= next_) next_ = n + 1;
}

}  // namespace costlam
