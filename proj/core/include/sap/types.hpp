#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace sap {

/// One attention head, addressed by zero-based (layer, head).
struct HeadId {
  int layer = 0;
  int head = 0;

  auto operator<=>(const HeadId&) const = default;
};

std::string to_string(const HeadId& id);

}  // namespace sap
