#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <ostream>

namespace cloudrisk {

// Strongly typed dense identifier. Servers, VMs and users are numbered
// 0..n-1 inside a ClusterState so the value doubles as a vector index.
template <class Tag>
struct Id {
  std::uint32_t value = 0;

  constexpr Id() = default;
  constexpr explicit Id(std::uint32_t v) : value(v) {}

  friend constexpr auto operator<=>(Id, Id) = default;
  friend std::ostream& operator<<(std::ostream& os, Id id) {
    return os << id.value;
  }
};

using ServerId = Id<struct ServerTag>;
using VmId = Id<struct VmTag>;
using UserId = Id<struct UserTag>;

}  // namespace cloudrisk

template <class Tag>
struct std::hash<cloudrisk::Id<Tag>> {
  std::size_t operator()(cloudrisk::Id<Tag> id) const noexcept {
    return std::hash<std::uint32_t>{}(id.value);
  }
};
