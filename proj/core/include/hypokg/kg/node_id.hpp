#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace hypokg::kg {

/// Namespaced entity identifier, written "namespace:local_id".
///
/// The namespace never contains ':'; the local part may (it is everything
/// after the first colon), so parse(format(x)) == x for every valid id.
struct NodeId {
  std::string ns;
  std::string local;

  /// Throws FormatError when there is no colon or either side is empty.
  static NodeId parse(std::string_view text);
  static std::optional<NodeId> try_parse(std::string_view text);

  std::string str() const { return ns + ":" + local; }

  friend auto operator<=>(const NodeId&, const NodeId&) = default;
  friend bool operator==(const NodeId&, const NodeId&) = default;
};

}  // namespace hypokg::kg
