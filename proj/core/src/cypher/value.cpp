#include "hypokg/cypher/value.hpp"

#include <algorithm>

namespace hypokg::cypher {

namespace {

int rank(ValueKind k) {
  switch (k) {
    case ValueKind::boolean: return 0;
    case ValueKind::integer:
    case ValueKind::real: return 1;
    case ValueKind::string: return 2;
    case ValueKind::list: return 3;
    case ValueKind::node: return 4;
    case ValueKind::edge: return 5;
    case ValueKind::null: return 6;
  }
  return 6;
}

}  // namespace

std::weak_ordering total_order(const Value& a, const Value& b) {
  const int ra = rank(a.kind());
  const int rb = rank(b.kind());
  if (ra != rb) return ra <=> rb;
  switch (a.kind()) {
    case ValueKind::null: return std::weak_ordering::equivalent;
    case ValueKind::boolean: return a.as_bool() <=> b.as_bool();
    case ValueKind::integer:
    case ValueKind::real: {
      if (a.kind() == ValueKind::integer && b.kind() == ValueKind::integer) {
        return a.as_int() <=> b.as_int();
      }
      const double x = a.as_number();
      const double y = b.as_number();
      if (x < y) return std::weak_ordering::less;
      if (y < x) return std::weak_ordering::greater;
      // Integers before reals at equal magnitude keeps the order total.
      return rank(a.kind()) == rank(b.kind()) && a.kind() != b.kind()
                 ? (a.kind() == ValueKind::integer ? std::weak_ordering::less
                                                   : std::weak_ordering::greater)
                 : std::weak_ordering::equivalent;
    }
    case ValueKind::string: {
      const int c = a.as_string().compare(b.as_string());
      return c < 0 ? std::weak_ordering::less
                   : (c > 0 ? std::weak_ordering::greater : std::weak_ordering::equivalent);
    }
    case ValueKind::list: {
      const auto& x = a.as_list();
      const auto& y = b.as_list();
      for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i) {
        auto c = total_order(x[i], y[i]);
        if (c != 0) return c;
      }
      return x.size() <=> y.size();
    }
    case ValueKind::node: return a.as_node().index <=> b.as_node().index;
    case ValueKind::edge: return a.as_edge().index <=> b.as_edge().index;
  }
  return std::weak_ordering::equivalent;
}

bool total_less(const Value& a, const Value& b) { return total_order(a, b) < 0; }

}  // namespace hypokg::cypher
