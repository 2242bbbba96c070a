#pragma once

#include <ostream>
#include <string>
#include <type_traits>

namespace xpl {

/// Shortest round-trip decimal form; "nan", "inf", "-inf" for non-finite.
std::string fmt_double(double v);

/// Writes the fields separated by commas and ends the line.
template <typename... T>
void csv_row(std::ostream& os, const T&... fields) {
  bool first = true;
  auto put = [&](const auto& f) {
    if (!first) os << ',';
    first = false;
    if constexpr (std::is_floating_point_v<std::decay_t<decltype(f)>>)
      os << fmt_double(f);
    else
      os << f;
  };
  (put(fields), ...);
  os << '\n';
}

}  // namespace xpl
