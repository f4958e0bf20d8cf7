#pragma once

#include <cstddef>
#include <vector>

namespace mora::detail {

// Mixed-radix counter, last digit fastest, so successive states are in
// lexicographic order. Returns false once every combination has been seen.
template <class Radix>
bool advance(std::vector<std::size_t>& digit, Radix&& radix) {
  for (std::size_t i = digit.size(); i-- > 0;) {
    if (++digit[i] < radix(i)) return true;
    digit[i] = 0;
  }
  return false;
}

}  // namespace mora::detail
