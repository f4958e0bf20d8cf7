#pragma once

#include <cstdint>

// Tags separating the random streams derived from one master seed.
namespace mora::stream {
inline constexpr std::uint64_t churn = 1;
inline constexpr std::uint64_t mobility = 2;
inline constexpr std::uint64_t hotspots = 3;
inline constexpr std::uint64_t shadowing = 4;
inline constexpr std::uint64_t fading = 5;
inline constexpr std::uint64_t instances = 6;
}  // namespace mora::stream
