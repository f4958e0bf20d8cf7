#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

namespace mora {

/// Tagged integer identifier. Distinct tags do not convert into each other.
template <class Tag, class Rep = std::uint32_t>
struct Id {
  using rep_type = Rep;
  Rep value{};

  constexpr Id() = default;
  constexpr explicit Id(Rep v) : value(v) {}

  constexpr auto operator<=>(const Id&) const = default;
};

using UserId = Id<struct UserTag, std::uint64_t>;
using OperatorId = Id<struct OperatorTag>;
using StationId = Id<struct StationTag>;

inline constexpr StationId kUnassigned{std::numeric_limits<std::uint32_t>::max()};

struct Point {
  double x = 0.0;
  double y = 0.0;
  constexpr bool operator==(const Point&) const = default;
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unknown user/operator/station identifier.
class LookupError : public Error {
 public:
  using Error::Error;
};

// Malformed input that violates a documented invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Utility undefined: some user would receive a zero rate.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

// Enumeration guard exceeded.
class SizeError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace mora

template <class Tag, class Rep>
struct std::hash<mora::Id<Tag, Rep>> {
  std::size_t operator()(const mora::Id<Tag, Rep>& id) const noexcept {
    return std::hash<Rep>{}(id.value);
  }
};
