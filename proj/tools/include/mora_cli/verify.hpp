#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "mora/model.hpp"

namespace mora::cli {

struct PropertyOutcome {
  std::string name;
  std::size_t checked = 0;
  std::size_t violations = 0;
};

struct Counterexample {
  std::string suite;
  std::string property;
  std::uint64_t seed = 0;
  std::size_t instance = 0;
  std::string detail;
  NetworkState state;
  Association association;
};

struct VerifyReport {
  std::vector<PropertyOutcome> properties;
  std::optional<Counterexample> counterexample;  // first violation found
  bool passed() const { return !counterexample.has_value(); }
};

/// suite: theorems | oracle | all. `corrupt` injects an allocation whose
/// sums reach 1.5 (negative control).
VerifyReport run_verify(const std::string& suite, std::uint64_t seed, std::size_t instances, bool corrupt = false);

/// Re-checks one property on a stored instance; returns the violation text.
std::optional<std::string> recheck(const std::string& property, const NetworkState& state, const Association& x);

/// Random instance: users and stations drawn up to the given maxima, about
/// a fifth of the rates zero (each user keeps at least one positive rate).
NetworkState random_instance(std::mt19937_64& rng, std::size_t max_users, std::size_t max_stations,
                             std::size_t max_operators);

}  // namespace mora::cli
