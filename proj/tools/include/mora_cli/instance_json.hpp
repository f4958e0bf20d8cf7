#pragma once

#include <string>

#include "mora/model.hpp"
#include "mora_cli/verify.hpp"

namespace mora::cli {

/// Counterexample as a JSON document: property, seed, instance index,
/// operators, users with rate rows, and the association.
std::string counterexample_to_json(const Counterexample& c);
Counterexample counterexample_from_json(const std::string& text);

}  // namespace mora::cli
