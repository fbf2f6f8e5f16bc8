#pragma once

#include "roadsafe/domain/types.hpp"

#include <string>
#include <vector>

namespace roadsafe {

enum class ViolationKind { non_finite, range, ordering, consistency, missing };

struct Violation {
    std::string field;
    ViolationKind kind;
    std::string message;
};

/// Every violated TelemetryEvent invariant; empty means valid.
[[nodiscard]] std::vector<Violation> validate_event(const TelemetryEvent& e);

[[nodiscard]] std::string describe(const std::vector<Violation>& violations);

} // namespace roadsafe
