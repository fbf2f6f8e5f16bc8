#pragma once

#include "roadsafe/domain/types.hpp"

#include <json.hpp>

#include <string>
#include <string_view>

namespace roadsafe {

/// Canonical wire form of an event: a JSON object with exactly the
/// TelemetryEvent field names, ISO-8601 "Z" timestamps and decimal numbers.
[[nodiscard]] nlohmann::json event_to_json(const TelemetryEvent& e);

/// Unknown members are ignored. Missing members or wrong types raise
/// DecodeError naming the field.
[[nodiscard]] TelemetryEvent event_from_json(const nlohmann::json& j);

[[nodiscard]] std::string encode_event(const TelemetryEvent& e);
[[nodiscard]] TelemetryEvent decode_event(std::string_view text);

} // namespace roadsafe
