#pragma once

#include "roadsafe/server/service.hpp"

#include <json.hpp>

namespace roadsafe::server {

[[nodiscard]] nlohmann::json trip_to_json(const TripRecord& r);
[[nodiscard]] TripRecord trip_from_json(const nlohmann::json& j);

[[nodiscard]] nlohmann::json ingest_to_json(const transport::IngestResult& r);
[[nodiscard]] transport::IngestResult ingest_from_json(const nlohmann::json& j);

[[nodiscard]] nlohmann::json risk_to_json(const SegmentRisk& r);
[[nodiscard]] SegmentRisk risk_from_json(const nlohmann::json& j);

[[nodiscard]] nlohmann::json page_to_json(const EventPage& p);
[[nodiscard]] EventPage page_from_json(const nlohmann::json& j);

} // namespace roadsafe::server
