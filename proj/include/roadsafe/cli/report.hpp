#pragma once

#include "roadsafe/server/store.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace roadsafe::cli {

struct TripSummary {
    double distance_m = 0.0; ///< start position plus consecutive event positions
    double duration_s = 0.0;
    double speed_min_mps = 0.0;
    double speed_avg_mps = 0.0;
    double speed_max_mps = 0.0;
    std::size_t drowsy_events = 0;
};

struct TripReport {
    server::TripRecord trip;
    std::vector<TelemetryEvent> events; ///< ts ascending
    TripSummary summary;
};

/// Summary is computed from the rows alone (plus the trip's start and end).
[[nodiscard]] TripReport make_report(const server::TripRecord& trip, std::vector<TelemetryEvent> events);
[[nodiscard]] std::string render_report(const TripReport& report);

/// RFC 7946 FeatureCollection: a LineString through the event positions (when
/// there are at least two) followed by one Point per event carrying every event
/// field as properties. Coordinates are [lon, lat].
[[nodiscard]] nlohmann::json export_geojson(const TripId& trip_id, std::span<const TelemetryEvent> events);
/// Events from the Point features. Throws DecodeError on malformed input.
[[nodiscard]] std::vector<TelemetryEvent> import_geojson(const nlohmann::json& collection);

} // namespace roadsafe::cli
