#pragma once

#include "roadsafe/domain/geo.hpp"
#include "roadsafe/domain/ids.hpp"
#include "roadsafe/domain/time.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace roadsafe {

/// Drowsy-class probability at or above which a frame window is flagged drowsy.
inline constexpr double kDrowsyThreshold = 0.5;

/// Nominal spacing between consecutive telemetry events.
inline constexpr int kEventWindowSeconds = 15;

using DriverId = std::int64_t;
using VehicleId = std::int64_t;
using RoadId = std::int64_t;
using SegmentId = std::int64_t;
using CrashId = std::int64_t;
using TripId = std::string;

/// One 15-second aggregated observation: the Events row and the wire payload.
struct TelemetryEvent {
    EventId event_id;
    TripId trip_id;
    Timestamp ts;
    GeoPoint position{0.0, 0.0};
    double gps_accuracy_m = 0.0;
    double speed_mps = 0.0;
    double heading_deg = 0.0;
    double speed_min_mps = 0.0;
    double speed_avg_mps = 0.0;
    double speed_max_mps = 0.0;
    double accel_mps2 = 0.0;
    double roll_dps = 0.0;
    double pitch_dps = 0.0;
    double yaw_dps = 0.0;
    double drowsiness_score = 0.0;
    bool drowsy = false;

    friend bool operator==(const TelemetryEvent&, const TelemetryEvent&) = default;
};

struct Trip {
    TripId trip_id;
    DriverId driver_id = 0;
    VehicleId vehicle_id = 0;
    Timestamp start_ts;
    std::optional<Timestamp> end_ts;
    double distance_m = 0.0;
    double speed_min_mps = 0.0;
    double speed_avg_mps = 0.0;
    double speed_max_mps = 0.0;

    friend bool operator==(const Trip&, const Trip&) = default;
};

enum class Gender { female, male, other };

[[nodiscard]] std::string_view to_string(Gender g) noexcept;
[[nodiscard]] Gender parse_gender(std::string_view text);

struct Driver {
    DriverId driver_id = 0;
    int age = 0;
    Gender gender = Gender::other;

    friend bool operator==(const Driver&, const Driver&) = default;
};

struct Vehicle {
    VehicleId vehicle_id = 0;
    std::string model;
    Date in_service_date;

    friend bool operator==(const Vehicle&, const Vehicle&) = default;
};

struct Road {
    RoadId road_id = 0;
    std::string name;

    friend bool operator==(const Road&, const Road&) = default;
};

struct RoadSegment {
    SegmentId segment_id = 0;
    RoadId road_id = 0;
    std::vector<GeoPoint> polyline;
    std::map<std::string, std::string> attributes;

    friend bool operator==(const RoadSegment&, const RoadSegment&) = default;
};

/// Throws ValidationError unless the polyline has >= 2 pairwise distinct points.
void check_segment(const RoadSegment& segment);

enum class Severity { minor, severe, fatal };

[[nodiscard]] std::string_view to_string(Severity s) noexcept;
[[nodiscard]] Severity parse_severity(std::string_view text);

struct CrashRecord {
    CrashId crash_id = 0;
    SegmentId segment_id = 0;
    Timestamp ts;
    Severity severity = Severity::minor;

    friend bool operator==(const CrashRecord&, const CrashRecord&) = default;
};

} // namespace roadsafe
