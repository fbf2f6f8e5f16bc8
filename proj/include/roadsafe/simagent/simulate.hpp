#pragma once

#include "roadsafe/domain/geo.hpp"
#include "roadsafe/simagent/frame.hpp"
#include "roadsafe/util/kv_config.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace roadsafe::sim {

struct DrivingProfile {
    double cruise_speed_mps = 13.9;
    double speed_jitter_mps = 1.0;
    double stop_probability = 0.1;          ///< per minute
    double drowsy_onset_probability = 0.05; ///< per minute
    Scenario scenario = Scenario::no_glasses;

    /// Throws ConfigError when a field is out of range.
    void check() const;

    /// Keys mirror the field names; missing keys keep defaults.
    [[nodiscard]] static DrivingProfile from_config(const KvConfig& cfg, const std::string& prefix = "");
};

/// Per-minute recovery probability of the drowsy two-state process.
inline constexpr double kDrowsyRecoveryPerMinute = 0.5;

struct SensorSample {
    double t = 0.0; ///< seconds since trip start
    GeoPoint position{0.0, 0.0};
    double gps_accuracy_m = 0.0;
    double speed_mps = 0.0;
    double accel_mps2 = 0.0;
    double roll_dps = 0.0;
    double pitch_dps = 0.0;
    double yaw_dps = 0.0;
    bool drowsy_truth = false;
    Frame frame{kDefaultFrameSide};
};

/// One sample per second for duration_s seconds, walking the route at the
/// sampled speed (reversing at the route ends). Deterministic per arguments.
/// Throws ConfigError on a route with fewer than 2 points or a bad profile.
[[nodiscard]] std::vector<SensorSample> simulate_trip(const DrivingProfile& profile,
                                                      std::span<const GeoPoint> route,
                                                      std::int64_t duration_s, std::uint64_t seed,
                                                      int frame_side = kDefaultFrameSide);

/// Text route: one "lat,lon" per line; blank lines and '#' comments skipped.
[[nodiscard]] std::vector<GeoPoint> parse_route(std::string_view text);
[[nodiscard]] std::vector<GeoPoint> load_route(const std::filesystem::path& path);

/// Straight route of the given length heading along bearing_deg.
[[nodiscard]] std::vector<GeoPoint> straight_route(GeoPoint start, double bearing_deg, double length_m);

} // namespace roadsafe::sim
