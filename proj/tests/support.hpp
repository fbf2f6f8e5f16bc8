#pragma once

#include "roadsafe/domain/types.hpp"
#include "roadsafe/util/rng.hpp"

#include <cstdlib>
#include <filesystem>
#include <string>

namespace testing {

/// Random event that passes validate_event.
inline roadsafe::TelemetryEvent random_event(roadsafe::Rng& rng, const roadsafe::TripId& trip = "trip-a",
                                             std::int64_t ts_ms = 1'700'000'000'000)
{
    roadsafe::TelemetryEvent e;
    e.event_id = roadsafe::EventId::generate(rng);
    e.trip_id = trip;
    e.ts = roadsafe::Timestamp{ts_ms};
    e.position = roadsafe::GeoPoint(rng.uniform(-80, 80), rng.uniform(-179, 179));
    e.gps_accuracy_m = rng.uniform(1, 20);
    e.speed_min_mps = rng.uniform(0, 10);
    e.speed_avg_mps = e.speed_min_mps + rng.uniform(0, 5);
    e.speed_max_mps = e.speed_avg_mps + rng.uniform(0, 5);
    e.speed_mps = rng.uniform(e.speed_min_mps, e.speed_max_mps);
    e.heading_deg = rng.uniform(0, 359.9);
    e.accel_mps2 = rng.uniform(-3, 3);
    e.roll_dps = rng.uniform(-5, 5);
    e.pitch_dps = rng.uniform(-5, 5);
    e.yaw_dps = rng.uniform(-20, 20);
    e.drowsiness_score = rng.uniform();
    e.drowsy = e.drowsiness_score >= roadsafe::kDrowsyThreshold;
    return e;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir()
    {
        auto pattern = (std::filesystem::temp_directory_path() / "roadsafe-test-XXXXXX").string();
        if (!::mkdtemp(pattern.data())) throw std::runtime_error("mkdtemp failed");
        path_ = pattern;
    }
    ~TempDir()
    {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    [[nodiscard]] const std::filesystem::path& path() const noexcept { return path_; }
    [[nodiscard]] std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

} // namespace testing
