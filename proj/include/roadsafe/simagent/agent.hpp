#pragma once

#include "roadsafe/domain/types.hpp"
#include "roadsafe/neuralnet/classifier.hpp"
#include "roadsafe/simagent/simulate.hpp"

#include <optional>
#include <span>
#include <vector>

namespace roadsafe::transport {
class Outbox;
}

namespace roadsafe::sim {

/// Aggregates one window of 1 Hz samples into a telemetry event.
/// `preceding` is the last position before the window, used for the heading
/// when the window alone holds no two distinct positions.
/// Throws ValidationError on an empty window.
[[nodiscard]] TelemetryEvent aggregate_window(std::span<const SensorSample> window, const TripId& trip_id,
                                              Timestamp window_end_ts,
                                              const nn::DrowsinessClassifier& classifier, EventId event_id,
                                              std::optional<GeoPoint> preceding = std::nullopt);

/// Distance travelled inside one window, counting the step that enters it.
[[nodiscard]] double window_distance(std::span<const SensorSample> window, std::optional<GeoPoint> preceding);

struct AgentSpec {
    DrivingProfile profile;
    std::vector<GeoPoint> route;
    std::int64_t duration_s = 0;
    std::uint64_t seed = 0;
    TripId trip_id;
    DriverId driver_id = 0;
    VehicleId vehicle_id = 0;
    Timestamp start_ts;
    int frame_side = kDefaultFrameSide;
};

/// Everything an agent produces for one trip, computed up front.
struct TripPlan {
    Trip trip;
    GeoPoint start_position{0.0, 0.0};
    std::vector<TelemetryEvent> events;
    std::vector<double> window_distances;
    std::size_t sample_count = 0;
};

/// Deterministic trip id derived from seed and driver.
[[nodiscard]] TripId make_trip_id(std::uint64_t seed, DriverId driver_id);

/// Deterministic event id for window `index` of a trip; identical across
/// agent restarts so retransmissions stay deduplicable.
[[nodiscard]] EventId make_event_id(std::uint64_t seed, const TripId& trip_id, std::size_t index);

/// Simulate and aggregate the whole trip into 15 s events (final partial window flushed).
[[nodiscard]] TripPlan plan_trip(const AgentSpec& spec, const nn::DrowsinessClassifier& classifier);

/// Same as plan_trip over already simulated samples.
[[nodiscard]] TripPlan plan_from_samples(const AgentSpec& spec, std::span<const SensorSample> samples,
                                         const nn::DrowsinessClassifier& classifier);

/// Plans the trip and streams every event into the outbox. Returns the closed
/// trip summary. Outbox failures abort with an Error naming the trip.
Trip run_agent(const AgentSpec& spec, const nn::DrowsinessClassifier& classifier, transport::Outbox& outbox);

} // namespace roadsafe::sim
