#include "roadsafe/simagent/agent.hpp"

#include "roadsafe/error.hpp"
#include "roadsafe/transport/outbox.hpp"
#include "roadsafe/util/rng.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>

namespace roadsafe::sim {

TelemetryEvent aggregate_window(std::span<const SensorSample> window, const TripId& trip_id, Timestamp window_end_ts,
                                const nn::DrowsinessClassifier& classifier, EventId event_id,
                                std::optional<GeoPoint> preceding)
{
    if (window.empty()) {
        throw ValidationError("cannot aggregate an empty window");
    }
    const auto n = static_cast<double>(window.size());
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    double speed_sum = 0, accel_sum = 0, roll_sum = 0, pitch_sum = 0, yaw_sum = 0, score_sum = 0;
    for (const auto& s : window) {
        lo = std::min(lo, s.speed_mps);
        hi = std::max(hi, s.speed_mps);
        speed_sum += s.speed_mps;
        accel_sum += s.accel_mps2;
        roll_sum += s.roll_dps;
        pitch_sum += s.pitch_dps;
        yaw_sum += s.yaw_dps;
        score_sum += nn::classify(classifier, s.frame);
    }
    const SensorSample& last = window.back();

    TelemetryEvent e;
    e.event_id = event_id;
    e.trip_id = trip_id;
    e.ts = window_end_ts;
    e.position = last.position;
    e.gps_accuracy_m = last.gps_accuracy_m;
    e.speed_mps = last.speed_mps;
    e.speed_min_mps = lo;
    e.speed_max_mps = hi;
    // the mean can drift outside [min, max] by an ulp
    e.speed_avg_mps = std::clamp(speed_sum / n, lo, hi);
    e.accel_mps2 = accel_sum / n;
    e.roll_dps = roll_sum / n;
    e.pitch_dps = pitch_sum / n;
    e.yaw_dps = yaw_sum / n;
    e.drowsiness_score = std::clamp(score_sum / n, 0.0, 1.0);
    e.drowsy = e.drowsiness_score >= kDrowsyThreshold;

    e.heading_deg = 0.0;
    std::optional<GeoPoint> earlier;
    for (auto it = window.rbegin() + 1; it != window.rend(); ++it) {
        if (!(it->position == last.position)) {
            earlier = it->position;
            break;
        }
    }
    if (!earlier && preceding && !(*preceding == last.position)) {
        earlier = preceding;
    }
    if (earlier) {
        e.heading_deg = initial_bearing(*earlier, last.position);
    }
    return e;
}

double window_distance(std::span<const SensorSample> window, std::optional<GeoPoint> preceding)
{
    double d = 0.0;
    std::optional<GeoPoint> prev = preceding;
    for (const auto& s : window) {
        if (prev) {
            d += haversine_distance(*prev, s.position);
        }
        prev = s.position;
    }
    return d;
}

TripId make_trip_id(std::uint64_t seed, DriverId driver_id)
{
    char buf[48];
    std::snprintf(buf, sizeof buf, "trip-%016llx-%lld",
                  static_cast<unsigned long long>(mix64(seed)), static_cast<long long>(driver_id));
    return buf;
}

EventId make_event_id(std::uint64_t seed, const TripId& trip_id, std::size_t index)
{
    std::uint64_t h = mix64(seed);
    for (char c : trip_id) {
        h = hash_combine(h, static_cast<unsigned char>(c));
    }
    Rng rng(hash_combine(h, index));
    return EventId::generate(rng);
}

TripPlan plan_from_samples(const AgentSpec& spec, std::span<const SensorSample> samples,
                           const nn::DrowsinessClassifier& classifier)
{
    TripPlan plan;
    plan.sample_count = samples.size();
    plan.start_position = spec.route.front();
    plan.trip.trip_id = spec.trip_id;
    plan.trip.driver_id = spec.driver_id;
    plan.trip.vehicle_id = spec.vehicle_id;
    plan.trip.start_ts = spec.start_ts;
    plan.trip.end_ts = spec.start_ts.plus_ms(spec.duration_s * 1000);

    std::optional<GeoPoint> preceding;
    double speed_sum = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    std::size_t index = 0;
    for (std::size_t begin = 0; begin < samples.size(); begin += kEventWindowSeconds, ++index) {
        const std::size_t end = std::min(samples.size(), begin + kEventWindowSeconds);
        const auto window = samples.subspan(begin, end - begin);
        const auto end_ts = spec.start_ts.plus_ms(static_cast<std::int64_t>(window.back().t * 1000.0));
        plan.events.push_back(aggregate_window(window, spec.trip_id, end_ts, classifier,
                                               make_event_id(spec.seed, spec.trip_id, index), preceding));
        plan.window_distances.push_back(window_distance(window, preceding));
        for (const auto& s : window) {
            speed_sum += s.speed_mps;
            lo = std::min(lo, s.speed_mps);
            hi = std::max(hi, s.speed_mps);
        }
        preceding = window.back().position;
    }
    if (!samples.empty()) {
        plan.start_position = samples.front().position;
        plan.trip.speed_min_mps = lo;
        plan.trip.speed_max_mps = hi;
        plan.trip.speed_avg_mps = std::clamp(speed_sum / static_cast<double>(samples.size()), lo, hi);
    }
    for (double d : plan.window_distances) {
        plan.trip.distance_m += d;
    }
    return plan;
}

TripPlan plan_trip(const AgentSpec& spec, const nn::DrowsinessClassifier& classifier)
{
    const auto samples = simulate_trip(spec.profile, spec.route, spec.duration_s, spec.seed, spec.frame_side);
    return plan_from_samples(spec, samples, classifier);
}

Trip run_agent(const AgentSpec& spec, const nn::DrowsinessClassifier& classifier, transport::Outbox& outbox)
{
    TripPlan plan = plan_trip(spec, classifier);
    try {
        for (const auto& e : plan.events) {
            outbox.enqueue(e, e.ts);
        }
    } catch (const StorageError& err) {
        throw Error("trip " + spec.trip_id + " aborted: outbox write failed: " + err.what());
    }
    return plan.trip;
}

} // namespace roadsafe::sim
