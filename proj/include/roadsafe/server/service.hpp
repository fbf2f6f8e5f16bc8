#pragma once

#include "roadsafe/server/auth.hpp"
#include "roadsafe/server/store.hpp"
#include "roadsafe/transport/endpoint.hpp"

#include <functional>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace roadsafe {
class KvConfig;
}

namespace roadsafe::server {

/// Events farther than this from every segment stay unmapped.
inline constexpr double kMatchRadiusM = 50.0;
/// Distances closer than this count as equal when matching.
inline constexpr double kMatchTieEpsilonM = 1e-9;

inline constexpr std::int64_t kDefaultTokenTtlMs = 24LL * 3600 * 1000;

/// Nearest segment within radius_m by point-to-polyline distance; ties go to the
/// lowest segment_id.
[[nodiscard]] std::optional<SegmentId> map_event_to_segment(GeoPoint position, std::span<const RoadSegment> segments,
                                                            double radius_m = kMatchRadiusM);

struct SegmentRisk {
    SegmentId segment_id = 0;
    std::size_t crash_count = 0;
    std::size_t traversal_count = 0;
    double risk_per_1000 = 0.0;
    bool insufficient_data = true;

    friend bool operator==(const SegmentRisk&, const SegmentRisk&) = default;
};

[[nodiscard]] SegmentRisk make_segment_risk(SegmentId id, std::size_t crashes, std::size_t traversals) noexcept;

/// Start position plus consecutive event positions (already ts-ordered).
[[nodiscard]] double recompute_distance(const std::optional<GeoPoint>& start, std::span<const TelemetryEvent> events);

struct ServiceConfig {
    std::int64_t token_ttl_ms = kDefaultTokenTtlMs;
    double match_radius_m = kMatchRadiusM;

    void check() const;
    /// Keys: token_ttl_s, match_radius_m.
    [[nodiscard]] static ServiceConfig from_config(const KvConfig& cfg);
};

struct CreateTripRequest {
    std::optional<TripId> trip_id; ///< client-chosen id makes creation idempotent
    VehicleId vehicle_id = 0;
    Timestamp start_ts;
    std::optional<GeoPoint> start_position;
};

struct EndTripRequest {
    Timestamp end_ts;
    double distance_m = 0.0;
    double speed_min_mps = 0.0;
    double speed_avg_mps = 0.0;
    double speed_max_mps = 0.0;
};

enum class ImportKind { drivers, vehicles, roads, segments, crashes };

[[nodiscard]] ImportKind parse_import_kind(std::string_view text);

using Clock = std::function<Timestamp()>;

[[nodiscard]] Timestamp system_now();

/// Application logic behind the HTTP routes. Thread-safe.
class Service {
public:
    explicit Service(Store& store, ServiceConfig config = {}, Clock clock = system_now);

    void register_driver(const Driver& driver, const std::string& username, const std::string& password);
    void add_vehicle(const Vehicle& v);
    void add_road(const Road& r);
    /// Adds or replaces a segment and remaps every stored event.
    void add_segment(const RoadSegment& s);
    void add_crash(const CrashRecord& c);
    /// CSV with a header row naming the fields. Returns rows imported.
    std::size_t import_csv(ImportKind kind, std::string_view text);

    /// Unknown user and wrong password both throw the same AuthError.
    [[nodiscard]] SessionToken login(const std::string& username, const std::string& password);
    /// Throws AuthError for unknown or expired tokens.
    [[nodiscard]] DriverId authenticate(const std::string& token);

    TripRecord create_trip(const std::string& token, const CreateTripRequest& req);
    TripRecord end_trip(const std::string& token, const TripId& trip_id, const EndTripRequest& req);
    /// Whole batch fails (NotFoundError / ConflictError) for an unknown or closed trip.
    transport::IngestResult ingest_events(const std::string& token, const TripId& trip_id,
                                          std::span<const TelemetryEvent> batch);

    [[nodiscard]] std::vector<TripRecord> list_trips(const std::string& token);
    [[nodiscard]] TripRecord get_trip(const std::string& token, const TripId& trip_id);
    [[nodiscard]] EventPage list_events(const std::string& token, const TripId& trip_id, const EventQuery& query);
    [[nodiscard]] SegmentRisk segment_risk(const std::string& token, SegmentId id);
    [[nodiscard]] SegmentRisk segment_risk(SegmentId id) const;

    [[nodiscard]] Store& store() noexcept { return store_; }
    [[nodiscard]] const ServiceConfig& config() const noexcept { return config_; }

private:
    TripRecord owned_trip(DriverId driver, const TripId& id) const;
    void reload_segments();
    void remap_events();

    Store& store_;
    ServiceConfig config_;
    Clock clock_;

    std::mutex sessions_mu_;
    std::unordered_map<std::string, SessionToken> sessions_;

    mutable std::shared_mutex segments_mu_;
    std::vector<RoadSegment> segments_;
};

/// Service called directly, for single-process fleet runs and tests.
class InProcessEndpoint : public transport::Endpoint {
public:
    InProcessEndpoint(Service& service, std::string token) : service_(service), token_(std::move(token)) {}
    transport::SendOutcome post_events(const TripId& trip_id, std::span<const TelemetryEvent> batch) override;

private:
    Service& service_;
    std::string token_;
};

} // namespace roadsafe::server
