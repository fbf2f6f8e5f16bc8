#pragma once

#include "roadsafe/domain/types.hpp"

#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

struct sqlite3;

namespace roadsafe::server {

struct Credentials {
    DriverId driver_id = 0;
    std::string username;
    std::string salt_hex;
    std::string hash_hex;
};

/// Trip row: the client's summary plus the server's event-based recomputation.
struct TripRecord {
    Trip trip; ///< distance_m and speed stats hold the client's figures
    std::optional<GeoPoint> start_position;
    double server_distance_m = 0.0;
    std::size_t event_count = 0;

    [[nodiscard]] bool open() const noexcept { return !trip.end_ts.has_value(); }
    /// |client - server| / max(client, server); 0 when both are 0.
    [[nodiscard]] double discrepancy_ratio() const noexcept;
};

enum class InsertOutcome { inserted, duplicate };

struct StoredEvent {
    TelemetryEvent event;
    std::optional<SegmentId> segment_id;

    friend bool operator==(const StoredEvent&, const StoredEvent&) = default;
};

/// Keyset page position: events strictly after (ts, event_id).
struct EventCursor {
    Timestamp ts;
    std::string event_id;

    [[nodiscard]] std::string encode() const;
    /// Throws ValidationError on malformed text.
    [[nodiscard]] static EventCursor decode(std::string_view text);
};

struct EventQuery {
    std::optional<Timestamp> from; ///< inclusive
    std::optional<Timestamp> to;   ///< exclusive
    std::optional<EventCursor> after;
    std::size_t limit = 100;
};

struct EventPage {
    std::vector<TelemetryEvent> events;
    std::optional<EventCursor> next;
};

/// Persistent seven-table store (Driver, Vehicle, Road, SegmentRoad, Crashes,
/// Trip, Events) on an embedded SQLite database. Foreign keys are enforced and
/// Events is unique on event_id. All calls are serialized on one connection, so
/// every call observes a consistent snapshot.
class Store {
public:
    /// `path` may be ":memory:".
    explicit Store(const std::string& path);
    ~Store();

    Store(const Store&) = delete;
    Store& operator=(const Store&) = delete;

    void upsert_driver(const Driver& driver);
    void set_credentials(const Credentials& creds);
    [[nodiscard]] std::optional<Driver> driver(DriverId id) const;
    [[nodiscard]] std::optional<Credentials> credentials(const std::string& username) const;

    void upsert_vehicle(const Vehicle& vehicle);
    [[nodiscard]] std::optional<Vehicle> vehicle(VehicleId id) const;

    void upsert_road(const Road& road);
    [[nodiscard]] std::optional<Road> road(RoadId id) const;

    /// Throws ValidationError for a bad polyline, NotFoundError for an unknown road.
    void upsert_segment(const RoadSegment& segment);
    [[nodiscard]] std::vector<RoadSegment> segments() const;
    [[nodiscard]] bool has_segment(SegmentId id) const;

    void upsert_crash(const CrashRecord& crash);
    [[nodiscard]] std::vector<CrashRecord> crashes() const;

    /// Throws ConflictError if the trip id exists.
    void insert_trip(const TripRecord& record);
    [[nodiscard]] std::optional<TripRecord> trip(const TripId& id) const;
    [[nodiscard]] std::vector<TripRecord> trips_for_driver(DriverId driver) const;
    /// Closes an open trip; throws ConflictError if it is already closed.
    void close_trip(const TripId& id, Timestamp end_ts, double client_distance_m, double speed_min,
                    double speed_avg, double speed_max, double server_distance_m);

    /// Inserts in one transaction; existing event ids are reported as duplicates.
    [[nodiscard]] std::vector<InsertOutcome> insert_events(std::span<const StoredEvent> events);
    [[nodiscard]] std::vector<TelemetryEvent> trip_events(const TripId& id) const;
    [[nodiscard]] EventPage events_page(const TripId& id, const EventQuery& query) const;
    [[nodiscard]] std::vector<StoredEvent> all_events() const;
    [[nodiscard]] std::size_t event_count() const;
    void set_event_segment(const EventId& id, std::optional<SegmentId> segment);

    [[nodiscard]] std::size_t crash_count(SegmentId segment) const;
    /// Distinct trips with at least one event mapped to the segment.
    [[nodiscard]] std::size_t traversal_count(SegmentId segment) const;

    /// Rows violating a foreign key (PRAGMA foreign_key_check); 0 when consistent.
    [[nodiscard]] std::size_t integrity_violations() const;

private:
    class Statement;
    void exec(const char* sql) const;

    sqlite3* db_ = nullptr;
    mutable std::recursive_mutex mu_;
};

} // namespace roadsafe::server
