#pragma once

#include "roadsafe/server/service.hpp"
#include "roadsafe/simagent/agent.hpp"
#include "roadsafe/transport/flush.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <vector>

namespace roadsafe::server {
class HttpClient;
}

namespace roadsafe::cli {

/// Where a fleet delivers: trips are opened and closed here, events go through endpoint().
class FleetBackend {
public:
    virtual ~FleetBackend() = default;
    /// Called once per driver before any trip call.
    virtual void prepare(DriverId driver, VehicleId vehicle) = 0;
    virtual server::TripRecord create_trip(DriverId driver, const server::CreateTripRequest& req) = 0;
    virtual server::TripRecord end_trip(DriverId driver, const TripId& id, const server::EndTripRequest& req) = 0;
    virtual transport::Endpoint& endpoint(DriverId driver) = 0;
    virtual std::vector<TelemetryEvent> stored_events(DriverId driver, const TripId& id) = 0;
};

/// Username the fleet uses for a driver: "driver<id>".
[[nodiscard]] std::string fleet_username(DriverId driver);

/// Calls a Service directly. prepare() registers the driver and vehicle.
class ServiceBackend final : public FleetBackend {
public:
    ServiceBackend(server::Service& service, std::string password);
    void prepare(DriverId driver, VehicleId vehicle) override;
    server::TripRecord create_trip(DriverId driver, const server::CreateTripRequest& req) override;
    server::TripRecord end_trip(DriverId driver, const TripId& id, const server::EndTripRequest& req) override;
    transport::Endpoint& endpoint(DriverId driver) override;
    std::vector<TelemetryEvent> stored_events(DriverId driver, const TripId& id) override;

private:
    server::Service& service_;
    std::string password_;
    std::map<DriverId, std::string> tokens_;
    std::map<DriverId, std::unique_ptr<server::InProcessEndpoint>> endpoints_;
};

/// Talks HTTP to a running server. Drivers "driver<id>" and their vehicles
/// must already be imported; prepare() logs in.
class HttpBackend final : public FleetBackend {
public:
    HttpBackend(std::string base_url, std::string password);
    ~HttpBackend() override;
    void prepare(DriverId driver, VehicleId vehicle) override;
    server::TripRecord create_trip(DriverId driver, const server::CreateTripRequest& req) override;
    server::TripRecord end_trip(DriverId driver, const TripId& id, const server::EndTripRequest& req) override;
    transport::Endpoint& endpoint(DriverId driver) override;
    std::vector<TelemetryEvent> stored_events(DriverId driver, const TripId& id) override;

private:
    server::HttpClient& client(DriverId driver);

    std::string base_url_;
    std::string password_;
    std::map<DriverId, std::unique_ptr<server::HttpClient>> clients_;
    std::map<DriverId, std::unique_ptr<transport::Endpoint>> endpoints_;
};

struct FleetRun {
    std::size_t drivers = 1;
    /// Cycled over drivers; empty means defaults with scenarios rotating.
    std::vector<sim::DrivingProfile> profiles;
    transport::LinkConfig link;
    transport::RetryPolicy retry;
    std::size_t batch_size = transport::kDefaultBatchSize;
    std::int64_t duration_s = 300;
    std::uint64_t seed = 1;
    /// Shared route; empty gives each driver its own straight road.
    std::vector<GeoPoint> route;
    Timestamp start_ts = Timestamp::from_seconds(1'704'096'000); // 2024-01-01T08:00:00Z
    /// Simulated time allowed after the last event before undelivered events count as lost.
    std::int64_t drain_limit_s = 3600;
    /// Outbox logs go here; empty uses a fresh temporary directory removed afterwards.
    std::filesystem::path outbox_dir;
    int frame_side = sim::kDefaultFrameSide;

    /// Throws ConfigError on an inconsistent run.
    void check() const;
};

struct FleetSummary {
    std::size_t generated = 0;
    std::size_t accepted = 0; ///< distinct generated events the server accepted
    std::size_t duplicates = 0;
    std::size_t rejected = 0; ///< poisoned in outboxes
    std::size_t stored = 0;   ///< distinct generated events found on the server
    std::size_t undelivered = 0;
    transport::DeliveryReport delivery;
    std::vector<server::TripRecord> trips;
    Timestamp finished_at;

    [[nodiscard]] std::size_t lost() const noexcept { return generated - stored; }
};

/// Runs every agent against the backend on one simulated clock: events are
/// enqueued at their timestamps, outboxes flushed when due, then drained, then
/// trips closed. Deterministic for a given run and backend state.
[[nodiscard]] FleetSummary run_fleet(const FleetRun& run, const nn::DrowsinessClassifier& classifier,
                                     FleetBackend& backend);

/// Human-readable summary lines.
[[nodiscard]] std::string render_summary(const FleetSummary& s);

} // namespace roadsafe::cli
