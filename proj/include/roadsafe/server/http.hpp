#pragma once

#include "roadsafe/error.hpp"
#include "roadsafe/server/service.hpp"
#include "roadsafe/transport/endpoint.hpp"

#include <memory>
#include <string>
#include <vector>

namespace roadsafe::server {

/// HTTP/JSON front end over a Service. Routes:
///   POST /login, POST /trips, POST /trips/{id}/events, POST /trips/{id}/end,
///   GET /trips, GET /trips/{id}, GET /trips/{id}/events, GET /segments/{id}/risk
/// All but /login require "Authorization: Bearer <token>".
class HttpServer {
public:
    explicit HttpServer(Service& service);
    ~HttpServer();

    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Binds the socket; port 0 picks a free port. Returns the bound port.
    int bind(const std::string& host, int port);
    /// Serves until stop(). Call after bind().
    void run();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Status code for an exception escaping a handler.
[[nodiscard]] int http_status_for(const std::exception& e) noexcept;

/// Thrown by HttpClient when no HTTP response arrived (connection refused, timeout).
class TransportError : public Error {
public:
    using Error::Error;
};

/// Blocking JSON client. Non-2xx answers are rethrown as the matching error type.
class HttpClient {
public:
    /// base_url like "http://127.0.0.1:8080".
    explicit HttpClient(const std::string& base_url, int timeout_s = 10);
    ~HttpClient();

    HttpClient(const HttpClient&) = delete;
    HttpClient& operator=(const HttpClient&) = delete;

    SessionToken login(const std::string& username, const std::string& password);
    void set_token(std::string token) { token_ = std::move(token); }
    [[nodiscard]] const std::string& token() const noexcept { return token_; }

    TripRecord create_trip(const CreateTripRequest& req);
    TripRecord end_trip(const TripId& id, const EndTripRequest& req);
    transport::IngestResult post_events(const TripId& id, std::span<const TelemetryEvent> batch);
    std::vector<TripRecord> list_trips();
    TripRecord get_trip(const TripId& id);
    EventPage list_events(const TripId& id, const EventQuery& query);
    /// Follows cursors until exhausted.
    std::vector<TelemetryEvent> all_events(const TripId& id);
    SegmentRisk segment_risk(SegmentId id);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    std::string token_;
};

/// Endpoint over HTTP: no response or 5xx is transient, 404/409/400 reject the batch.
class HttpEndpoint : public transport::Endpoint {
public:
    explicit HttpEndpoint(HttpClient& client) : client_(client) {}
    transport::SendOutcome post_events(const TripId& trip_id, std::span<const TelemetryEvent> batch) override;

private:
    HttpClient& client_;
};

} // namespace roadsafe::server
