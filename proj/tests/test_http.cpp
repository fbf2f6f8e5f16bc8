#include "roadsafe/domain/wire.hpp"
#include "roadsafe/error.hpp"
#include "roadsafe/server/http.hpp"

#include "support.hpp"

#include <catch_amalgamated.hpp>

#include <httplib.h>

#include <thread>

using namespace roadsafe;
using namespace roadsafe::server;

namespace {

struct LiveServer {
    Store store{":memory:"};
    Service service{store};
    HttpServer http{service};
    int port = 0;
    std::thread thread;

    LiveServer()
    {
        service.register_driver({1, 40, Gender::female}, "alice", "secret");
        service.register_driver({2, 33, Gender::male}, "bob", "pw");
        service.add_vehicle({10, "sedan", Date{2019, 5, 1}});
        service.add_road({1, "r"});
        service.add_segment({1, 1, {{0, 0}, {0, 0.01}}, {}});
        service.add_crash({1, 1, Timestamp{0}, Severity::minor});
        port = http.bind("127.0.0.1", 0);
        thread = std::thread([this] { http.run(); });
    }
    ~LiveServer()
    {
        http.stop();
        thread.join();
    }
    [[nodiscard]] std::string url() const { return "http://127.0.0.1:" + std::to_string(port); }
};

} // namespace

TEST_CASE("full client flow over HTTP")
{
    LiveServer srv;
    HttpClient client(srv.url());
    CHECK_THROWS_AS(client.login("alice", "nope"), AuthError);
    auto tok = client.login("alice", "secret");
    CHECK(client.token() == tok.token);

    auto trip = client.create_trip({std::nullopt, 10, Timestamp{1'000'000}, GeoPoint(0, 0)});
    CHECK(trip.open());
    CHECK(trip.start_position == GeoPoint(0, 0));

    Rng rng(1);
    std::vector<TelemetryEvent> events;
    for (int i = 0; i < 7; ++i) {
        auto e = testing::random_event(rng, trip.trip.trip_id, 1'000'000 + (7 - i) * 1000);
        e.position = GeoPoint(0, 0.001 * (i + 1));
        events.push_back(e);
    }
    auto r = client.post_events(trip.trip.trip_id, events);
    CHECK(r.accepted.size() == 7);
    r = client.post_events(trip.trip.trip_id, events);
    CHECK(r.duplicates.size() == 7);

    auto stored = client.all_events(trip.trip.trip_id);
    CHECK(stored == srv.store.trip_events(trip.trip.trip_id));
    EventQuery q;
    q.limit = 3;
    auto page = client.list_events(trip.trip.trip_id, q);
    CHECK(page.events.size() == 3);
    REQUIRE(page.next);

    auto closed = client.end_trip(trip.trip.trip_id, {Timestamp{1'100'000}, 700.0, 1, 2, 3});
    CHECK(!closed.open());
    CHECK(closed.event_count == 7);
    CHECK(closed.server_distance_m == srv.store.trip(trip.trip.trip_id)->server_distance_m);
    CHECK(client.get_trip(trip.trip.trip_id).trip == closed.trip);
    CHECK(client.list_trips().size() == 1);
    CHECK_THROWS_AS(client.end_trip(trip.trip.trip_id, {Timestamp{1'100'000}}), ConflictError);

    auto risk = client.segment_risk(1);
    CHECK(risk.crash_count == 1);
    CHECK(risk.traversal_count == 1);
    CHECK(risk.risk_per_1000 == 1000.0);
    CHECK_THROWS_AS(client.segment_risk(42), NotFoundError);
    CHECK_THROWS_AS(client.get_trip("missing"), NotFoundError);
}

TEST_CASE("requests without a valid token are refused")
{
    LiveServer srv;
    httplib::Client raw("127.0.0.1", srv.port);
    auto res = raw.Get("/trips");
    REQUIRE(res);
    CHECK(res->status == 401);
    res = raw.Get("/trips", {{"Authorization", "Bearer forged"}});
    REQUIRE(res);
    CHECK(res->status == 401);
    res = raw.Post("/trips", "{not json", "application/json");
    REQUIRE(res);
    CHECK(res->status == 401);

    HttpClient client(srv.url());
    CHECK_THROWS_AS(client.list_trips(), AuthError);
    (void)client.login("alice", "secret");
    res = raw.Post("/trips", {{"Authorization", "Bearer " + client.token()}}, "{not json", "application/json");
    REQUIRE(res);
    CHECK(res->status == 400);
    CHECK(nlohmann::json::parse(res->body).contains("error"));
}

TEST_CASE("malformed events in a batch are rejected individually")
{
    LiveServer srv;
    HttpClient client(srv.url());
    (void)client.login("alice", "secret");
    auto trip = client.create_trip({"t1", 10, Timestamp{0}, std::nullopt});
    Rng rng(2);
    auto good = testing::random_event(rng, "t1", 10);
    nlohmann::json body;
    body["events"] = nlohmann::json::array({event_to_json(good), nlohmann::json{{"event_id", "x"}}});
    httplib::Client raw("127.0.0.1", srv.port);
    auto res = raw.Post("/trips/t1/events", {{"Authorization", "Bearer " + client.token()}}, body.dump(),
                        "application/json");
    REQUIRE(res);
    CHECK(res->status == 200);
    auto j = nlohmann::json::parse(res->body);
    CHECK(j["accepted"].size() == 1);
    CHECK(j["rejected"].size() == 1);
    CHECK(srv.store.event_count() == 1);
}

TEST_CASE("http endpoint classifies outcomes")
{
    LiveServer srv;
    HttpClient client(srv.url());
    (void)client.login("alice", "secret");
    (void)client.create_trip({"t1", 10, Timestamp{0}, std::nullopt});
    HttpEndpoint endpoint(client);
    Rng rng(3);
    std::vector<TelemetryEvent> batch{testing::random_event(rng, "t1", 5)};
    auto out = endpoint.post_events("t1", batch);
    CHECK(out.status == transport::SendStatus::ok);
    CHECK(out.result.accepted.size() == 1);
    CHECK(endpoint.post_events("nope", batch).status == transport::SendStatus::rejected);

    HttpClient other(srv.url());
    (void)other.login("bob", "pw");
    HttpEndpoint foreign(other);
    CHECK(foreign.post_events("t1", batch).status == transport::SendStatus::rejected);

    HttpClient dead("http://127.0.0.1:1", 1);
    HttpEndpoint offline(dead);
    auto o = offline.post_events("t1", batch);
    CHECK(o.status == transport::SendStatus::transient);
    CHECK(!o.error.empty());
    CHECK_THROWS_AS(dead.list_trips(), TransportError);
}

TEST_CASE("status mapping")
{
    CHECK(http_status_for(AuthError("x")) == 401);
    CHECK(http_status_for(NotFoundError("x")) == 404);
    CHECK(http_status_for(ConflictError("x")) == 409);
    CHECK(http_status_for(ValidationError("x")) == 400);
    CHECK(http_status_for(std::runtime_error("x")) == 500);
}
