#include "roadsafe/error.hpp"
#include "roadsafe/server/service.hpp"

#include "support.hpp"

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <atomic>
#include <map>
#include <set>
#include <thread>

using namespace roadsafe;
using namespace roadsafe::server;
using Catch::Matchers::WithinAbs;

namespace {

struct Fixture {
    Store store{":memory:"};
    std::int64_t now_ms = 1'700'000'000'000;
    Service service{store, ServiceConfig{}, [this] { return Timestamp{now_ms}; }};
    std::string token;

    Fixture()
    {
        service.register_driver({1, 40, Gender::female}, "alice", "secret");
        service.register_driver({2, 35, Gender::male}, "bob", "hunter2");
        service.add_vehicle({10, "sedan", Date{2019, 5, 1}});
        token = service.login("alice", "secret").token;
    }

    TripId open_trip(const std::string& id = "trip-1", std::optional<GeoPoint> start = std::nullopt)
    {
        return service.create_trip(token, {id, 10, Timestamp{1'000'000}, start}).trip.trip_id;
    }
};

TelemetryEvent event_at(Rng& rng, const TripId& trip, std::int64_t ts, GeoPoint pos)
{
    auto e = testing::random_event(rng, trip, ts);
    e.position = pos;
    return e;
}

} // namespace

TEST_CASE("login issues tokens and hides which credential was wrong")
{
    Fixture f;
    CHECK(f.service.authenticate(f.token) == 1);
    std::string unknown_msg, wrong_msg;
    try {
        (void)f.service.login("nobody", "secret");
    } catch (const AuthError& e) {
        unknown_msg = e.what();
    }
    try {
        (void)f.service.login("alice", "wrong");
    } catch (const AuthError& e) {
        wrong_msg = e.what();
    }
    CHECK(!unknown_msg.empty());
    CHECK(unknown_msg == wrong_msg);
    CHECK_THROWS_AS(f.service.authenticate("forged"), AuthError);

    auto creds = f.store.credentials("alice");
    REQUIRE(creds);
    CHECK(creds->hash_hex != "secret");
    CHECK(creds->salt_hex != f.store.credentials("bob")->salt_hex);
}

TEST_CASE("tokens expire after the configured lifetime")
{
    Fixture f;
    auto tok = f.service.login("alice", "secret");
    CHECK(tok.expiry == Timestamp{f.now_ms + kDefaultTokenTtlMs});
    f.now_ms += kDefaultTokenTtlMs - 1;
    CHECK_NOTHROW(f.service.list_trips(tok.token));
    f.now_ms += 1;
    CHECK_THROWS_AS(f.service.list_trips(tok.token), AuthError);
    CHECK_THROWS_AS(f.service.create_trip(tok.token, {std::nullopt, 10, Timestamp{0}, std::nullopt}), AuthError);
}

TEST_CASE("trip lifecycle")
{
    Fixture f;
    auto id = f.open_trip();
    auto again = f.service.create_trip(f.token, {id, 10, Timestamp{1'000'000}, std::nullopt});
    CHECK(again.trip.trip_id == id);
    CHECK_THROWS_AS(f.service.create_trip(f.token, {id, 10, Timestamp{5}, std::nullopt}), ConflictError);
    CHECK_THROWS_AS(f.service.create_trip(f.token, {std::nullopt, 99, Timestamp{0}, std::nullopt}), NotFoundError);

    CHECK_THROWS_AS(f.service.end_trip(f.token, id, {Timestamp{999'999}}), ValidationError);
    auto closed = f.service.end_trip(f.token, id, {Timestamp{2'000'000}});
    CHECK(closed.trip.distance_m == 0.0);
    CHECK(closed.server_distance_m == 0.0);
    CHECK(closed.discrepancy_ratio() == 0.0);
    CHECK_THROWS_AS(f.service.end_trip(f.token, id, {Timestamp{2'000'000}}), ConflictError);
    CHECK_THROWS_AS(f.service.end_trip(f.token, "missing", {Timestamp{2'000'000}}), NotFoundError);

    auto generated = f.service.create_trip(f.token, {std::nullopt, 10, Timestamp{0}, std::nullopt});
    CHECK(!generated.trip.trip_id.empty());
    CHECK(f.service.list_trips(f.token).size() == 2);
}

TEST_CASE("other drivers' trips are invisible")
{
    Fixture f;
    auto id = f.open_trip();
    auto bob = f.service.login("bob", "hunter2").token;
    CHECK_THROWS_AS(f.service.get_trip(bob, id), NotFoundError);
    CHECK_THROWS_AS(f.service.end_trip(bob, id, {Timestamp{2'000'000}}), NotFoundError);
    CHECK(f.service.list_trips(bob).empty());
}

TEST_CASE("end of trip stores client and recomputed distances")
{
    Fixture f;
    GeoPoint start(25.2854, 51.5310);
    auto id = f.open_trip("trip-d", start);
    Rng rng(1);
    std::vector<TelemetryEvent> events;
    GeoPoint p = start;
    for (int i = 0; i < 12; ++i) {
        p = destination(p, 30.0 * i, 250.0);
        events.push_back(event_at(rng, id, 1'000'000 + (i + 1) * 15'000, p));
    }
    std::reverse(events.begin(), events.end()); // arrival order must not matter
    auto r = f.service.ingest_events(f.token, id, events);
    REQUIRE(r.accepted.size() == 12);

    // Oracle: Σ haversine over the ts-ordered positions, starting at the trip start.
    std::sort(events.begin(), events.end(), [](auto& a, auto& b) { return a.ts < b.ts; });
    double oracle = 0;
    GeoPoint prev = start;
    for (const auto& e : events) {
        oracle += haversine_distance(prev, e.position);
        prev = e.position;
    }
    auto closed = f.service.end_trip(f.token, id, {Timestamp{1'200'000}, 3000.0, 1, 2, 3});
    CHECK(closed.trip.distance_m == 3000.0);
    CHECK_THAT(closed.server_distance_m, WithinAbs(oracle, 1e-6));
    CHECK_THAT(closed.discrepancy_ratio(), WithinAbs(std::abs(3000.0 - oracle) / std::max(3000.0, oracle), 1e-12));
    CHECK(closed.event_count == 12);
}

TEST_CASE("ingestion is idempotent and validates per event")
{
    Fixture f;
    auto id = f.open_trip();
    Rng rng(2);
    std::vector<TelemetryEvent> batch;
    for (int i = 0; i < 3; ++i) batch.push_back(testing::random_event(rng, id, 1'000'000 + i * 15'000));
    auto r = f.service.ingest_events(f.token, id, batch);
    CHECK(r.accepted.size() == 3);
    r = f.service.ingest_events(f.token, id, batch);
    CHECK(r.accepted.empty());
    CHECK(r.duplicates.size() == 3);
    CHECK(f.store.event_count() == 3);

    auto bad = testing::random_event(rng, id, 1'100'000);
    bad.heading_deg = 400;
    auto good = testing::random_event(rng, id, 1'110'000);
    auto other = testing::random_event(rng, "trip-x", 1'120'000);
    std::vector<TelemetryEvent> mixed{bad, good, other};
    r = f.service.ingest_events(f.token, id, mixed);
    CHECK(r.accepted == std::vector<EventId>{good.event_id});
    REQUIRE(r.rejected.size() == 2);
    CHECK(r.rejected[0].first == bad.event_id);
    CHECK(r.rejected[0].second.find("heading_deg") != std::string::npos);
    CHECK(r.rejected[0].second.find("range") != std::string::npos);
    CHECK(r.rejected[1].first == other.event_id);

    CHECK_THROWS_AS(f.service.ingest_events(f.token, "nope", batch), NotFoundError);
    (void)f.service.end_trip(f.token, id, {Timestamp{2'000'000}});
    CHECK_THROWS_AS(f.service.ingest_events(f.token, id, batch), ConflictError);
    CHECK(f.store.integrity_violations() == 0);
}

TEST_CASE("random retransmission schedules store each event exactly once")
{
    Rng rng(3);
    for (int round = 0; round < 20; ++round) {
        Fixture f;
        auto id = f.open_trip();
        std::vector<TelemetryEvent> events;
        for (int i = 0; i < 30; ++i) events.push_back(testing::random_event(rng, id, 1'000'000 + i * 1000));

        Store single(":memory:");
        Service ref(single);
        ref.register_driver({1, 40, Gender::female}, "alice", "secret");
        ref.add_vehicle({10, "sedan", Date{2019, 5, 1}});
        auto rt = ref.login("alice", "secret").token;
        (void)ref.create_trip(rt, {id, 10, Timestamp{1'000'000}, std::nullopt});
        (void)ref.ingest_events(rt, id, events);

        std::vector<TelemetryEvent> wire;
        for (const auto& e : events) wire.insert(wire.end(), 1 + rng.below(5), e);
        for (std::size_t i = wire.size(); i > 1; --i) std::swap(wire[i - 1], wire[rng.below(i)]);
        for (std::size_t pos = 0; pos < wire.size();) {
            std::size_t n = std::min<std::size_t>(1 + rng.below(10), wire.size() - pos);
            (void)f.service.ingest_events(f.token, id, std::span(wire).subspan(pos, n));
            pos += n;
        }
        CHECK(f.store.trip_events(id) == single.trip_events(id));
    }
}

TEST_CASE("concurrent ingestion of the same events keeps one row each")
{
    Fixture f;
    auto id = f.open_trip();
    Rng rng(4);
    std::vector<TelemetryEvent> events;
    for (int i = 0; i < 50; ++i) events.push_back(testing::random_event(rng, id, 1'000'000 + i));
    std::atomic<std::size_t> accepted{0};
    std::vector<std::thread> threads;
    for (int t = 0; t < 6; ++t)
        threads.emplace_back([&] {
            for (std::size_t i = 0; i < events.size(); i += 7) {
                auto r = f.service.ingest_events(f.token, id, std::span(events).subspan(i, std::min<std::size_t>(7, events.size() - i)));
                accepted += r.accepted.size();
            }
        });
    for (auto& t : threads) t.join();
    CHECK(accepted == 50);
    CHECK(f.store.event_count() == 50);
}

TEST_CASE("events are listed in time order with stable paging")
{
    Fixture f;
    auto id = f.open_trip();
    CHECK(f.service.list_events(f.token, id, {}).events.empty());
    Rng rng(5);
    std::vector<TelemetryEvent> events;
    for (int i = 0; i < 100; ++i) events.push_back(testing::random_event(rng, id, 1'000'000 + (i / 2) * 1000));
    for (std::size_t i = events.size(); i > 1; --i) std::swap(events[i - 1], events[rng.below(i)]);
    (void)f.service.ingest_events(f.token, id, events);

    EventQuery q;
    q.limit = 40;
    std::vector<std::size_t> sizes;
    std::vector<TelemetryEvent> seen;
    for (;;) {
        auto page = f.service.list_events(f.token, id, q);
        sizes.push_back(page.events.size());
        seen.insert(seen.end(), page.events.begin(), page.events.end());
        if (!page.next) break;
        q.after = EventCursor::decode(page.next->encode());
    }
    CHECK(sizes == std::vector<std::size_t>{40, 40, 20});
    REQUIRE(seen.size() == 100);
    CHECK(std::is_sorted(seen.begin(), seen.end(), [](auto& a, auto& b) {
        return a.ts != b.ts ? a.ts < b.ts : a.event_id < b.event_id;
    }));
    std::set<EventId> ids;
    for (const auto& e : seen) ids.insert(e.event_id);
    CHECK(ids.size() == 100);

    EventQuery window;
    window.from = Timestamp{1'010'000};
    window.to = Timestamp{1'020'000};
    auto w = f.service.list_events(f.token, id, window);
    CHECK(w.events.size() == 20);
    CHECK_THROWS_AS(EventCursor::decode("garbage"), ValidationError);
    CHECK_THROWS_AS(f.service.list_events(f.token, "nope", {}), NotFoundError);
}

TEST_CASE("segment matching")
{
    std::vector<RoadSegment> segs{
        {5, 1, {{0.0004, 0}, {0.0004, 0.01}}, {}},
        {3, 1, {{-0.0004, 0}, {-0.0004, 0.01}}, {}},
        {7, 1, {{1, 1}, {1, 1.01}}, {}},
    };
    CHECK(map_event_to_segment({1, 1}, segs) == 7);
    CHECK(map_event_to_segment({0.0004, 0.01}, segs) == 5);
    CHECK(map_event_to_segment({0.5, 0.5}, segs) == std::nullopt);
    // Mirror images across the equator, so exactly equidistant: the lower id wins.
    CHECK(map_event_to_segment({0, 0.005}, segs) == 3);
    // 40 m off the road matches, 60 m does not.
    auto near = destination({0.0004, 0.005}, 0, 40);
    auto far = destination({0.0004, 0.005}, 0, 60);
    CHECK(map_event_to_segment(near, segs) == 5);
    CHECK(map_event_to_segment(far, segs) == std::nullopt);
    CHECK(map_event_to_segment({0, 0}, std::vector<RoadSegment>{}) == std::nullopt);
}

TEST_CASE("risk formula")
{
    CHECK(make_segment_risk(1, 0, 10).risk_per_1000 == 0.0);
    CHECK(make_segment_risk(1, 2, 1000).risk_per_1000 == 2.0);
    auto none = make_segment_risk(1, 3, 0);
    CHECK(none.insufficient_data);
    CHECK(none.risk_per_1000 == 0.0);
    CHECK(!make_segment_risk(1, 3, 4).insufficient_data);
}

TEST_CASE("segment risk counts distinct trips and crashes")
{
    Fixture f;
    f.service.add_road({1, "Corniche"});
    f.service.add_segment({1, 1, {{0, 0}, {0, 0.01}}, {{"lanes", "3"}}});
    f.service.add_segment({2, 1, {{0, 0.02}, {0, 0.03}}, {}});
    f.service.add_crash({1, 1, Timestamp{0}, Severity::minor});
    f.service.add_crash({2, 1, Timestamp{0}, Severity::fatal});
    Rng rng(6);
    for (int t = 0; t < 4; ++t) {
        auto id = f.open_trip("trip-" + std::to_string(t));
        std::vector<TelemetryEvent> ev;
        for (int i = 0; i < 3; ++i) ev.push_back(event_at(rng, id, 1'000'000 + i, {0, 0.001 * (i + 1)}));
        (void)f.service.ingest_events(f.token, id, ev);
    }
    auto r = f.service.segment_risk(f.token, 1);
    CHECK(r.crash_count == 2);
    CHECK(r.traversal_count == 4);
    CHECK(r.risk_per_1000 == 500.0);
    auto empty = f.service.segment_risk(2);
    CHECK(empty.insufficient_data);
    CHECK_THROWS_AS(f.service.segment_risk(9), NotFoundError);
    CHECK_THROWS_AS(f.service.add_crash({3, 9, Timestamp{0}, Severity::minor}), NotFoundError);
    CHECK(f.store.segments().front().attributes.at("lanes") == "3");
}

TEST_CASE("csv imports load every table and remap events")
{
    Fixture f;
    auto id = f.open_trip();
    Rng rng(7);
    std::vector<TelemetryEvent> ev{event_at(rng, id, 1'000'001, {0, 0.005})};
    (void)f.service.ingest_events(f.token, id, ev);
    CHECK(!f.store.all_events().front().segment_id);

    CHECK(f.service.import_csv(ImportKind::drivers,
                               "driver_id,age,gender,username,password\n7,51,male,carol,pw1\n8,23,female,dina,pw2\n") == 2);
    CHECK_NOTHROW(f.service.login("carol", "pw1"));
    CHECK(f.service.import_csv(ImportKind::vehicles, "vehicle_id,model,in_service_date\n20,van,2021-07-15\n") == 1);
    CHECK(f.store.vehicle(20)->in_service_date == Date{2021, 7, 15});
    CHECK(f.service.import_csv(ImportKind::roads, "road_id,name\n1,\"Salwa Road, east\"\n") == 1);
    CHECK(f.store.road(1)->name == "Salwa Road, east");
    CHECK(f.service.import_csv(ImportKind::segments,
                               "segment_id,road_id,polyline,attributes\n4,1,0 0;0 0.01,speed_limit=80;lanes=2\n") == 1);
    CHECK(f.store.all_events().front().segment_id == 4);
    CHECK(f.service.import_csv(ImportKind::crashes,
                               "crash_id,segment_id,ts,severity\n1,4,2023-03-01T10:00:00Z,severe\n") == 1);
    CHECK(f.service.segment_risk(4).risk_per_1000 == 1000.0);

    CHECK_THROWS_AS(f.service.import_csv(ImportKind::crashes, "crash_id,segment_id,ts,severity\n2,99,2023-03-01T10:00:00Z,minor\n"),
                    ValidationError);
    CHECK_THROWS_AS(f.service.import_csv(ImportKind::segments, "segment_id,road_id,polyline\n5,1,0 0\n"), ValidationError);
    CHECK_THROWS_AS(f.service.import_csv(ImportKind::vehicles, "vehicle_id,model\n1,x\n"), ValidationError);
    CHECK_THROWS_AS(parse_import_kind("trucks"), ConfigError);
    CHECK(f.store.integrity_violations() == 0);
}

TEST_CASE("a file store keeps its data across reopening")
{
    testing::TempDir dir;
    auto path = (dir / "db.sqlite").string();
    Rng rng(8);
    std::vector<TelemetryEvent> events;
    {
        Store store(path);
        Service s(store);
        s.register_driver({1, 30, Gender::other}, "u", "p");
        s.add_vehicle({1, "m", Date{2020, 1, 1}});
        auto tok = s.login("u", "p").token;
        (void)s.create_trip(tok, {"t", 1, Timestamp{0}, std::nullopt});
        for (int i = 0; i < 5; ++i) events.push_back(testing::random_event(rng, "t", i));
        (void)s.ingest_events(tok, "t", events);
    }
    Store again(path);
    CHECK(again.trip_events("t") == events);
    CHECK(again.trip("t")->open());
    CHECK_THROWS_AS(Store("/nonexistent-dir/x/y.db"), StorageError);
}
