#include "roadsafe/cli/app.hpp"
#include "roadsafe/cli/dataset.hpp"
#include "roadsafe/cli/fleet.hpp"
#include "roadsafe/cli/report.hpp"
#include "roadsafe/error.hpp"
#include "roadsafe/server/http.hpp"

#include "support.hpp"

#include <catch_amalgamated.hpp>

#include <fstream>
#include <set>
#include <sstream>
#include <thread>

using namespace roadsafe;
using namespace roadsafe::cli;
using Catch::Matchers::WithinAbs;

namespace {

struct CliResult {
    int code;
    std::string out;
    std::string err;
};

CliResult invoke(std::vector<std::string> args)
{
    args.insert(args.begin(), "roadsafe");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const nn::EyeRegionBaseline kBaseline;

} // namespace

TEST_CASE("a clean fleet run stores every event")
{
    server::Store store(":memory:");
    server::Service service(store);
    ServiceBackend backend(service, "pw");
    FleetRun run;
    run.drivers = 3;
    run.duration_s = 300;
    auto s = run_fleet(run, kBaseline, backend);
    CHECK(s.generated == 60);
    CHECK(s.stored == 60);
    CHECK(s.accepted == 60);
    CHECK(s.lost() == 0);
    CHECK(s.rejected == 0);
    REQUIRE(s.trips.size() == 3);
    for (const auto& t : s.trips) {
        CHECK(!t.open());
        CHECK(t.event_count == 20);
        CHECK(t.discrepancy_ratio() < 0.01);
    }
    CHECK(store.event_count() == 60);
    CHECK(store.integrity_violations() == 0);
    CHECK(render_summary(s).find("lost:         0") != std::string::npos);
}

TEST_CASE("a lossy fleet run still delivers everything exactly once")
{
    server::Store store(":memory:");
    server::Service service(store);
    ServiceBackend backend(service, "pw");
    FleetRun run;
    run.drivers = 4;
    run.duration_s = 300;
    run.link.loss_probability = 0.3;
    run.link.seed = 9;
    run.link.outages = {{run.start_ts.plus_ms(60'000), run.start_ts.plus_ms(120'000)}};
    auto s = run_fleet(run, kBaseline, backend);
    CHECK(s.generated == 80);
    CHECK(s.stored == 80);
    CHECK(store.event_count() == 80);
    CHECK(s.delivery.requests_lost + s.delivery.responses_lost > 0);
}

TEST_CASE("fleet runs are deterministic")
{
    auto once = [] {
        server::Store store(":memory:");
        server::Service service(store);
        ServiceBackend backend(service, "pw");
        FleetRun run;
        run.drivers = 2;
        run.duration_s = 120;
        run.link.loss_probability = 0.2;
        (void)run_fleet(run, kBaseline, backend);
        return store.all_events();
    };
    CHECK(once() == once());
}

TEST_CASE("fleet run over http")
{
    server::Store store(":memory:");
    server::Service service(store);
    for (DriverId d = 1; d <= 2; ++d) {
        service.register_driver({d, 30, Gender::other}, fleet_username(d), "pw");
        service.add_vehicle({d, "van", Date{2020, 1, 1}});
    }
    server::HttpServer http(service);
    int port = http.bind("127.0.0.1", 0);
    std::thread t([&] { http.run(); });
    FleetRun run;
    run.drivers = 2;
    run.duration_s = 60;
    HttpBackend backend("http://127.0.0.1:" + std::to_string(port), "pw");
    auto s = run_fleet(run, kBaseline, backend);
    http.stop();
    t.join();
    CHECK(s.generated == 8);
    CHECK(s.stored == 8);
    CHECK(store.event_count() == 8);
}

TEST_CASE("fleet configuration is checked")
{
    FleetRun run;
    run.drivers = 0;
    CHECK_THROWS_AS(run.check(), ConfigError);
    run.drivers = 1;
    run.duration_s = -1;
    CHECK_THROWS_AS(run.check(), ConfigError);
}

TEST_CASE("trip report")
{
    server::Store store(":memory:");
    server::Service service(store);
    ServiceBackend backend(service, "pw");
    FleetRun run;
    run.duration_s = 150;
    auto s = run_fleet(run, kBaseline, backend);
    const auto& trip = s.trips.front();
    auto events = store.trip_events(trip.trip.trip_id);
    auto shuffled = events;
    std::reverse(shuffled.begin(), shuffled.end());
    auto a = make_report(trip, events);
    auto b = make_report(trip, shuffled);
    CHECK(render_report(a) == render_report(b));
    CHECK(a.events == events);
    std::size_t drowsy = 0;
    for (const auto& e : events) drowsy += e.drowsy ? 1 : 0;
    CHECK(a.summary.drowsy_events == drowsy);
    CHECK_THAT(a.summary.distance_m, WithinAbs(trip.server_distance_m, 1e-6));
    CHECK_THAT(a.summary.duration_s, WithinAbs(150.0, 1e-9));
    auto text = render_report(a);
    CHECK(text.find(trip.trip.trip_id) != std::string::npos);
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) CHECK((line.empty() || line.back() != ' '));

    server::TripRecord one = trip;
    one.start_position = GeoPoint(0, 0);
    auto single = events.front();
    single.position = GeoPoint(0, 0.001);
    auto r1 = make_report(one, {single});
    CHECK_THAT(r1.summary.distance_m, WithinAbs(haversine_distance({0, 0}, {0, 0.001}), 1e-9));
    auto empty = make_report(one, {});
    CHECK(empty.summary.distance_m == 0.0);
    CHECK(empty.summary.drowsy_events == 0);
}

TEST_CASE("geojson export round trips")
{
    Rng rng(1);
    CHECK(export_geojson("t", {})["features"].empty());
    std::vector<TelemetryEvent> events;
    for (int i = 0; i < 5; ++i) events.push_back(testing::random_event(rng, "t", 1000 * i));
    auto gj = export_geojson("t", events);
    CHECK(gj["type"] == "FeatureCollection");
    REQUIRE(gj["features"].size() == 6);
    CHECK(gj["features"][0]["geometry"]["type"] == "LineString");
    CHECK(gj["features"][1]["geometry"]["type"] == "Point");
    CHECK(gj["features"][1]["geometry"]["coordinates"][0] == events[0].position.lon());
    CHECK(gj["features"][1]["geometry"]["coordinates"][1] == events[0].position.lat());
    CHECK(import_geojson(nlohmann::json::parse(gj.dump())) == events);
    std::vector<TelemetryEvent> one{events[0]};
    CHECK(export_geojson("t", one)["features"].size() == 1);
    CHECK_THROWS_AS(import_geojson(nlohmann::json::array()), DecodeError);
}

TEST_CASE("frame datasets round trip through files")
{
    testing::TempDir dir;
    auto groups = synth_dataset(6, 12, 3);
    REQUIRE(groups.size() == sim::kAllScenarios.size());
    for (const auto& [sc, items] : groups) {
        REQUIRE(items.size() == 6);
        for (std::size_t i = 0; i < items.size(); ++i) CHECK(items[i].label == (i % 2 == 1 ? nn::kDrowsyClass : 1 - nn::kDrowsyClass));
    }
    write_dataset(dir.path(), groups);
    auto back = load_dataset(dir.path());
    REQUIRE(back.size() == groups.size());
    for (const auto& [sc, items] : groups) {
        const auto& got = back.at(sc);
        REQUIRE(got.size() == items.size());
        for (std::size_t i = 0; i < items.size(); ++i) {
            CHECK(got[i].label == items[i].label);
            for (int y = 0; y < 12; ++y)
                for (int x = 0; x < 12; ++x) CHECK(std::abs(got[i].frame.at(x, y) - items[i].frame.at(x, y)) <= 0.5 / 255 + 1e-12);
        }
    }
    CHECK(pooled(groups).size() == 30);

    std::ofstream(dir / "broken.frames") << "xx";
    CHECK_THROWS_AS(read_frames(dir / "broken.frames", sim::Scenario::glasses), ValidationError);
    testing::TempDir empty;
    CHECK_THROWS_AS(load_dataset(empty.path()), ValidationError);
}

TEST_CASE("command line exit codes")
{
    testing::TempDir dir;
    CHECK(invoke({}).code == kExitUsage);
    CHECK(invoke({"frobnicate"}).code == kExitUsage);
    CHECK(invoke({"--help"}).code == kExitOk);
    CHECK(invoke({"simulate", "--drivers", "0"}).code == kExitUsage);
    CHECK(invoke({"simulate", "--outage", "90:30"}).code == kExitUsage);

    auto db = (dir / "fleet.db").string();
    auto sim = invoke({"simulate", "--drivers", "2", "--duration", "60", "--loss", "0.2", "--storage", db, "--seed", "4"});
    INFO(sim.err);
    REQUIRE(sim.code == kExitOk);
    CHECK(sim.out.find("generated:    8") != std::string::npos);
    CHECK(sim.out.find("lost:         0") != std::string::npos);

    auto trip_id = sim::make_trip_id(4, 1);
    auto rep = invoke({"report", trip_id, "--storage", db});
    CHECK(rep.code == kExitOk);
    CHECK(rep.out.find(trip_id) != std::string::npos);
    CHECK(invoke({"report", "no-such-trip", "--storage", db}).code == kExitData);

    auto gj_path = dir / "trip.geojson";
    CHECK(invoke({"export-geojson", trip_id, "--storage", db, "--out", gj_path.string()}).code == kExitOk);
    auto gj = nlohmann::json::parse(slurp(gj_path));
    CHECK(gj["features"].size() == 5);

    std::ofstream(dir / "roads.csv") << "road_id,name\n1,Main\n";
    std::ofstream(dir / "bad.csv") << "road_id,name\nx,Main\n";
    CHECK(invoke({"import", "roads", (dir / "roads.csv").string(), "--storage", db}).code == kExitOk);
    CHECK(invoke({"import", "roads", (dir / "bad.csv").string(), "--storage", db}).code == kExitData);
    CHECK(invoke({"import", "roads", (dir / "roads.csv").string()}).code == kExitUsage);
    CHECK(invoke({"import", "roads", (dir / "missing.csv").string(), "--storage", db}).code == kExitIo);

    auto data = (dir / "frames").string();
    CHECK(invoke({"synth-frames", "--out", data, "--per-scenario", "4", "--side", "16"}).code == kExitOk);
    auto ev = invoke({"eval", "--data", data});
    CHECK(ev.code == kExitOk);
    CHECK(ev.out.find("All") != std::string::npos);
    auto model = (dir / "m.bin").string();
    CHECK(invoke({"train", "--data", data, "--out", model, "--epochs", "1"}).code == kExitOk);
    CHECK(invoke({"eval", "--data", data, "--model", model}).code == kExitOk);
    CHECK(invoke({"eval", "--data", (dir / "nothing").string()}).code == kExitData);
}
