#include "roadsafe/domain/validate.hpp"
#include "roadsafe/error.hpp"
#include "roadsafe/simagent/agent.hpp"
#include "roadsafe/transport/outbox.hpp"
#include "roadsafe/util/kv_config.hpp"

#include "support.hpp"

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

using namespace roadsafe;
using namespace roadsafe::sim;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

DrivingProfile steady(double speed)
{
    DrivingProfile p;
    p.cruise_speed_mps = speed;
    p.speed_jitter_mps = 0.0;
    p.stop_probability = 0.0;
    p.drowsy_onset_probability = 0.0;
    return p;
}

AgentSpec spec_with(DrivingProfile p, std::int64_t duration, std::uint64_t seed = 1)
{
    AgentSpec s;
    s.profile = p;
    s.route = straight_route({25.2854, 51.5310}, 60.0, 20'000);
    s.duration_s = duration;
    s.seed = seed;
    s.trip_id = make_trip_id(seed, 1);
    s.driver_id = 1;
    s.vehicle_id = 1;
    s.start_ts = Timestamp::from_seconds(1'700'000'000);
    return s;
}

} // namespace

TEST_CASE("synthetic frames are deterministic and bounded")
{
    for (auto s : kAllScenarios) {
        auto a = synth_frame(true, s, 99);
        auto b = synth_frame(true, s, 99);
        CHECK(std::ranges::equal(a.pixels(), b.pixels()));
        CHECK(a.side() == kDefaultFrameSide);
        for (double p : a.pixels()) {
            CHECK(p >= 0.0);
            CHECK(p <= 1.0);
        }
    }
    CHECK(synth_frame(false, Scenario::glasses, 1, 32).side() == 32);
}

TEST_CASE("sunglasses occlude the eye region and night darkens the frame")
{
    double day = 0, night = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        CHECK(eye_region_stats(synth_frame(seed % 2, Scenario::sunglasses, seed)).variance <
              kOcclusionVarianceThreshold);
        day += face_region_stats(synth_frame(false, Scenario::no_glasses, seed)).mean;
        night += face_region_stats(synth_frame(false, Scenario::night_no_glasses, seed)).mean;
    }
    CHECK(night < 0.6 * day);
}

TEST_CASE("eye-region baseline separates open and closed eyes")
{
    nn::EyeRegionBaseline base;
    int correct = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        bool drowsy = seed % 2;
        bool pred = nn::classify(base, synth_frame(drowsy, Scenario::no_glasses, seed)) >= kDrowsyThreshold;
        correct += pred == drowsy;
    }
    CHECK(correct >= 150);
    nn::ConstantClassifier half(0.5);
    CHECK(nn::classify(half, Frame(4)) == 0.5);
    nn::ConstantClassifier wild(3.0);
    CHECK(nn::classify(wild, Frame(4)) == 1.0);
}

TEST_CASE("scenario names round-trip")
{
    for (auto s : kAllScenarios) CHECK(parse_scenario(to_string(s)) == s);
    CHECK_THROWS(parse_scenario("daylight"));
}

TEST_CASE("simulation runs at 1 Hz and is deterministic")
{
    auto route = straight_route({0, 0}, 90, 5000);
    auto a = simulate_trip(DrivingProfile{}, route, 120, 5);
    auto b = simulate_trip(DrivingProfile{}, route, 120, 5);
    REQUIRE(a.size() == 120);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].t == static_cast<double>(i));
        CHECK(a[i].position == b[i].position);
        CHECK(a[i].speed_mps == b[i].speed_mps);
        CHECK(a[i].speed_mps >= 0.0);
    }
    CHECK(simulate_trip(DrivingProfile{}, route, 0, 5).empty());
    CHECK_THROWS_AS(simulate_trip(DrivingProfile{}, std::vector<GeoPoint>{{0, 0}}, 10, 5), ConfigError);
}

TEST_CASE("constant speed straight trip covers speed times elapsed time")
{
    auto route = straight_route({0, 0}, 0, 10'000);
    auto samples = simulate_trip(steady(10.0), route, 300, 1);
    REQUIRE(samples.size() == 300);
    std::vector<GeoPoint> track;
    for (const auto& s : samples) track.push_back(s.position);
    // Samples at t = 0..299 span 299 one-second steps.
    CHECK_THAT(path_length(track), WithinAbs(2990.0, 0.01));
}

TEST_CASE("a zero-length route keeps the vehicle stationary")
{
    std::vector<GeoPoint> route{{1, 1}, {1, 1}};
    for (const auto& s : simulate_trip(steady(12.0), route, 60, 2)) {
        CHECK(s.speed_mps == 0.0);
        CHECK(s.position == GeoPoint(1, 1));
    }
}

TEST_CASE("the vehicle turns around at the route end")
{
    auto route = straight_route({0, 0}, 90, 100);
    auto samples = simulate_trip(steady(10.0), route, 60, 3);
    for (const auto& s : samples) CHECK(distance_to_polyline(s.position, route) < 0.5);
}

TEST_CASE("profiles validate and load from config")
{
    DrivingProfile bad;
    bad.cruise_speed_mps = -1;
    CHECK_THROWS_AS(bad.check(), ConfigError);
    auto cfg = KvConfig::parse("p.cruise_speed_mps = 20\np.scenario = sunglasses\n");
    auto p = DrivingProfile::from_config(cfg, "p.");
    CHECK(p.cruise_speed_mps == 20);
    CHECK(p.scenario == Scenario::sunglasses);
}

TEST_CASE("routes parse from text")
{
    auto r = parse_route("# track\n25.1, 51.2\n\n25.2,51.3\n");
    REQUIRE(r.size() == 2);
    CHECK(r[1] == GeoPoint(25.2, 51.3));
    CHECK_THROWS(parse_route("25.1 51.2\n"));
}

TEST_CASE("window aggregation matches a brute-force scan")
{
    Rng rng(17);
    nn::EyeRegionBaseline classifier;
    auto route = straight_route({10, 10}, 45, 50'000);
    auto samples = simulate_trip(DrivingProfile{}, route, 400, 9);
    for (int trial = 0; trial < 100; ++trial) {
        std::size_t len = 1 + rng.below(15);
        std::size_t start = rng.below(samples.size() - len);
        std::span<const SensorSample> w(samples.data() + start, len);
        auto e = aggregate_window(w, "t", Timestamp{0}, classifier, EventId{});
        double lo = w[0].speed_mps, hi = w[0].speed_mps, sum = 0;
        for (const auto& s : w) {
            lo = std::min(lo, s.speed_mps);
            hi = std::max(hi, s.speed_mps);
            sum += s.speed_mps;
        }
        CHECK(e.speed_min_mps == lo);
        CHECK(e.speed_max_mps == hi);
        CHECK(e.speed_avg_mps == std::clamp(sum / static_cast<double>(len), lo, hi));
        CHECK(e.position == w.back().position);
        CHECK(validate_event(e).empty());
    }
    CHECK_THROWS_AS(aggregate_window({}, "t", Timestamp{0}, classifier, EventId{}), ValidationError);
}

TEST_CASE("one event per started 15 s window")
{
    nn::EyeRegionBaseline classifier;
    for (std::int64_t d : {0, 1, 14, 15, 16, 29, 30, 31, 300}) {
        auto plan = plan_trip(spec_with(steady(8), d), classifier);
        CHECK(plan.events.size() == static_cast<std::size_t>((d + 14) / 15));
        CHECK(plan.sample_count == static_cast<std::size_t>(d));
    }
}

TEST_CASE("plans are deterministic with stable event ids and ordered timestamps")
{
    nn::EyeRegionBaseline classifier;
    auto spec = spec_with(DrivingProfile{}, 200, 4);
    auto a = plan_trip(spec, classifier);
    auto b = plan_trip(spec, classifier);
    REQUIRE(a.events == b.events);
    for (std::size_t i = 0; i < a.events.size(); ++i) {
        CHECK(a.events[i].event_id == make_event_id(spec.seed, spec.trip_id, i));
        if (i > 0) CHECK(a.events[i - 1].ts < a.events[i].ts);
    }
    CHECK(a.events.front().ts == spec.start_ts.plus_ms(14'000));
    CHECK(a.events.back().ts == spec.start_ts.plus_ms(199'000));
    CHECK(*a.trip.end_ts == spec.start_ts.plus_ms(200'000));
    double sum = 0;
    for (double d : a.window_distances) sum += d;
    CHECK(a.trip.distance_m == sum);
    CHECK(make_trip_id(4, 1) != make_trip_id(5, 1));
}

TEST_CASE("event chord distance tracks the 1 Hz distance on straight trips")
{
    nn::EyeRegionBaseline classifier;
    auto plan = plan_trip(spec_with(steady(13.9), 600), classifier);
    double chords = 0;
    GeoPoint prev = plan.start_position;
    for (const auto& e : plan.events) {
        chords += haversine_distance(prev, e.position);
        prev = e.position;
    }
    CHECK_THAT(chords, WithinRel(plan.trip.distance_m, 0.01));
}

TEST_CASE("run_agent enqueues every planned event")
{
    testing::TempDir dir;
    transport::Outbox outbox(dir / "agent.log");
    nn::EyeRegionBaseline classifier;
    auto spec = spec_with(DrivingProfile{}, 90);
    auto trip = run_agent(spec, classifier, outbox);
    CHECK(outbox.pending_count() == 6);
    CHECK(trip.trip_id == spec.trip_id);
    for (const auto& e : plan_trip(spec, classifier).events) CHECK(outbox.holds_event(e.event_id));
}
