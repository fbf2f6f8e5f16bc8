#include "roadsafe/cli/fleet.hpp"

#include "roadsafe/error.hpp"
#include "roadsafe/server/http.hpp"
#include "roadsafe/transport/outbox.hpp"
#include "roadsafe/util/rng.hpp"

#include <algorithm>
#include <cstdlib>
#include <sstream>
#include <unordered_set>

namespace roadsafe::cli {

std::string fleet_username(DriverId driver)
{
    return "driver" + std::to_string(driver);
}

ServiceBackend::ServiceBackend(server::Service& service, std::string password)
    : service_(service), password_(std::move(password))
{
}

void ServiceBackend::prepare(DriverId driver, VehicleId vehicle)
{
    service_.register_driver({driver, 30 + static_cast<int>(driver % 30), Gender::other}, fleet_username(driver),
                             password_);
    service_.add_vehicle({vehicle, "simulated", Date{2020, 1, 1}});
    tokens_[driver] = service_.login(fleet_username(driver), password_).token;
    endpoints_[driver] = std::make_unique<server::InProcessEndpoint>(service_, tokens_[driver]);
}

server::TripRecord ServiceBackend::create_trip(DriverId driver, const server::CreateTripRequest& req)
{
    return service_.create_trip(tokens_.at(driver), req);
}

server::TripRecord ServiceBackend::end_trip(DriverId driver, const TripId& id, const server::EndTripRequest& req)
{
    return service_.end_trip(tokens_.at(driver), id, req);
}

transport::Endpoint& ServiceBackend::endpoint(DriverId driver)
{
    return *endpoints_.at(driver);
}

std::vector<TelemetryEvent> ServiceBackend::stored_events(DriverId driver, const TripId& id)
{
    (void)driver;
    return service_.store().trip_events(id);
}

HttpBackend::HttpBackend(std::string base_url, std::string password)
    : base_url_(std::move(base_url)), password_(std::move(password))
{
}

HttpBackend::~HttpBackend() = default;

void HttpBackend::prepare(DriverId driver, VehicleId vehicle)
{
    (void)vehicle;
    auto c = std::make_unique<server::HttpClient>(base_url_);
    (void)c->login(fleet_username(driver), password_);
    endpoints_[driver] = std::make_unique<server::HttpEndpoint>(*c);
    clients_[driver] = std::move(c);
}

server::HttpClient& HttpBackend::client(DriverId driver)
{
    return *clients_.at(driver);
}

server::TripRecord HttpBackend::create_trip(DriverId driver, const server::CreateTripRequest& req)
{
    return client(driver).create_trip(req);
}

server::TripRecord HttpBackend::end_trip(DriverId driver, const TripId& id, const server::EndTripRequest& req)
{
    return client(driver).end_trip(id, req);
}

transport::Endpoint& HttpBackend::endpoint(DriverId driver)
{
    return *endpoints_.at(driver);
}

std::vector<TelemetryEvent> HttpBackend::stored_events(DriverId driver, const TripId& id)
{
    return client(driver).all_events(id);
}

void FleetRun::check() const
{
    if (drivers < 1) throw ConfigError("fleet needs at least one driver");
    if (duration_s < 0) throw ConfigError("duration must be >= 0");
    if (batch_size < 1) throw ConfigError("batch size must be >= 1");
    if (drain_limit_s < 0) throw ConfigError("drain limit must be >= 0");
    if (frame_side < 1) throw ConfigError("frame side must be positive");
    if (!route.empty() && route.size() < 2) throw ConfigError("route needs at least two points");
    for (const auto& p : profiles) p.check();
    link.check();
    retry.check();
}

namespace {

struct Device {
    DriverId driver = 0;
    sim::TripPlan plan;
    std::unique_ptr<transport::Outbox> outbox;
    std::size_t next_event = 0;
};

std::filesystem::path make_temp_dir()
{
    auto pattern = (std::filesystem::temp_directory_path() / "roadsafe-fleet-XXXXXX").string();
    if (!::mkdtemp(pattern.data())) throw Error("cannot create temporary outbox directory");
    return pattern;
}

struct TempDirGuard {
    std::filesystem::path path;
    ~TempDirGuard()
    {
        std::error_code ec;
        if (!path.empty()) std::filesystem::remove_all(path, ec);
    }
};

sim::AgentSpec spec_for(const FleetRun& run, DriverId driver)
{
    sim::AgentSpec spec;
    auto idx = static_cast<std::size_t>(driver - 1);
    if (run.profiles.empty()) {
        spec.profile.scenario = sim::kAllScenarios[idx % sim::kAllScenarios.size()];
    } else {
        spec.profile = run.profiles[idx % run.profiles.size()];
    }
    spec.route = run.route;
    if (spec.route.empty()) {
        double length = std::max(1000.0, spec.profile.cruise_speed_mps * static_cast<double>(run.duration_s) * 1.1);
        GeoPoint origin(25.2854 + 0.01 * static_cast<double>(idx % 20), 51.5310 + 0.01 * static_cast<double>(idx / 20));
        spec.route = sim::straight_route(origin, static_cast<double>((idx * 47) % 360), length);
    }
    spec.duration_s = run.duration_s;
    spec.seed = hash_combine(run.seed, static_cast<std::uint64_t>(driver));
    spec.trip_id = sim::make_trip_id(run.seed, driver);
    spec.driver_id = driver;
    spec.vehicle_id = driver;
    spec.start_ts = run.start_ts;
    spec.frame_side = run.frame_side;
    return spec;
}

} // namespace

FleetSummary run_fleet(const FleetRun& run, const nn::DrowsinessClassifier& classifier, FleetBackend& backend)
{
    run.check();
    TempDirGuard guard;
    auto dir = run.outbox_dir;
    if (dir.empty()) {
        dir = make_temp_dir();
        guard.path = dir;
    }
    std::filesystem::create_directories(dir);

    transport::LinkSimulator link(run.link);
    FleetSummary summary;
    std::vector<Device> devices;
    for (std::size_t i = 1; i <= run.drivers; ++i) {
        auto driver = static_cast<DriverId>(i);
        auto spec = spec_for(run, driver);
        Device d;
        d.driver = driver;
        d.plan = sim::plan_trip(spec, classifier);
        d.outbox = std::make_unique<transport::Outbox>(dir / (fleet_username(driver) + ".outbox"));
        backend.prepare(driver, spec.vehicle_id);
        auto rec = backend.create_trip(driver, {spec.trip_id, spec.vehicle_id, spec.start_ts, d.plan.start_position});
        if (!rec.open()) throw ConflictError("trip " + spec.trip_id + " is already closed on the server; use another seed");
        summary.generated += d.plan.events.size();
        devices.push_back(std::move(d));
    }

    Timestamp last_event = run.start_ts;
    for (const auto& d : devices)
        if (!d.plan.events.empty()) last_event = std::max(last_event, d.plan.events.back().ts);
    const Timestamp deadline = last_event.plus_ms(run.drain_limit_s * 1000);

    Timestamp now = run.start_ts;
    for (;;) {
        for (auto& d : devices) {
            while (d.next_event < d.plan.events.size() && d.plan.events[d.next_event].ts <= now)
                (void)d.outbox->enqueue(d.plan.events[d.next_event++], now);
        }
        for (auto& d : devices) {
            auto due = d.outbox->next_due();
            if (due && *due <= now)
                summary.delivery += transport::flush(*d.outbox, link, backend.endpoint(d.driver), run.retry,
                                                     run.batch_size, now, static_cast<std::uint64_t>(d.driver));
        }
        std::optional<Timestamp> next;
        for (const auto& d : devices) {
            if (d.next_event < d.plan.events.size()) {
                auto t = d.plan.events[d.next_event].ts;
                next = next ? std::min(*next, t) : t;
            }
            if (auto due = d.outbox->next_due()) next = next ? std::min(*next, *due) : *due;
        }
        if (!next || *next > deadline) break;
        now = std::max(*next, now.plus_ms(1));
    }
    summary.finished_at = now;

    for (auto& d : devices) {
        summary.undelivered += d.outbox->pending_count();
        summary.rejected += d.outbox->poisoned_count();
        const auto& t = d.plan.trip;
        summary.trips.push_back(backend.end_trip(
            d.driver, t.trip_id, {*t.end_ts, t.distance_m, t.speed_min_mps, t.speed_avg_mps, t.speed_max_mps}));
        std::unordered_set<EventId> stored;
        for (const auto& e : backend.stored_events(d.driver, t.trip_id)) stored.insert(e.event_id);
        for (const auto& e : d.plan.events) summary.stored += stored.contains(e.event_id) ? 1 : 0;
    }
    // Lost responses hide first acceptances from the client; count what the server holds.
    summary.accepted = summary.stored;
    summary.duplicates = summary.delivery.duplicates;
    return summary;
}

std::string render_summary(const FleetSummary& s)
{
    std::ostringstream out;
    out << "trips:        " << s.trips.size() << '\n'
        << "generated:    " << s.generated << '\n'
        << "accepted:     " << s.accepted << '\n'
        << "duplicates:   " << s.duplicates << '\n'
        << "rejected:     " << s.rejected << '\n'
        << "stored:       " << s.stored << '\n'
        << "undelivered:  " << s.undelivered << '\n'
        << "lost:         " << s.lost() << '\n'
        << "acked new:    " << s.delivery.accepted << '\n'
        << "batches:      " << s.delivery.batches_sent << '\n'
        << "requests lost:  " << s.delivery.requests_lost << '\n'
        << "responses lost: " << s.delivery.responses_lost << '\n';
    return out.str();
}

} // namespace roadsafe::cli
