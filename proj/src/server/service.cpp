#include "roadsafe/server/service.hpp"

#include "roadsafe/domain/validate.hpp"
#include "roadsafe/error.hpp"
#include "roadsafe/util/csv.hpp"
#include "roadsafe/util/kv_config.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <limits>

namespace roadsafe::server {

std::optional<SegmentId> map_event_to_segment(GeoPoint position, std::span<const RoadSegment> segments,
                                              double radius_m)
{
    std::optional<SegmentId> best;
    double best_d = std::numeric_limits<double>::infinity();
    for (const auto& s : segments) {
        double d = distance_to_polyline(position, s.polyline);
        if (d > radius_m) continue;
        bool closer = d < best_d - kMatchTieEpsilonM;
        bool tie_lower = std::abs(d - best_d) <= kMatchTieEpsilonM && best && s.segment_id < *best;
        if (!best || closer || tie_lower) {
            best = s.segment_id;
            best_d = d;
        }
    }
    return best;
}

SegmentRisk make_segment_risk(SegmentId id, std::size_t crashes, std::size_t traversals) noexcept
{
    SegmentRisk r{id, crashes, traversals, 0.0, traversals == 0};
    if (traversals > 0) r.risk_per_1000 = 1000.0 * static_cast<double>(crashes) / static_cast<double>(traversals);
    return r;
}

double recompute_distance(const std::optional<GeoPoint>& start, std::span<const TelemetryEvent> events)
{
    double d = 0.0;
    std::optional<GeoPoint> prev = start;
    for (const auto& e : events) {
        if (prev) d += haversine_distance(*prev, e.position);
        prev = e.position;
    }
    return d;
}

void ServiceConfig::check() const
{
    if (token_ttl_ms <= 0) throw ConfigError("token_ttl_s must be positive");
    if (!(match_radius_m > 0.0) || !std::isfinite(match_radius_m)) throw ConfigError("match_radius_m must be positive");
}

ServiceConfig ServiceConfig::from_config(const KvConfig& cfg)
{
    ServiceConfig c;
    c.token_ttl_ms = cfg.get_int("token_ttl_s", kDefaultTokenTtlMs / 1000) * 1000;
    c.match_radius_m = cfg.get_double("match_radius_m", kMatchRadiusM);
    c.check();
    return c;
}

ImportKind parse_import_kind(std::string_view text)
{
    if (text == "drivers") return ImportKind::drivers;
    if (text == "vehicles") return ImportKind::vehicles;
    if (text == "roads") return ImportKind::roads;
    if (text == "segments") return ImportKind::segments;
    if (text == "crashes") return ImportKind::crashes;
    throw ConfigError("unknown import kind '" + std::string(text) + "'");
}

Timestamp system_now()
{
    using namespace std::chrono;
    return Timestamp{duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count()};
}

Service::Service(Store& store, ServiceConfig config, Clock clock)
    : store_(store), config_(config), clock_(std::move(clock))
{
    config_.check();
    reload_segments();
}

void Service::register_driver(const Driver& driver, const std::string& username, const std::string& password)
{
    if (username.empty()) throw ValidationError("username must not be empty");
    if (password.empty()) throw ValidationError("password must not be empty");
    store_.upsert_driver(driver);
    auto salt = random_hex(16);
    store_.set_credentials({driver.driver_id, username, salt, hash_password(password, salt)});
}

void Service::add_vehicle(const Vehicle& v)
{
    store_.upsert_vehicle(v);
}

void Service::add_road(const Road& r)
{
    store_.upsert_road(r);
}

void Service::add_segment(const RoadSegment& s)
{
    store_.upsert_segment(s);
    reload_segments();
    remap_events();
}

void Service::add_crash(const CrashRecord& c)
{
    store_.upsert_crash(c);
}

namespace {

template <class T>
T parse_number(const CsvRow& row, const std::string& column)
{
    const auto& text = row.at(column);
    T v{};
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || p != text.data() + text.size())
        throw ValidationError("line " + std::to_string(row.line) + ": bad number in '" + column + "'");
    return v;
}

std::vector<GeoPoint> parse_polyline(const std::string& text, std::size_t line)
{
    std::vector<GeoPoint> pts;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto end = text.find(';', pos);
        if (end == std::string::npos) end = text.size();
        auto item = text.substr(pos, end - pos);
        auto sp = item.find_first_of(' ');
        double lat = 0, lon = 0;
        try {
            if (sp == std::string::npos) throw std::invalid_argument("no separator");
            std::size_t used = 0;
            auto rest = item.substr(sp + 1);
            lat = std::stod(item.substr(0, sp));
            lon = std::stod(rest, &used);
            if (used != rest.size()) throw std::invalid_argument("trailing text");
        } catch (const std::logic_error&) {
            throw ValidationError("line " + std::to_string(line) + ": bad polyline point '" + item + "'");
        }
        try {
            pts.emplace_back(lat, lon);
        } catch (const GeoError& e) {
            throw ValidationError("line " + std::to_string(line) + ": " + e.what());
        }
        pos = end + 1;
    }
    return pts;
}

std::map<std::string, std::string> parse_attributes(const std::string& text, std::size_t line)
{
    std::map<std::string, std::string> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto end = text.find(';', pos);
        if (end == std::string::npos) end = text.size();
        auto item = text.substr(pos, end - pos);
        auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0)
            throw ValidationError("line " + std::to_string(line) + ": bad attribute '" + item + "'");
        out[item.substr(0, eq)] = item.substr(eq + 1);
        pos = end + 1;
    }
    return out;
}

} // namespace

std::size_t Service::import_csv(ImportKind kind, std::string_view text)
{
    auto rows = parse_csv(text);
    for (const auto& row : rows) {
        auto wrap = [&](auto&& fn) {
            try {
                fn();
            } catch (const ValidationError&) {
                throw;
            } catch (const Error& e) {
                throw ValidationError("line " + std::to_string(row.line) + ": " + e.what());
            }
        };
        switch (kind) {
        case ImportKind::drivers:
            wrap([&] {
                Driver d{parse_number<std::int64_t>(row, "driver_id"), parse_number<int>(row, "age"),
                         parse_gender(row.at("gender"))};
                register_driver(d, row.at("username"), row.at("password"));
            });
            break;
        case ImportKind::vehicles:
            wrap([&] {
                store_.upsert_vehicle(
                    {parse_number<std::int64_t>(row, "vehicle_id"), row.at("model"), parse_date(row.at("in_service_date"))});
            });
            break;
        case ImportKind::roads:
            wrap([&] { store_.upsert_road({parse_number<std::int64_t>(row, "road_id"), row.at("name")}); });
            break;
        case ImportKind::segments:
            wrap([&] {
                RoadSegment s;
                s.segment_id = parse_number<std::int64_t>(row, "segment_id");
                s.road_id = parse_number<std::int64_t>(row, "road_id");
                s.polyline = parse_polyline(row.at("polyline"), row.line);
                if (auto it = row.fields.find("attributes"); it != row.fields.end())
                    s.attributes = parse_attributes(it->second, row.line);
                store_.upsert_segment(s);
            });
            break;
        case ImportKind::crashes:
            wrap([&] {
                store_.upsert_crash({parse_number<std::int64_t>(row, "crash_id"),
                                     parse_number<std::int64_t>(row, "segment_id"), parse_iso8601(row.at("ts")),
                                     parse_severity(row.at("severity"))});
            });
            break;
        }
    }
    if (kind == ImportKind::segments && !rows.empty()) {
        reload_segments();
        remap_events();
    }
    return rows.size();
}

SessionToken Service::login(const std::string& username, const std::string& password)
{
    auto creds = store_.credentials(username);
    // Hash even for unknown users so both failures cost the same.
    std::string salt = creds ? creds->salt_hex : std::string(32, '0');
    std::string hash = hash_password(password, salt);
    if (!creds || !secure_equal(hash, creds->hash_hex)) throw AuthError();
    SessionToken tok{random_hex(32), creds->driver_id, clock_().plus_ms(config_.token_ttl_ms)};
    std::lock_guard lk(sessions_mu_);
    sessions_[tok.token] = tok;
    return tok;
}

DriverId Service::authenticate(const std::string& token)
{
    std::lock_guard lk(sessions_mu_);
    auto it = sessions_.find(token);
    if (it == sessions_.end()) throw AuthError("invalid token");
    if (clock_() >= it->second.expiry) {
        sessions_.erase(it);
        throw AuthError("token expired");
    }
    return it->second.driver_id;
}

TripRecord Service::owned_trip(DriverId driver, const TripId& id) const
{
    auto rec = store_.trip(id);
    // Another driver's trip is reported as absent.
    if (!rec || rec->trip.driver_id != driver) throw NotFoundError("trip " + id + " not found");
    return *rec;
}

TripRecord Service::create_trip(const std::string& token, const CreateTripRequest& req)
{
    DriverId driver = authenticate(token);
    if (!store_.vehicle(req.vehicle_id)) throw NotFoundError("vehicle " + std::to_string(req.vehicle_id) + " not found");
    TripRecord rec;
    rec.trip.trip_id = req.trip_id ? *req.trip_id : "trip-" + random_hex(12);
    if (rec.trip.trip_id.empty()) throw ValidationError("trip_id must not be empty");
    rec.trip.driver_id = driver;
    rec.trip.vehicle_id = req.vehicle_id;
    rec.trip.start_ts = req.start_ts;
    rec.start_position = req.start_position;
    if (req.trip_id) {
        if (auto existing = store_.trip(*req.trip_id)) {
            const auto& t = existing->trip;
            if (t.driver_id == driver && t.vehicle_id == req.vehicle_id && t.start_ts == req.start_ts) return *existing;
            throw ConflictError("trip " + *req.trip_id + " already exists");
        }
    }
    try {
        store_.insert_trip(rec);
    } catch (const ConflictError&) {
        // Concurrent identical create: the winner's row is the answer.
        auto existing = store_.trip(rec.trip.trip_id);
        if (existing && existing->trip.driver_id == driver && existing->trip.start_ts == req.start_ts) return *existing;
        throw;
    }
    return rec;
}

TripRecord Service::end_trip(const std::string& token, const TripId& trip_id, const EndTripRequest& req)
{
    DriverId driver = authenticate(token);
    auto rec = owned_trip(driver, trip_id);
    if (!rec.open()) throw ConflictError("trip " + trip_id + " already ended");
    if (req.end_ts < rec.trip.start_ts) throw ValidationError("end_ts precedes start_ts");
    for (double v : {req.distance_m, req.speed_min_mps, req.speed_avg_mps, req.speed_max_mps})
        if (!std::isfinite(v) || v < 0.0) throw ValidationError("trip summary values must be finite and >= 0");
    auto events = store_.trip_events(trip_id);
    double server = recompute_distance(rec.start_position, events);
    store_.close_trip(trip_id, req.end_ts, req.distance_m, req.speed_min_mps, req.speed_avg_mps, req.speed_max_mps,
                      server);
    return *store_.trip(trip_id);
}

transport::IngestResult Service::ingest_events(const std::string& token, const TripId& trip_id,
                                               std::span<const TelemetryEvent> batch)
{
    DriverId driver = authenticate(token);
    auto rec = owned_trip(driver, trip_id);
    if (!rec.open()) throw ConflictError("trip " + trip_id + " is closed");

    transport::IngestResult result;
    std::vector<StoredEvent> rows;
    rows.reserve(batch.size());
    {
        std::shared_lock lk(segments_mu_);
        for (const auto& e : batch) {
            if (e.trip_id != trip_id) {
                result.rejected.emplace_back(e.event_id, "trip_id: does not match " + trip_id);
                continue;
            }
            auto violations = validate_event(e);
            if (!violations.empty()) {
                result.rejected.emplace_back(e.event_id, describe(violations));
                continue;
            }
            rows.push_back({e, map_event_to_segment(e.position, segments_, config_.match_radius_m)});
        }
    }
    auto outcomes = store_.insert_events(rows);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (outcomes[i] == InsertOutcome::inserted) result.accepted.push_back(rows[i].event.event_id);
        else result.duplicates.push_back(rows[i].event.event_id);
    }
    return result;
}

std::vector<TripRecord> Service::list_trips(const std::string& token)
{
    return store_.trips_for_driver(authenticate(token));
}

TripRecord Service::get_trip(const std::string& token, const TripId& trip_id)
{
    return owned_trip(authenticate(token), trip_id);
}

EventPage Service::list_events(const std::string& token, const TripId& trip_id, const EventQuery& query)
{
    (void)owned_trip(authenticate(token), trip_id);
    return store_.events_page(trip_id, query);
}

SegmentRisk Service::segment_risk(const std::string& token, SegmentId id)
{
    (void)authenticate(token);
    return segment_risk(id);
}

SegmentRisk Service::segment_risk(SegmentId id) const
{
    if (!store_.has_segment(id)) throw NotFoundError("segment " + std::to_string(id) + " not found");
    return make_segment_risk(id, store_.crash_count(id), store_.traversal_count(id));
}

void Service::reload_segments()
{
    auto segs = store_.segments();
    std::unique_lock lk(segments_mu_);
    segments_ = std::move(segs);
}

void Service::remap_events()
{
    std::shared_lock lk(segments_mu_);
    for (const auto& s : store_.all_events()) {
        auto seg = map_event_to_segment(s.event.position, segments_, config_.match_radius_m);
        if (seg != s.segment_id) store_.set_event_segment(s.event.event_id, seg);
    }
}

transport::SendOutcome InProcessEndpoint::post_events(const TripId& trip_id, std::span<const TelemetryEvent> batch)
{
    transport::SendOutcome out;
    try {
        out.result = service_.ingest_events(token_, trip_id, batch);
    } catch (const NotFoundError& e) {
        out.status = transport::SendStatus::rejected;
        out.error = e.what();
    } catch (const ConflictError& e) {
        out.status = transport::SendStatus::rejected;
        out.error = e.what();
    } catch (const std::exception& e) {
        out.status = transport::SendStatus::transient;
        out.error = e.what();
    }
    return out;
}

} // namespace roadsafe::server
