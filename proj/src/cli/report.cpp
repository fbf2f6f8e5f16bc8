#include "roadsafe/cli/report.hpp"

#include "roadsafe/domain/wire.hpp"
#include "roadsafe/error.hpp"
#include "roadsafe/server/service.hpp"

#include <algorithm>
#include <cstdio>

namespace roadsafe::cli {

using nlohmann::json;

TripReport make_report(const server::TripRecord& trip, std::vector<TelemetryEvent> events)
{
    std::stable_sort(events.begin(), events.end(), [](const auto& a, const auto& b) {
        return a.ts != b.ts ? a.ts < b.ts : a.event_id < b.event_id;
    });
    TripReport r{trip, std::move(events), {}};
    auto& s = r.summary;
    s.distance_m = server::recompute_distance(trip.start_position, r.events);
    Timestamp end = trip.trip.end_ts ? *trip.trip.end_ts : (r.events.empty() ? trip.trip.start_ts : r.events.back().ts);
    s.duration_s = static_cast<double>(end.ms - trip.trip.start_ts.ms) / 1000.0;
    if (!r.events.empty()) {
        s.speed_min_mps = r.events.front().speed_min_mps;
        double sum = 0.0;
        for (const auto& e : r.events) {
            s.speed_min_mps = std::min(s.speed_min_mps, e.speed_min_mps);
            s.speed_max_mps = std::max(s.speed_max_mps, e.speed_max_mps);
            sum += e.speed_avg_mps;
            s.drowsy_events += e.drowsy ? 1 : 0;
        }
        s.speed_avg_mps = sum / static_cast<double>(r.events.size());
    }
    return r;
}

namespace {

void line(std::string& out, const char* fmt, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, fmt, args...);
    out += buf;
    out += '\n';
}

} // namespace

std::string render_report(const TripReport& r)
{
    std::string out;
    const auto& t = r.trip.trip;
    line(out, "Trip %s", t.trip_id.c_str());
    line(out, "driver %lld  vehicle %lld", static_cast<long long>(t.driver_id), static_cast<long long>(t.vehicle_id));
    line(out, "start %s  end %s", to_iso8601(t.start_ts).c_str(), t.end_ts ? to_iso8601(*t.end_ts).c_str() : "open");
    out += '\n';
    const char* head = "%-36s  %-24s  %11s  %11s  %6s  %7s  %7s  %7s  %7s  %7s  %7s  %8s  %8s  %8s  %6s  %s";
    const char* row = "%-36s  %-24s  %11.6f  %11.6f  %6.1f  %7.2f  %7.1f  %7.2f  %7.2f  %7.2f  %7.2f  %8.2f  %8.2f  %8.2f  %6.3f  %s";
    line(out, head, "event_id", "ts", "lat", "lon", "gps_m", "speed", "heading", "min", "avg", "max", "accel", "roll",
         "pitch", "yaw", "score", "drowsy");
    for (const auto& e : r.events) {
        line(out, row, e.event_id.to_string().c_str(), to_iso8601(e.ts).c_str(), e.position.lat(), e.position.lon(),
             e.gps_accuracy_m, e.speed_mps, e.heading_deg, e.speed_min_mps, e.speed_avg_mps, e.speed_max_mps,
             e.accel_mps2, e.roll_dps, e.pitch_dps, e.yaw_dps, e.drowsiness_score, e.drowsy ? "yes" : "no");
    }
    out += '\n';
    const auto& s = r.summary;
    line(out, "events          %zu", r.events.size());
    line(out, "distance        %.1f m", s.distance_m);
    line(out, "client distance %.1f m", t.distance_m);
    line(out, "duration        %.0f s", s.duration_s);
    line(out, "speed min/avg/max  %.2f / %.2f / %.2f m/s", s.speed_min_mps, s.speed_avg_mps, s.speed_max_mps);
    line(out, "drowsy events   %zu", s.drowsy_events);
    return out;
}

json export_geojson(const TripId& trip_id, std::span<const TelemetryEvent> events)
{
    json features = json::array();
    if (events.size() >= 2) {
        json coords = json::array();
        for (const auto& e : events) coords.push_back({e.position.lon(), e.position.lat()});
        features.push_back({{"type", "Feature"},
                            {"geometry", {{"type", "LineString"}, {"coordinates", coords}}},
                            {"properties", {{"trip_id", trip_id}, {"kind", "track"}}}});
    }
    for (const auto& e : events) {
        json props = event_to_json(e);
        props.erase("position");
        features.push_back({{"type", "Feature"},
                            {"geometry", {{"type", "Point"}, {"coordinates", {e.position.lon(), e.position.lat()}}}},
                            {"properties", props}});
    }
    return {{"type", "FeatureCollection"}, {"features", features}};
}

std::vector<TelemetryEvent> import_geojson(const json& collection)
{
    if (!collection.is_object() || collection.value("type", "") != "FeatureCollection")
        throw DecodeError("type", "not a FeatureCollection");
    if (!collection.contains("features") || !collection["features"].is_array())
        throw DecodeError("features", "missing or not an array");
    std::vector<TelemetryEvent> out;
    for (const auto& f : collection["features"]) {
        if (!f.is_object() || !f.contains("geometry") || !f["geometry"].is_object())
            throw DecodeError("geometry", "missing");
        const auto& g = f["geometry"];
        if (g.value("type", "") != "Point") continue;
        const auto& c = g.value("coordinates", json());
        if (!c.is_array() || c.size() != 2 || !c[0].is_number() || !c[1].is_number())
            throw DecodeError("coordinates", "expected [lon, lat]");
        if (!f.contains("properties") || !f["properties"].is_object()) throw DecodeError("properties", "missing");
        json props = f["properties"];
        props["position"] = {{"lat", c[1]}, {"lon", c[0]}};
        out.push_back(event_from_json(props));
    }
    return out;
}

} // namespace roadsafe::cli
