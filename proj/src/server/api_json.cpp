#include "roadsafe/server/api_json.hpp"

#include "roadsafe/domain/wire.hpp"
#include "roadsafe/error.hpp"

namespace roadsafe::server {

using nlohmann::json;

namespace {

template <class T>
T field(const json& j, const char* name)
{
    if (!j.is_object() || !j.contains(name)) throw DecodeError(name, "missing");
    try {
        return j.at(name).get<T>();
    } catch (const json::exception& e) {
        throw DecodeError(name, e.what());
    }
}

json point_json(const std::optional<GeoPoint>& p)
{
    if (!p) return nullptr;
    return {{"lat", p->lat()}, {"lon", p->lon()}};
}

} // namespace

json trip_to_json(const TripRecord& r)
{
    const auto& t = r.trip;
    return {
        {"trip_id", t.trip_id},
        {"driver_id", t.driver_id},
        {"vehicle_id", t.vehicle_id},
        {"start_ts", to_iso8601(t.start_ts)},
        {"end_ts", t.end_ts ? json(to_iso8601(*t.end_ts)) : json(nullptr)},
        {"start_position", point_json(r.start_position)},
        {"client_distance_m", t.distance_m},
        {"server_distance_m", r.server_distance_m},
        {"discrepancy_ratio", r.discrepancy_ratio()},
        {"speed_min_mps", t.speed_min_mps},
        {"speed_avg_mps", t.speed_avg_mps},
        {"speed_max_mps", t.speed_max_mps},
        {"event_count", r.event_count},
    };
}

TripRecord trip_from_json(const json& j)
{
    TripRecord r;
    auto& t = r.trip;
    t.trip_id = field<std::string>(j, "trip_id");
    t.driver_id = field<DriverId>(j, "driver_id");
    t.vehicle_id = field<VehicleId>(j, "vehicle_id");
    t.start_ts = parse_iso8601(field<std::string>(j, "start_ts"));
    if (j.contains("end_ts") && !j["end_ts"].is_null()) t.end_ts = parse_iso8601(field<std::string>(j, "end_ts"));
    if (j.contains("start_position") && !j["start_position"].is_null()) {
        const auto& p = j["start_position"];
        r.start_position = GeoPoint(field<double>(p, "lat"), field<double>(p, "lon"));
    }
    t.distance_m = field<double>(j, "client_distance_m");
    r.server_distance_m = field<double>(j, "server_distance_m");
    t.speed_min_mps = field<double>(j, "speed_min_mps");
    t.speed_avg_mps = field<double>(j, "speed_avg_mps");
    t.speed_max_mps = field<double>(j, "speed_max_mps");
    r.event_count = field<std::size_t>(j, "event_count");
    return r;
}

json ingest_to_json(const transport::IngestResult& r)
{
    json accepted = json::array();
    json duplicates = json::array();
    json rejected = json::array();
    for (const auto& id : r.accepted) accepted.push_back(id.to_string());
    for (const auto& id : r.duplicates) duplicates.push_back(id.to_string());
    for (const auto& [id, reason] : r.rejected) rejected.push_back({{"event_id", id.to_string()}, {"reason", reason}});
    return {{"accepted", accepted}, {"duplicates", duplicates}, {"rejected", rejected}};
}

transport::IngestResult ingest_from_json(const json& j)
{
    transport::IngestResult r;
    for (const auto& s : field<std::vector<std::string>>(j, "accepted")) r.accepted.push_back(EventId::parse(s));
    for (const auto& s : field<std::vector<std::string>>(j, "duplicates")) r.duplicates.push_back(EventId::parse(s));
    for (const auto& item : field<json>(j, "rejected"))
        r.rejected.emplace_back(EventId::parse(field<std::string>(item, "event_id")), field<std::string>(item, "reason"));
    return r;
}

json risk_to_json(const SegmentRisk& r)
{
    return {{"segment_id", r.segment_id},
            {"crash_count", r.crash_count},
            {"traversal_count", r.traversal_count},
            {"risk_per_1000", r.risk_per_1000},
            {"insufficient_data", r.insufficient_data}};
}

SegmentRisk risk_from_json(const json& j)
{
    return {field<SegmentId>(j, "segment_id"), field<std::size_t>(j, "crash_count"),
            field<std::size_t>(j, "traversal_count"), field<double>(j, "risk_per_1000"),
            field<bool>(j, "insufficient_data")};
}

json page_to_json(const EventPage& p)
{
    json events = json::array();
    for (const auto& e : p.events) events.push_back(event_to_json(e));
    return {{"events", events}, {"next_cursor", p.next ? json(p.next->encode()) : json(nullptr)}};
}

EventPage page_from_json(const json& j)
{
    EventPage p;
    for (const auto& e : field<json>(j, "events")) p.events.push_back(event_from_json(e));
    if (j.contains("next_cursor") && !j["next_cursor"].is_null())
        p.next = EventCursor::decode(field<std::string>(j, "next_cursor"));
    return p;
}

} // namespace roadsafe::server
