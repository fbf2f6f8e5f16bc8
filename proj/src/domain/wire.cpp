#include "roadsafe/domain/wire.hpp"

#include "roadsafe/error.hpp"

namespace roadsafe {

using nlohmann::json;

namespace {

const json& member(const json& j, const char* name)
{
    auto it = j.find(name);
    if (it == j.end()) {
        throw DecodeError(name, "missing required field");
    }
    return *it;
}

double number(const json& j, const char* name)
{
    const json& v = member(j, name);
    if (!v.is_number()) {
        throw DecodeError(name, "expected number");
    }
    return v.get<double>();
}

std::string text(const json& j, const char* name)
{
    const json& v = member(j, name);
    if (!v.is_string()) {
        throw DecodeError(name, "expected string");
    }
    return v.get<std::string>();
}

} // namespace

json event_to_json(const TelemetryEvent& e)
{
    return json{
        {"event_id", e.event_id.to_string()},
        {"trip_id", e.trip_id},
        {"ts", to_iso8601(e.ts)},
        {"position", {{"lat", e.position.lat()}, {"lon", e.position.lon()}}},
        {"gps_accuracy_m", e.gps_accuracy_m},
        {"speed_mps", e.speed_mps},
        {"heading_deg", e.heading_deg},
        {"speed_min_mps", e.speed_min_mps},
        {"speed_avg_mps", e.speed_avg_mps},
        {"speed_max_mps", e.speed_max_mps},
        {"accel_mps2", e.accel_mps2},
        {"roll_dps", e.roll_dps},
        {"pitch_dps", e.pitch_dps},
        {"yaw_dps", e.yaw_dps},
        {"drowsiness_score", e.drowsiness_score},
        {"drowsy", e.drowsy},
    };
}

TelemetryEvent event_from_json(const json& j)
{
    if (!j.is_object()) {
        throw DecodeError("$", "expected object");
    }
    TelemetryEvent e;
    try {
        e.event_id = EventId::parse(text(j, "event_id"));
    } catch (const ValidationError& err) {
        throw DecodeError("event_id", err.what());
    }
    e.trip_id = text(j, "trip_id");
    try {
        e.ts = parse_iso8601(text(j, "ts"));
    } catch (const ValidationError& err) {
        throw DecodeError("ts", err.what());
    }
    const json& pos = member(j, "position");
    if (!pos.is_object()) {
        throw DecodeError("position", "expected object");
    }
    try {
        e.position = GeoPoint{number(pos, "lat"), number(pos, "lon")};
    } catch (const DecodeError& err) {
        throw DecodeError("position." + err.field(), "missing or malformed coordinate");
    } catch (const GeoError& err) {
        throw DecodeError("position", err.what());
    }
    e.gps_accuracy_m = number(j, "gps_accuracy_m");
    e.speed_mps = number(j, "speed_mps");
    e.heading_deg = number(j, "heading_deg");
    e.speed_min_mps = number(j, "speed_min_mps");
    e.speed_avg_mps = number(j, "speed_avg_mps");
    e.speed_max_mps = number(j, "speed_max_mps");
    e.accel_mps2 = number(j, "accel_mps2");
    e.roll_dps = number(j, "roll_dps");
    e.pitch_dps = number(j, "pitch_dps");
    e.yaw_dps = number(j, "yaw_dps");
    e.drowsiness_score = number(j, "drowsiness_score");
    const json& drowsy = member(j, "drowsy");
    if (!drowsy.is_boolean()) {
        throw DecodeError("drowsy", "expected boolean");
    }
    e.drowsy = drowsy.get<bool>();
    return e;
}

std::string encode_event(const TelemetryEvent& e)
{
    return event_to_json(e).dump();
}

TelemetryEvent decode_event(std::string_view text)
{
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) {
        throw DecodeError("$", "malformed JSON text");
    }
    return event_from_json(j);
}

} // namespace roadsafe
