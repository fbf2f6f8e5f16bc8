#include "roadsafe/domain/validate.hpp"

#include <cmath>

namespace roadsafe {

namespace {

std::string_view kind_name(ViolationKind k)
{
    switch (k) {
    case ViolationKind::non_finite: return "non-finite";
    case ViolationKind::range: return "range";
    case ViolationKind::ordering: return "ordering";
    case ViolationKind::consistency: return "consistency";
    case ViolationKind::missing: return "missing";
    }
    return "?";
}

} // namespace

std::vector<Violation> validate_event(const TelemetryEvent& e)
{
    std::vector<Violation> out;
    auto add = [&](std::string field, ViolationKind kind, std::string msg) {
        out.push_back({std::move(field), kind, std::move(msg)});
    };

    const std::pair<const char*, double> numeric[] = {
        {"gps_accuracy_m", e.gps_accuracy_m}, {"speed_mps", e.speed_mps},
        {"heading_deg", e.heading_deg},       {"speed_min_mps", e.speed_min_mps},
        {"speed_avg_mps", e.speed_avg_mps},   {"speed_max_mps", e.speed_max_mps},
        {"accel_mps2", e.accel_mps2},         {"roll_dps", e.roll_dps},
        {"pitch_dps", e.pitch_dps},           {"yaw_dps", e.yaw_dps},
        {"drowsiness_score", e.drowsiness_score},
    };
    bool all_finite = true;
    for (const auto& [name, value] : numeric) {
        if (!std::isfinite(value)) {
            add(name, ViolationKind::non_finite, "value is not finite");
            all_finite = false;
        }
    }

    if (e.trip_id.empty()) {
        add("trip_id", ViolationKind::missing, "trip_id is empty");
    }
    if (e.gps_accuracy_m < 0) {
        add("gps_accuracy_m", ViolationKind::range, "must be >= 0");
    }
    for (const auto& [name, value] : {std::pair{"speed_mps", e.speed_mps}, std::pair{"speed_min_mps", e.speed_min_mps},
                                      std::pair{"speed_avg_mps", e.speed_avg_mps},
                                      std::pair{"speed_max_mps", e.speed_max_mps}}) {
        if (value < 0) {
            add(name, ViolationKind::range, "speed must be >= 0");
        }
    }
    if (!(e.heading_deg >= 0.0 && e.heading_deg < 360.0) && std::isfinite(e.heading_deg)) {
        add("heading_deg", ViolationKind::range, "heading must be in [0, 360)");
    }
    if (e.speed_min_mps > e.speed_avg_mps || e.speed_avg_mps > e.speed_max_mps) {
        add("speed_min_mps", ViolationKind::ordering, "requires speed_min <= speed_avg <= speed_max");
    }
    const bool score_in_range = e.drowsiness_score >= 0.0 && e.drowsiness_score <= 1.0;
    if (!score_in_range && std::isfinite(e.drowsiness_score)) {
        add("drowsiness_score", ViolationKind::range, "score must be in [0, 1]");
    }
    if (all_finite && score_in_range && e.drowsy != (e.drowsiness_score >= kDrowsyThreshold)) {
        add("drowsy", ViolationKind::consistency, "drowsy flag disagrees with score threshold");
    }
    return out;
}

std::string describe(const std::vector<Violation>& violations)
{
    std::string text;
    for (const auto& v : violations) {
        if (!text.empty()) {
            text += "; ";
        }
        text += v.field;
        text += ": ";
        text += kind_name(v.kind);
        text += " (";
        text += v.message;
        text += ")";
    }
    return text;
}

} // namespace roadsafe
