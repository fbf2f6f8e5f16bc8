#include "roadsafe/domain/types.hpp"

#include "roadsafe/error.hpp"

namespace roadsafe {

std::string_view to_string(Gender g) noexcept
{
    switch (g) {
    case Gender::female: return "female";
    case Gender::male: return "male";
    case Gender::other: return "other";
    }
    return "other";
}

Gender parse_gender(std::string_view text)
{
    if (text == "female" || text == "F" || text == "f") {
        return Gender::female;
    }
    if (text == "male" || text == "M" || text == "m") {
        return Gender::male;
    }
    if (text == "other") {
        return Gender::other;
    }
    throw ValidationError("unknown gender: " + std::string(text));
}

std::string_view to_string(Severity s) noexcept
{
    switch (s) {
    case Severity::minor: return "minor";
    case Severity::severe: return "severe";
    case Severity::fatal: return "fatal";
    }
    return "minor";
}

Severity parse_severity(std::string_view text)
{
    if (text == "minor") {
        return Severity::minor;
    }
    if (text == "severe") {
        return Severity::severe;
    }
    if (text == "fatal") {
        return Severity::fatal;
    }
    throw ValidationError("unknown severity: " + std::string(text));
}

void check_segment(const RoadSegment& segment)
{
    const auto& line = segment.polyline;
    if (line.size() < 2) {
        throw ValidationError("segment " + std::to_string(segment.segment_id) + " needs at least 2 points");
    }
    for (std::size_t i = 0; i < line.size(); ++i) {
        for (std::size_t j = i + 1; j < line.size(); ++j) {
            if (line[i] == line[j]) {
                throw ValidationError("segment " + std::to_string(segment.segment_id) +
                                      " has repeated polyline points");
            }
        }
    }
}

} // namespace roadsafe
