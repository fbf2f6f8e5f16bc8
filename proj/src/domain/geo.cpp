#include "roadsafe/domain/geo.hpp"

#include "roadsafe/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace roadsafe {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kRadToDeg = 180.0 / std::numbers::pi;

double central_angle(GeoPoint a, GeoPoint b) noexcept
{
    const double phi1 = a.lat() * kDegToRad;
    const double phi2 = b.lat() * kDegToRad;
    const double dphi = phi2 - phi1;
    const double dlambda = (b.lon() - a.lon()) * kDegToRad;
    const double s1 = std::sin(dphi / 2);
    const double s2 = std::sin(dlambda / 2);
    const double h = std::clamp(s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2, 0.0, 1.0);
    return 2 * std::asin(std::sqrt(h));
}

double bearing_rad(GeoPoint a, GeoPoint b) noexcept
{
    const double phi1 = a.lat() * kDegToRad;
    const double phi2 = b.lat() * kDegToRad;
    const double dlambda = (b.lon() - a.lon()) * kDegToRad;
    const double y = std::sin(dlambda) * std::cos(phi2);
    const double x = std::cos(phi1) * std::sin(phi2) - std::sin(phi1) * std::cos(phi2) * std::cos(dlambda);
    return std::atan2(y, x);
}

double normalize_lon(double lon) noexcept
{
    lon = std::fmod(lon + 540.0, 360.0) - 180.0;
    return lon == -180.0 ? 180.0 : lon;
}

} // namespace

GeoPoint::GeoPoint(double lat, double lon) : lat_(lat), lon_(lon)
{
    if (!std::isfinite(lat) || !std::isfinite(lon)) {
        throw GeoError("coordinates must be finite");
    }
    if (lat < -90.0 || lat > 90.0) {
        throw GeoError("latitude out of range: " + std::to_string(lat));
    }
    if (lon < -180.0 || lon > 180.0) {
        throw GeoError("longitude out of range: " + std::to_string(lon));
    }
}

double haversine_distance(GeoPoint a, GeoPoint b) noexcept
{
    return kEarthRadiusM * central_angle(a, b);
}

double initial_bearing(GeoPoint a, GeoPoint b)
{
    if (a == b) {
        throw GeoError("bearing undefined between coincident points");
    }
    double deg = bearing_rad(a, b) * kRadToDeg;
    deg = std::fmod(deg + 360.0, 360.0);
    // fmod can return exactly 360 after rounding of tiny negative angles
    return deg >= 360.0 ? 0.0 : deg;
}

GeoPoint destination(GeoPoint origin, double bearing_deg, double distance_m)
{
    const double delta = distance_m / kEarthRadiusM;
    const double theta = bearing_deg * kDegToRad;
    const double phi1 = origin.lat() * kDegToRad;
    const double lambda1 = origin.lon() * kDegToRad;
    const double sin_phi2 =
        std::sin(phi1) * std::cos(delta) + std::cos(phi1) * std::sin(delta) * std::cos(theta);
    const double phi2 = std::asin(std::clamp(sin_phi2, -1.0, 1.0));
    const double lambda2 = lambda1 + std::atan2(std::sin(theta) * std::sin(delta) * std::cos(phi1),
                                                std::cos(delta) - std::sin(phi1) * std::sin(phi2));
    return {std::clamp(phi2 * kRadToDeg, -90.0, 90.0), normalize_lon(lambda2 * kRadToDeg)};
}

GeoPoint interpolate(GeoPoint a, GeoPoint b, double f)
{
    if (f <= 0.0 || a == b) {
        return a;
    }
    if (f >= 1.0) {
        return b;
    }
    const double delta = central_angle(a, b);
    if (delta == 0.0) {
        return a;
    }
    const double phi1 = a.lat() * kDegToRad, lambda1 = a.lon() * kDegToRad;
    const double phi2 = b.lat() * kDegToRad, lambda2 = b.lon() * kDegToRad;
    const double wa = std::sin((1 - f) * delta) / std::sin(delta);
    const double wb = std::sin(f * delta) / std::sin(delta);
    const double x = wa * std::cos(phi1) * std::cos(lambda1) + wb * std::cos(phi2) * std::cos(lambda2);
    const double y = wa * std::cos(phi1) * std::sin(lambda1) + wb * std::cos(phi2) * std::sin(lambda2);
    const double z = wa * std::sin(phi1) + wb * std::sin(phi2);
    const double phi = std::atan2(z, std::hypot(x, y));
    const double lambda = std::atan2(y, x);
    return {std::clamp(phi * kRadToDeg, -90.0, 90.0), normalize_lon(lambda * kRadToDeg)};
}

double distance_to_arc(GeoPoint p, GeoPoint a, GeoPoint b) noexcept
{
    if (a == b || p == a) {
        return haversine_distance(p, a);
    }
    if (p == b) {
        return 0.0;
    }
    const double d13 = central_angle(a, p);
    const double d12 = central_angle(a, b);
    const double dtheta = bearing_rad(a, p) - bearing_rad(a, b);
    const double xt = std::asin(std::clamp(std::sin(d13) * std::sin(dtheta), -1.0, 1.0));
    // Signed angle from a to the foot of the perpendicular, in (-pi, pi].
    const double along = std::atan2(std::sin(d13) * std::cos(dtheta), std::cos(d13));
    if (along <= 0.0 || along >= d12) {
        return std::min(haversine_distance(p, a), haversine_distance(p, b));
    }
    return std::abs(xt) * kEarthRadiusM;
}

double distance_to_polyline(GeoPoint p, std::span<const GeoPoint> polyline)
{
    if (polyline.empty()) {
        throw GeoError("empty polyline");
    }
    if (polyline.size() == 1) {
        return haversine_distance(p, polyline.front());
    }
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < polyline.size(); ++i) {
        best = std::min(best, distance_to_arc(p, polyline[i - 1], polyline[i]));
    }
    return best;
}

double path_length(std::span<const GeoPoint> polyline) noexcept
{
    double total = 0.0;
    for (std::size_t i = 1; i < polyline.size(); ++i) {
        total += haversine_distance(polyline[i - 1], polyline[i]);
    }
    return total;
}

} // namespace roadsafe
