#pragma once

#include <span>

namespace roadsafe {

/// Mean Earth radius of the spherical model, meters.
inline constexpr double kEarthRadiusM = 6'371'000.0;

/// WGS84-style latitude/longitude in degrees. Range-checked at construction.
class GeoPoint {
public:
    GeoPoint(double lat, double lon);

    [[nodiscard]] double lat() const noexcept { return lat_; }
    [[nodiscard]] double lon() const noexcept { return lon_; }

    friend bool operator==(const GeoPoint&, const GeoPoint&) = default;

private:
    double lat_;
    double lon_;
};

/// Great-circle distance in meters on a sphere of radius kEarthRadiusM.
[[nodiscard]] double haversine_distance(GeoPoint a, GeoPoint b) noexcept;

/// Forward azimuth from a to b in [0, 360), 0 = true north.
/// Throws GeoError when a == b.
[[nodiscard]] double initial_bearing(GeoPoint a, GeoPoint b);

/// Point reached travelling distance_m from origin along the given bearing.
[[nodiscard]] GeoPoint destination(GeoPoint origin, double bearing_deg, double distance_m);

/// Point at fraction f in [0,1] along the great circle from a to b.
[[nodiscard]] GeoPoint interpolate(GeoPoint a, GeoPoint b, double f);

/// Shortest great-circle distance from p to the arc a-b, meters.
[[nodiscard]] double distance_to_arc(GeoPoint p, GeoPoint a, GeoPoint b) noexcept;

/// Shortest distance from p to any arc of the polyline. A single-point polyline
/// degenerates to point distance. Empty polyline throws GeoError.
[[nodiscard]] double distance_to_polyline(GeoPoint p, std::span<const GeoPoint> polyline);

/// Sum of haversine steps along the polyline.
[[nodiscard]] double path_length(std::span<const GeoPoint> polyline) noexcept;

} // namespace roadsafe
