#include "roadsafe/simagent/simulate.hpp"

#include "roadsafe/error.hpp"
#include "roadsafe/util/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace roadsafe::sim {

namespace {

/// Per-second probability equivalent to a per-minute probability.
double per_second(double per_minute)
{
    if (per_minute >= 1.0) {
        return 1.0;
    }
    return 1.0 - std::pow(1.0 - per_minute, 1.0 / 60.0);
}

double wrap180(double deg)
{
    deg = std::fmod(deg + 180.0, 360.0);
    if (deg < 0) {
        deg += 360.0;
    }
    return deg - 180.0;
}

/// Arc-length parameterized walk along a polyline, reflecting at both ends.
class RouteWalker {
public:
    explicit RouteWalker(std::span<const GeoPoint> route) : route_(route.begin(), route.end())
    {
        cumulative_.push_back(0.0);
        for (std::size_t i = 1; i < route_.size(); ++i) {
            cumulative_.push_back(cumulative_.back() + haversine_distance(route_[i - 1], route_[i]));
        }
    }

    [[nodiscard]] double total() const noexcept { return cumulative_.back(); }

    void advance(double d)
    {
        const double len = total();
        if (len <= 0.0) {
            return;
        }
        s_ += direction_ * d;
        while (s_ > len || s_ < 0.0) {
            if (s_ > len) {
                s_ = 2 * len - s_;
                direction_ = -1;
            } else {
                s_ = -s_;
                direction_ = 1;
            }
        }
    }

    [[nodiscard]] GeoPoint position() const
    {
        if (total() <= 0.0) {
            return route_.front();
        }
        const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s_);
        std::size_t k = static_cast<std::size_t>(std::distance(cumulative_.begin(), it));
        k = std::clamp<std::size_t>(k, 1, route_.size() - 1);
        const double seg = cumulative_[k] - cumulative_[k - 1];
        if (seg <= 0.0) {
            return route_[k];
        }
        return interpolate(route_[k - 1], route_[k], (s_ - cumulative_[k - 1]) / seg);
    }

private:
    std::vector<GeoPoint> route_;
    std::vector<double> cumulative_;
    double s_ = 0.0;
    int direction_ = 1;
};

void check_probability(double p, const char* name)
{
    if (!(p >= 0.0 && p <= 1.0)) {
        throw ConfigError(std::string(name) + " must be in [0, 1]");
    }
}

} // namespace

void DrivingProfile::check() const
{
    if (!(cruise_speed_mps > 0.0) || !std::isfinite(cruise_speed_mps)) {
        throw ConfigError("cruise_speed_mps must be > 0");
    }
    if (!(speed_jitter_mps >= 0.0) || !std::isfinite(speed_jitter_mps)) {
        throw ConfigError("speed_jitter_mps must be >= 0");
    }
    check_probability(stop_probability, "stop_probability");
    check_probability(drowsy_onset_probability, "drowsy_onset_probability");
}

DrivingProfile DrivingProfile::from_config(const KvConfig& cfg, const std::string& prefix)
{
    DrivingProfile p;
    p.cruise_speed_mps = cfg.get_double(prefix + "cruise_speed_mps", p.cruise_speed_mps);
    p.speed_jitter_mps = cfg.get_double(prefix + "speed_jitter_mps", p.speed_jitter_mps);
    p.stop_probability = cfg.get_double(prefix + "stop_probability", p.stop_probability);
    p.drowsy_onset_probability = cfg.get_double(prefix + "drowsy_onset_probability", p.drowsy_onset_probability);
    if (auto s = cfg.get(prefix + "scenario")) {
        p.scenario = parse_scenario(*s);
    }
    p.check();
    return p;
}

std::vector<SensorSample> simulate_trip(const DrivingProfile& profile, std::span<const GeoPoint> route,
                                        std::int64_t duration_s, std::uint64_t seed, int frame_side)
{
    if (route.size() < 2) {
        throw ConfigError("route needs at least 2 points");
    }
    if (duration_s < 0) {
        throw ConfigError("duration must be >= 0");
    }
    profile.check();

    Rng rng(mix64(seed));
    RouteWalker walker(route);
    const bool can_move = walker.total() > 0.0;
    const double p_stop = per_second(profile.stop_probability);
    const double p_onset = per_second(profile.drowsy_onset_probability);
    const double p_recover = per_second(kDrowsyRecoveryPerMinute);

    std::vector<SensorSample> samples;
    samples.reserve(static_cast<std::size_t>(duration_s));
    int stop_remaining = 0;
    bool drowsy = false;
    double prev_speed = 0.0;
    double prev_heading = 0.0;
    bool have_heading = false;

    for (std::int64_t i = 0; i < duration_s; ++i) {
        double speed = 0.0;
        if (stop_remaining > 0) {
            --stop_remaining;
        } else if (i > 0 && rng.bernoulli(p_stop)) {
            stop_remaining = static_cast<int>(5 + rng.below(26)) - 1;
        } else {
            speed = profile.cruise_speed_mps;
            if (profile.speed_jitter_mps > 0.0) {
                speed = std::max(0.0, speed + profile.speed_jitter_mps * rng.normal());
            }
        }
        if (!can_move) {
            speed = 0.0;
        }

        const GeoPoint before = walker.position();
        if (i > 0) {
            walker.advance(speed);
        }
        const GeoPoint here = walker.position();

        double yaw = 0.0;
        if (!(here == before)) {
            const double heading = initial_bearing(before, here);
            if (have_heading) {
                yaw = wrap180(heading - prev_heading);
            }
            prev_heading = heading;
            have_heading = true;
        }

        drowsy = drowsy ? !rng.bernoulli(p_recover) : rng.bernoulli(p_onset);

        SensorSample s;
        s.t = static_cast<double>(i);
        s.position = here;
        s.gps_accuracy_m = 3.0 + 4.0 * rng.uniform();
        s.speed_mps = speed;
        s.accel_mps2 = i == 0 ? 0.0 : speed - prev_speed;
        s.yaw_dps = yaw;
        s.roll_dps = 0.02 * speed * yaw + 0.5 * rng.normal();
        s.pitch_dps = 0.5 * s.accel_mps2 + 0.3 * rng.normal();
        s.drowsy_truth = drowsy;
        s.frame = synth_frame(drowsy, profile.scenario, hash_combine(seed, static_cast<std::uint64_t>(i)), frame_side);
        samples.push_back(std::move(s));
        prev_speed = speed;
    }
    return samples;
}

std::vector<GeoPoint> parse_route(std::string_view text)
{
    std::vector<GeoPoint> route;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) {
            line.resize(hash);
        }
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw ConfigError("route line " + std::to_string(line_no) + ": expected lat,lon");
        }
        try {
            std::size_t used_lat = 0, used_lon = 0;
            const std::string lat_text = line.substr(0, comma);
            const std::string lon_text = line.substr(comma + 1);
            const double lat = std::stod(lat_text, &used_lat);
            const double lon = std::stod(lon_text, &used_lon);
            if (lat_text.find_first_not_of(" \t\r", used_lat) != std::string::npos ||
                lon_text.find_first_not_of(" \t\r", used_lon) != std::string::npos) {
                throw ConfigError("trailing characters");
            }
            route.emplace_back(lat, lon);
        } catch (const std::exception& e) {
            throw ConfigError("route line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return route;
}

std::vector<GeoPoint> load_route(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot read route file " + path.string());
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_route(ss.str());
}

std::vector<GeoPoint> straight_route(GeoPoint start, double bearing_deg, double length_m)
{
    return {start, destination(start, bearing_deg, length_m)};
}

} // namespace roadsafe::sim
