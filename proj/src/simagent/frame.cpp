#include "roadsafe/simagent/frame.hpp"

#include "roadsafe/error.hpp"
#include "roadsafe/util/rng.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace roadsafe::sim {

namespace {

// Base intensities before scenario scaling.
constexpr double kBackground = 0.10;
constexpr double kSkin = 0.55;
constexpr double kSclera = 0.88;
constexpr double kPupil = 0.20;
constexpr double kEyelid = 0.28;
constexpr double kLash = 0.12;
constexpr double kGlassesRim = 0.30;
constexpr double kLens = 0.08;
constexpr double kLipLine = 0.30;
constexpr double kMouthOpen = 0.05;

constexpr double kPixelNoise = 0.04;
constexpr double kLensNoise = 0.01;

// Behaviour rates per frame.
constexpr double kDrowsyClosedEyes = 0.85;
constexpr double kDrowsyYawn = 0.60;
constexpr double kAlertBlink = 0.03;
constexpr double kAlertYawn = 0.02;

enum class EyeState { open, half_open, closed };

int scaled(double fraction, int side) { return static_cast<int>(std::lround(fraction * side)); }

} // namespace

std::string_view to_string(Scenario s) noexcept
{
    switch (s) {
    case Scenario::glasses: return "glasses";
    case Scenario::no_glasses: return "no_glasses";
    case Scenario::sunglasses: return "sunglasses";
    case Scenario::night_glasses: return "night_glasses";
    case Scenario::night_no_glasses: return "night_no_glasses";
    }
    return "?";
}

Scenario parse_scenario(std::string_view text)
{
    for (auto s : kAllScenarios) {
        if (to_string(s) == text) {
            return s;
        }
    }
    throw ConfigError("unknown scenario: " + std::string(text));
}

Frame::Frame(int side) : side_(side)
{
    if (side <= 0) {
        throw ValidationError("frame side must be positive");
    }
    pixels_.assign(static_cast<std::size_t>(side) * static_cast<std::size_t>(side), 0.0);
}

Frame::Frame(int side, std::vector<double> pixels) : side_(side), pixels_(std::move(pixels))
{
    if (side <= 0 || pixels_.size() != static_cast<std::size_t>(side) * static_cast<std::size_t>(side)) {
        throw ValidationError("frame must be square with side*side pixels");
    }
    for (double p : pixels_) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw ValidationError("frame pixel outside [0, 1]");
        }
    }
}

void Frame::set(int row, int col, double value) noexcept
{
    pixels_[index(row, col)] = std::clamp(value, 0.0, 1.0);
}

FaceLayout FaceLayout::for_side(int side)
{
    if (side < 8) {
        throw ValidationError("face layout needs side >= 8");
    }
    FaceLayout f;
    f.side = side;
    const int eye_h = std::max(2, scaled(0.14, side));
    const int eye_w = std::max(3, scaled(0.22, side));
    const int eye_row = scaled(0.30, side);
    const int eye_col = scaled(0.20, side);
    f.left_eye = {eye_row, eye_col, eye_h, eye_w};
    f.right_eye = {eye_row, side - eye_col - eye_w, eye_h, eye_w};
    const int mouth_col = scaled(0.35, side);
    f.mouth = {scaled(0.70, side), mouth_col, std::max(2, scaled(0.12, side)), side - 2 * mouth_col};
    f.center = (side - 1) / 2.0;
    f.radius_x = 0.46 * side;
    f.radius_y = 0.50 * side;
    return f;
}

bool FaceLayout::in_face(int r, int c) const noexcept
{
    const double dx = (c - center) / radius_x;
    const double dy = (r - center) / radius_y;
    return dx * dx + dy * dy <= 1.0;
}

namespace {

template <typename Pred>
RegionStats region_stats(const Frame& frame, Pred&& in_region)
{
    RegionStats st;
    double sum = 0, sum_sq = 0;
    for (int r = 0; r < frame.side(); ++r) {
        for (int c = 0; c < frame.side(); ++c) {
            if (in_region(r, c)) {
                const double v = frame.at(r, c);
                sum += v;
                sum_sq += v * v;
                ++st.count;
            }
        }
    }
    if (st.count > 0) {
        st.mean = sum / static_cast<double>(st.count);
        st.variance = std::max(0.0, sum_sq / static_cast<double>(st.count) - st.mean * st.mean);
    }
    return st;
}

} // namespace

RegionStats eye_region_stats(const Frame& frame)
{
    const auto layout = FaceLayout::for_side(frame.side());
    return region_stats(frame, [&](int r, int c) { return layout.in_eyes(r, c); });
}

RegionStats face_region_stats(const Frame& frame)
{
    const auto layout = FaceLayout::for_side(frame.side());
    return region_stats(frame, [&](int r, int c) { return layout.in_face(r, c); });
}

Frame synth_frame(bool drowsy, Scenario scenario, std::uint64_t seed, int side)
{
    const auto layout = FaceLayout::for_side(side);
    Rng rng(hash_combine(hash_combine(seed, drowsy ? 1 : 0), static_cast<std::uint64_t>(scenario) + 17));

    EyeState eyes = EyeState::open;
    bool yawning = false;
    if (drowsy) {
        eyes = rng.bernoulli(kDrowsyClosedEyes) ? EyeState::closed : EyeState::half_open;
        yawning = rng.bernoulli(kDrowsyYawn);
    } else {
        eyes = rng.bernoulli(kAlertBlink) ? EyeState::closed : EyeState::open;
        yawning = rng.bernoulli(kAlertYawn);
    }
    const double gain = rng.uniform(0.85, 1.15) * (is_night(scenario) ? kNightBrightness : 1.0);
    const bool sunglasses = scenario == Scenario::sunglasses;

    auto eye_pixel = [&](const Rect& eye, int r, int c) {
        const int local_r = r - eye.row;
        const int pupil_col = eye.col + eye.width / 2;
        switch (eyes) {
        case EyeState::open: return c == pupil_col ? kPupil : kSclera;
        case EyeState::half_open:
            if (local_r < eye.height / 2) {
                return kEyelid;
            }
            return c == pupil_col ? kPupil : kSclera;
        case EyeState::closed: return local_r == eye.height - 1 ? kLash : kEyelid;
        }
        return kSkin;
    };
    auto near_eye = [&](int r, int c) {
        for (const Rect& eye : {layout.left_eye, layout.right_eye}) {
            if (r >= eye.row - 1 && r <= eye.row + eye.height && c >= eye.col - 1 && c <= eye.col + eye.width) {
                return true;
            }
        }
        return false;
    };

    Frame frame(side);
    for (int r = 0; r < side; ++r) {
        for (int c = 0; c < side; ++c) {
            double v = kBackground;
            double noise = kPixelNoise;
            if (layout.in_face(r, c)) {
                v = kSkin;
                if (sunglasses && near_eye(r, c)) {
                    v = kLens;
                    noise = kLensNoise;
                } else if (layout.left_eye.contains(r, c)) {
                    v = eye_pixel(layout.left_eye, r, c);
                } else if (layout.right_eye.contains(r, c)) {
                    v = eye_pixel(layout.right_eye, r, c);
                } else if (wears_glasses(scenario) && near_eye(r, c)) {
                    v = kGlassesRim;
                } else if (layout.mouth.contains(r, c)) {
                    const bool lip_row = r == layout.mouth.row + layout.mouth.height / 2;
                    v = yawning ? kMouthOpen : (lip_row ? kLipLine : kSkin);
                }
            }
            frame.set(r, c, v * gain + noise * gain * rng.normal());
        }
    }
    return frame;
}

} // namespace roadsafe::sim
