#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace roadsafe::sim {

/// Recording conditions used to stratify classifier accuracy.
enum class Scenario { glasses, no_glasses, sunglasses, night_glasses, night_no_glasses };

inline constexpr std::array<Scenario, 5> kAllScenarios = {
    Scenario::glasses, Scenario::no_glasses, Scenario::sunglasses, Scenario::night_glasses,
    Scenario::night_no_glasses};

/// Machine name, e.g. "night_glasses".
[[nodiscard]] std::string_view to_string(Scenario s) noexcept;
[[nodiscard]] Scenario parse_scenario(std::string_view text);

[[nodiscard]] constexpr bool is_night(Scenario s) noexcept
{
    return s == Scenario::night_glasses || s == Scenario::night_no_glasses;
}

[[nodiscard]] constexpr bool wears_glasses(Scenario s) noexcept
{
    return s == Scenario::glasses || s == Scenario::night_glasses;
}

inline constexpr int kDefaultFrameSide = 16;
inline constexpr int kAlgorithmFrameSide = 128;

/// Square grayscale image, row-major, pixels in [0, 1].
class Frame {
public:
    explicit Frame(int side);
    /// Throws ValidationError when pixels.size() != side*side or a pixel is outside [0,1].
    Frame(int side, std::vector<double> pixels);

    [[nodiscard]] int side() const noexcept { return side_; }
    [[nodiscard]] std::span<const double> pixels() const noexcept { return pixels_; }
    [[nodiscard]] double at(int row, int col) const noexcept { return pixels_[index(row, col)]; }
    /// Value is clamped to [0, 1].
    void set(int row, int col, double value) noexcept;

    friend bool operator==(const Frame&, const Frame&) = default;

private:
    [[nodiscard]] std::size_t index(int row, int col) const noexcept
    {
        return static_cast<std::size_t>(row) * static_cast<std::size_t>(side_) + static_cast<std::size_t>(col);
    }

    int side_;
    std::vector<double> pixels_;
};

struct Rect {
    int row = 0;
    int col = 0;
    int height = 0;
    int width = 0;

    [[nodiscard]] bool contains(int r, int c) const noexcept
    {
        return r >= row && r < row + height && c >= col && c < col + width;
    }
};

/// Where the stylized face features sit for a given frame side.
struct FaceLayout {
    int side = 0;
    Rect left_eye;
    Rect right_eye;
    Rect mouth;
    double center = 0;
    double radius_x = 0;
    double radius_y = 0;

    [[nodiscard]] static FaceLayout for_side(int side);
    [[nodiscard]] bool in_face(int r, int c) const noexcept;
    [[nodiscard]] bool in_eyes(int r, int c) const noexcept
    {
        return left_eye.contains(r, c) || right_eye.contains(r, c);
    }
};

struct RegionStats {
    double mean = 0;
    double variance = 0;
    std::size_t count = 0;
};

[[nodiscard]] RegionStats eye_region_stats(const Frame& frame);
[[nodiscard]] RegionStats face_region_stats(const Frame& frame);

/// Global brightness factor applied to night scenarios.
inline constexpr double kNightBrightness = 0.4;

/// Sunglasses lenses render the eye region below this pixel variance.
inline constexpr double kOcclusionVarianceThreshold = 1e-3;

/// Stylized face whose eye region encodes eye closure; sunglasses occlude the
/// eyes, night scales brightness by kNightBrightness. Deterministic per seed.
[[nodiscard]] Frame synth_frame(bool drowsy, Scenario scenario, std::uint64_t seed,
                                int side = kDefaultFrameSide);

} // namespace roadsafe::sim
