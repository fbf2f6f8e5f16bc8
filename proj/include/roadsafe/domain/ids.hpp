#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

namespace roadsafe {

class Rng;

/// 128-bit event identifier, generated on the device and used as the server's
/// idempotency key. Text form is the 8-4-4-4-12 lowercase hex layout.
struct EventId {
    std::uint64_t hi = 0;
    std::uint64_t lo = 0;

    [[nodiscard]] std::string to_string() const;
    /// Throws ValidationError on malformed text.
    [[nodiscard]] static EventId parse(std::string_view text);
    /// Random version-4 layout id drawn from rng.
    [[nodiscard]] static EventId generate(Rng& rng);

    friend constexpr auto operator<=>(const EventId&, const EventId&) = default;
};

} // namespace roadsafe

template <>
struct std::hash<roadsafe::EventId> {
    std::size_t operator()(const roadsafe::EventId& id) const noexcept
    {
        return std::hash<std::uint64_t>{}(id.hi ^ (id.lo * 0x9e3779b97f4a7c15ULL));
    }
};
