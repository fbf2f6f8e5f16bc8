#include "roadsafe/transport/retry.hpp"

#include "roadsafe/error.hpp"

#include <algorithm>
#include <cmath>

namespace roadsafe::transport {

void RetryPolicy::check() const
{
    if (base_delay_ms <= 0) {
        throw ConfigError("base_delay_ms must be > 0");
    }
    if (!(multiplier >= 1.0)) {
        throw ConfigError("multiplier must be >= 1");
    }
    if (max_delay_ms < base_delay_ms) {
        throw ConfigError("max_delay_ms must be >= base_delay_ms");
    }
    if (!(jitter >= 0.0 && jitter <= 1.0)) {
        throw ConfigError("jitter must be in [0, 1]");
    }
}

std::int64_t RetryPolicy::delay_ms(std::uint32_t attempts, double u) const noexcept
{
    const double exponent = attempts == 0 ? 0.0 : static_cast<double>(attempts - 1);
    double delay = static_cast<double>(base_delay_ms) * std::pow(multiplier, exponent);
    delay = std::min(delay, static_cast<double>(max_delay_ms));
    delay *= 1.0 - jitter * std::clamp(u, 0.0, 1.0);
    return std::clamp<std::int64_t>(std::llround(delay), 0, max_delay_ms);
}

} // namespace roadsafe::transport
