#pragma once

#include <cstdint>

namespace roadsafe::transport {

/// Capped exponential backoff with optional downward jitter.
struct RetryPolicy {
    std::int64_t base_delay_ms = 500;
    double multiplier = 2.0;
    std::int64_t max_delay_ms = 8000;
    double jitter = 0.0; ///< fraction in [0,1]; the delay is scaled by (1 - jitter*u)

    void check() const;

    /// Delay before attempt number `attempts + 1`, where attempts >= 1 counts
    /// failures so far. `u` in [0,1) drives the jitter. Never exceeds max_delay_ms.
    [[nodiscard]] std::int64_t delay_ms(std::uint32_t attempts, double u = 0.0) const noexcept;
};

} // namespace roadsafe::transport
