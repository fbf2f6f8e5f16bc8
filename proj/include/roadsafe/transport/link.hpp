#pragma once

#include "roadsafe/domain/time.hpp"

#include <cstdint>
#include <vector>

namespace roadsafe::transport {

/// Half-open outage interval [start, end).
struct OutageWindow {
    Timestamp start;
    Timestamp end;
};

struct LinkConfig {
    double loss_probability = 0.0;
    std::vector<OutageWindow> outages;
    std::int64_t latency_ms = 0;
    std::uint64_t seed = 0;

    /// Throws ConfigError unless the probability is in [0,1], latency >= 0 and
    /// outages are well-ordered, non-empty and disjoint.
    void check() const;
};

enum class LinkFate { delivered, request_lost, response_lost };

/// Deterministic lossy channel. Every decision is a pure function of
/// (seed, stream, sequence, send time), so one simulator can serve many
/// agents concurrently without shared state.
class LinkSimulator {
public:
    explicit LinkSimulator(LinkConfig config);

    [[nodiscard]] const LinkConfig& config() const noexcept { return config_; }
    [[nodiscard]] bool in_outage(Timestamp t) const noexcept;
    [[nodiscard]] LinkFate fate(std::uint64_t stream, std::uint64_t sequence, Timestamp send_time) const noexcept;

private:
    LinkConfig config_;
};

} // namespace roadsafe::transport
