#include "roadsafe/transport/link.hpp"

#include "roadsafe/error.hpp"
#include "roadsafe/util/rng.hpp"

#include <cmath>

namespace roadsafe::transport {

void LinkConfig::check() const
{
    if (!(loss_probability >= 0.0 && loss_probability <= 1.0)) {
        throw ConfigError("loss_probability must be in [0, 1]");
    }
    if (latency_ms < 0) {
        throw ConfigError("latency_ms must be >= 0");
    }
    for (std::size_t i = 0; i < outages.size(); ++i) {
        if (!(outages[i].start < outages[i].end)) {
            throw ConfigError("outage window must have start < end");
        }
        if (i > 0 && outages[i].start < outages[i - 1].end) {
            throw ConfigError("outage windows must be ordered and disjoint");
        }
    }
}

LinkSimulator::LinkSimulator(LinkConfig config) : config_(std::move(config))
{
    config_.check();
}

bool LinkSimulator::in_outage(Timestamp t) const noexcept
{
    for (const auto& w : config_.outages) {
        if (t >= w.start && t < w.end) {
            return true;
        }
    }
    return false;
}

LinkFate LinkSimulator::fate(std::uint64_t stream, std::uint64_t sequence, Timestamp send_time) const noexcept
{
    if (in_outage(send_time)) {
        return LinkFate::request_lost;
    }
    const std::uint64_t h = hash_combine(hash_combine(config_.seed, stream), sequence);
    if (unit_from_bits(h) < config_.loss_probability) {
        return (mix64(h) & 1U) != 0 ? LinkFate::response_lost : LinkFate::request_lost;
    }
    // the response travels back after the server handled the request
    if (in_outage(send_time.plus_ms(2 * config_.latency_ms))) {
        return LinkFate::response_lost;
    }
    return LinkFate::delivered;
}

} // namespace roadsafe::transport
