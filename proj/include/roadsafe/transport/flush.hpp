#pragma once

#include "roadsafe/transport/endpoint.hpp"
#include "roadsafe/transport/link.hpp"
#include "roadsafe/transport/outbox.hpp"
#include "roadsafe/transport/retry.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace roadsafe::transport {

inline constexpr std::size_t kDefaultBatchSize = 25;

struct DeliveryReport {
    std::size_t batches_sent = 0;
    std::size_t acked = 0;
    std::size_t accepted = 0;
    std::size_t duplicates = 0;
    std::size_t failed_attempts = 0; ///< entries rescheduled
    std::size_t requests_lost = 0;
    std::size_t responses_lost = 0;
    std::size_t transient_errors = 0;
    std::vector<std::pair<EventId, std::string>> poisoned;

    DeliveryReport& operator+=(const DeliveryReport& other);
};

/// Sends every due pending entry once, in FIFO batches of at most batch_size
/// (a batch never spans two trips). Acked entries leave the outbox; failed ones
/// are rescheduled with backoff; rejected ones are poisoned and reported.
/// `stream` keys the link's loss decisions for this outbox.
DeliveryReport flush(Outbox& outbox, const LinkSimulator& link, Endpoint& endpoint, const RetryPolicy& policy,
                     std::size_t batch_size, Timestamp now, std::uint64_t stream = 0);

} // namespace roadsafe::transport
