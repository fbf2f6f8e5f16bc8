#pragma once

#include "roadsafe/domain/types.hpp"

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace roadsafe::transport {

/// Server answer to one event batch.
struct IngestResult {
    std::vector<EventId> accepted;
    std::vector<EventId> duplicates;
    std::vector<std::pair<EventId, std::string>> rejected;
};

enum class SendStatus {
    ok,        ///< batch processed, see result
    transient, ///< network or server failure, retry later
    rejected,  ///< the whole batch was refused; retrying cannot help
};

struct SendOutcome {
    SendStatus status = SendStatus::ok;
    IngestResult result;
    std::string error;
};

/// Where the flusher delivers batches (in-process service or HTTP client).
class Endpoint {
public:
    virtual ~Endpoint() = default;
    virtual SendOutcome post_events(const TripId& trip_id, std::span<const TelemetryEvent> batch) = 0;
};

} // namespace roadsafe::transport
