#include "roadsafe/transport/flush.hpp"

#include "roadsafe/util/rng.hpp"

#include <unordered_map>

namespace roadsafe::transport {

DeliveryReport& DeliveryReport::operator+=(const DeliveryReport& other)
{
    batches_sent += other.batches_sent;
    acked += other.acked;
    accepted += other.accepted;
    duplicates += other.duplicates;
    failed_attempts += other.failed_attempts;
    requests_lost += other.requests_lost;
    responses_lost += other.responses_lost;
    transient_errors += other.transient_errors;
    poisoned.insert(poisoned.end(), other.poisoned.begin(), other.poisoned.end());
    return *this;
}

namespace {

std::vector<std::vector<OutboxEntry>> make_batches(std::vector<OutboxEntry> due, std::size_t batch_size)
{
    std::vector<std::vector<OutboxEntry>> batches;
    for (auto& e : due) {
        if (batches.empty() || batches.back().size() >= batch_size ||
            batches.back().front().event.trip_id != e.event.trip_id) {
            batches.emplace_back();
        }
        batches.back().push_back(std::move(e));
    }
    return batches;
}

} // namespace

DeliveryReport flush(Outbox& outbox, const LinkSimulator& link, Endpoint& endpoint, const RetryPolicy& policy,
                     std::size_t batch_size, Timestamp now, std::uint64_t stream)
{
    DeliveryReport report;
    if (batch_size == 0) {
        batch_size = kDefaultBatchSize;
    }
    const std::uint64_t jitter_key = hash_combine(link.config().seed, stream);

    auto reschedule = [&](const OutboxEntry& e, const std::string& why) {
        const std::uint32_t attempts = e.attempts + 1;
        const double u = unit_from_bits(hash_combine(hash_combine(jitter_key, e.id), attempts));
        outbox.mark_failed(e.id, now.plus_ms(policy.delay_ms(attempts, u)), why);
        ++report.failed_attempts;
    };

    for (const auto& batch : make_batches(outbox.due(now), batch_size)) {
        std::vector<EntryId> ids;
        std::vector<TelemetryEvent> events;
        ids.reserve(batch.size());
        events.reserve(batch.size());
        for (const auto& e : batch) {
            ids.push_back(e.id);
            events.push_back(e.event);
        }
        outbox.mark_inflight(ids);
        ++report.batches_sent;

        const LinkFate fate = link.fate(stream, outbox.next_send_sequence(), now);
        if (fate == LinkFate::request_lost) {
            ++report.requests_lost;
            for (const auto& e : batch) {
                reschedule(e, "request lost");
            }
            continue;
        }

        SendOutcome outcome;
        try {
            outcome = endpoint.post_events(batch.front().event.trip_id, events);
        } catch (const std::exception& err) {
            outcome.status = SendStatus::transient;
            outcome.error = err.what();
        }

        if (fate == LinkFate::response_lost) {
            ++report.responses_lost;
            for (const auto& e : batch) {
                reschedule(e, "response lost");
            }
            continue;
        }

        switch (outcome.status) {
        case SendStatus::transient:
            ++report.transient_errors;
            for (const auto& e : batch) {
                reschedule(e, outcome.error.empty() ? "transient error" : outcome.error);
            }
            break;
        case SendStatus::rejected:
            for (const auto& e : batch) {
                outbox.mark_poisoned(e.id, outcome.error);
                report.poisoned.emplace_back(e.event.event_id, outcome.error);
            }
            break;
        case SendStatus::ok: {
            enum class Verdict { accepted, duplicate, rejected };
            std::unordered_map<EventId, std::pair<Verdict, std::string>> verdicts;
            for (const auto& id : outcome.result.accepted) {
                verdicts[id] = {Verdict::accepted, {}};
            }
            for (const auto& id : outcome.result.duplicates) {
                verdicts[id] = {Verdict::duplicate, {}};
            }
            for (const auto& [id, reason] : outcome.result.rejected) {
                verdicts[id] = {Verdict::rejected, reason};
            }
            std::vector<EntryId> acked;
            for (const auto& e : batch) {
                auto it = verdicts.find(e.event.event_id);
                if (it == verdicts.end()) {
                    reschedule(e, "event missing from server response");
                    continue;
                }
                switch (it->second.first) {
                case Verdict::accepted:
                    ++report.accepted;
                    acked.push_back(e.id);
                    break;
                case Verdict::duplicate:
                    ++report.duplicates;
                    acked.push_back(e.id);
                    break;
                case Verdict::rejected:
                    outbox.mark_poisoned(e.id, it->second.second);
                    report.poisoned.emplace_back(e.event.event_id, it->second.second);
                    break;
                }
            }
            outbox.mark_acked(acked);
            report.acked += acked.size();
            break;
        }
        }
    }
    return report;
}

} // namespace roadsafe::transport
