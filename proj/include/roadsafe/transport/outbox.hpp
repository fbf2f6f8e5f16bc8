#pragma once

#include "roadsafe/domain/types.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

namespace roadsafe::transport {

enum class EntryState : std::uint8_t { pending = 0, inflight = 1, acked = 2, poisoned = 3 };

[[nodiscard]] std::string_view to_string(EntryState s) noexcept;

using EntryId = std::uint64_t;

struct OutboxEntry {
    EntryId id = 0;
    TelemetryEvent event;
    std::uint32_t attempts = 0;
    Timestamp next_attempt_ts;
    EntryState state = EntryState::pending;
    std::string last_error;

    friend bool operator==(const OutboxEntry&, const OutboxEntry&) = default;
};

struct RecoveryStats {
    std::size_t records = 0;
    std::size_t corrupt = 0;
    std::size_t restored = 0;
    std::size_t demoted_inflight = 0;
};

enum class SyncMode { none, data };

/// Durable device-side store of events awaiting delivery.
///
/// Backed by an append-only log of length-prefixed, CRC32-checked records.
/// Every state change appends a record; the newest record per entry wins on
/// recovery. Acked entries are written as bare ack markers and dropped from
/// memory; the log is rewritten once more than half of its entries are acked.
///
/// Thread-safe: one producer and one flusher may share an instance.
class Outbox {
public:
    /// Opens (or creates) the log at `path` and restores every non-acked entry.
    /// Inflight entries are demoted to pending. Corrupt records are skipped and
    /// counted in recovery_stats().
    explicit Outbox(std::filesystem::path path, SyncMode sync = SyncMode::none);
    ~Outbox();

    Outbox(const Outbox&) = delete;
    Outbox& operator=(const Outbox&) = delete;

    /// Appends a pending entry; the event is on disk when this returns.
    EntryId enqueue(const TelemetryEvent& event, Timestamp now);

    /// Pending entries with next_attempt_ts <= now, FIFO by entry id.
    [[nodiscard]] std::vector<OutboxEntry> due(Timestamp now, std::size_t limit = SIZE_MAX) const;

    void mark_inflight(std::span<const EntryId> ids);
    void mark_acked(std::span<const EntryId> ids);
    /// Back to pending with attempts+1 and a new due time.
    void mark_failed(EntryId id, Timestamp next_attempt, const std::string& error);
    void mark_poisoned(EntryId id, const std::string& reason);

    /// Non-acked entries in FIFO order.
    [[nodiscard]] std::vector<OutboxEntry> entries() const;
    [[nodiscard]] std::optional<OutboxEntry> find(EntryId id) const;
    [[nodiscard]] std::size_t pending_count() const;
    [[nodiscard]] std::size_t poisoned_count() const;
    [[nodiscard]] bool empty_of_pending() const { return pending_count() == 0; }
    /// True when an entry for this event id is pending, inflight or poisoned.
    [[nodiscard]] bool holds_event(const EventId& id) const;
    /// Earliest next_attempt_ts over pending entries.
    [[nodiscard]] std::optional<Timestamp> next_due() const;

    [[nodiscard]] const RecoveryStats& recovery_stats() const noexcept { return recovery_; }
    [[nodiscard]] const std::filesystem::path& path() const noexcept { return path_; }
    [[nodiscard]] std::uint64_t compactions() const noexcept { return compactions_; }

    /// Rewrites the log with only live entries.
    void compact();

    /// Monotonic counter used by the link simulator to key its decisions.
    [[nodiscard]] std::uint64_t next_send_sequence();

private:
    void recover();
    void append(const OutboxEntry& entry);
    void write_all(int fd, std::span<const std::uint8_t> bytes);
    void open_for_append();
    void maybe_compact();
    void compact_locked();
    [[nodiscard]] OutboxEntry& require(EntryId id);

    std::filesystem::path path_;
    SyncMode sync_;
    int fd_ = -1;
    mutable std::mutex mu_;
    std::map<EntryId, OutboxEntry> live_;
    std::unordered_set<EventId> live_events_;
    EntryId next_id_ = 1;
    std::size_t log_entries_ = 0; ///< distinct entries represented in the current log
    std::size_t log_acked_ = 0;
    std::uint64_t send_sequence_ = 0;
    std::uint64_t compactions_ = 0;
    RecoveryStats recovery_;
};

/// Recovers the outbox at `path` (alias for constructing one).
[[nodiscard]] std::unique_ptr<Outbox> recover(const std::filesystem::path& path, SyncMode sync = SyncMode::none);

/// Serialized record helpers, exposed for corruption tests.
namespace record {
inline constexpr char kMagic[8] = {'R', 'S', 'O', 'B', 'X', 'L', 'G', '1'};
[[nodiscard]] std::vector<std::uint8_t> encode(const OutboxEntry& entry);
} // namespace record

} // namespace roadsafe::transport
