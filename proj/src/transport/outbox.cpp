#include "roadsafe/transport/outbox.hpp"

#include "roadsafe/domain/wire.hpp"
#include "roadsafe/error.hpp"
#include "roadsafe/util/bytes.hpp"

#include <zlib.h>

#include <cerrno>
#include <cstring>
#include <fcntl.h>
#include <fstream>
#include <iostream>
#include <iterator>
#include <unistd.h>

namespace roadsafe::transport {

namespace {

constexpr std::size_t kRecordHeader = 8; // u32 length + u32 crc
constexpr std::uint32_t kMaxRecord = 16u << 20;

std::uint32_t crc_of(std::span<const std::uint8_t> bytes)
{
    return static_cast<std::uint32_t>(::crc32(0L, bytes.data(), static_cast<uInt>(bytes.size())));
}

std::string sys_error(const std::string& what)
{
    return what + ": " + std::strerror(errno);
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        return {};
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::uint8_t> encode_payload(const OutboxEntry& e)
{
    ByteWriter w;
    w.put(static_cast<std::uint8_t>(e.state));
    w.put(e.id);
    w.put(e.attempts);
    w.put(e.next_attempt_ts.ms);
    w.put(static_cast<std::uint32_t>(e.last_error.size()));
    w.put_bytes(e.last_error);
    if (e.state != EntryState::acked) {
        w.put_bytes(encode_event(e.event));
    }
    return w.take();
}

struct DecodedRecord {
    OutboxEntry entry;
    bool has_event = false;
};

std::optional<DecodedRecord> decode_payload(std::span<const std::uint8_t> payload)
{
    ByteReader r(payload);
    DecodedRecord out;
    const auto state = r.get<std::uint8_t>();
    if (state > static_cast<std::uint8_t>(EntryState::poisoned)) {
        return std::nullopt;
    }
    out.entry.state = static_cast<EntryState>(state);
    out.entry.id = r.get<std::uint64_t>();
    out.entry.attempts = r.get<std::uint32_t>();
    out.entry.next_attempt_ts.ms = r.get<std::int64_t>();
    const auto err_len = r.get<std::uint32_t>();
    const auto err = r.get_bytes(err_len);
    if (!r.ok()) {
        return std::nullopt;
    }
    out.entry.last_error.assign(err.begin(), err.end());
    const auto rest = r.rest();
    if (!rest.empty()) {
        try {
            out.entry.event = decode_event({reinterpret_cast<const char*>(rest.data()), rest.size()});
            out.has_event = true;
        } catch (const DecodeError&) {
            return std::nullopt;
        }
    }
    if (out.entry.state != EntryState::acked && !out.has_event) {
        return std::nullopt;
    }
    return out;
}

} // namespace

std::string_view to_string(EntryState s) noexcept
{
    switch (s) {
    case EntryState::pending: return "pending";
    case EntryState::inflight: return "inflight";
    case EntryState::acked: return "acked";
    case EntryState::poisoned: return "poisoned";
    }
    return "?";
}

std::vector<std::uint8_t> record::encode(const OutboxEntry& entry)
{
    const auto payload = encode_payload(entry);
    ByteWriter w;
    w.put(static_cast<std::uint32_t>(payload.size()));
    w.put(crc_of(payload));
    w.put_bytes(payload);
    return w.take();
}

Outbox::Outbox(std::filesystem::path path, SyncMode sync) : path_(std::move(path)), sync_(sync)
{
    if (path_.has_parent_path()) {
        std::filesystem::create_directories(path_.parent_path());
    }
    recover();
}

Outbox::~Outbox()
{
    if (fd_ >= 0) {
        ::close(fd_);
    }
}

void Outbox::recover()
{
    std::error_code ec;
    std::filesystem::remove(path_.string() + ".tmp", ec);

    const auto bytes = read_file(path_);
    bool rewrite = false;
    std::span<const std::uint8_t> rest(bytes);
    if (!bytes.empty()) {
        if (bytes.size() < sizeof(record::kMagic) ||
            std::memcmp(bytes.data(), record::kMagic, sizeof(record::kMagic)) != 0) {
            throw StorageError("outbox log " + path_.string() + " has a bad header");
        }
        rest = rest.subspan(sizeof(record::kMagic));
    } else {
        rewrite = true;
    }

    std::map<EntryId, OutboxEntry> entries;
    std::unordered_set<EntryId> seen;
    std::size_t acked_in_log = 0;
    while (!rest.empty()) {
        if (rest.size() < kRecordHeader) {
            ++recovery_.corrupt;
            rewrite = true;
            break;
        }
        ByteReader header(rest.first(kRecordHeader));
        const auto length = header.get<std::uint32_t>();
        const auto crc = header.get<std::uint32_t>();
        if (length > kMaxRecord || length > rest.size() - kRecordHeader) {
            // Truncated tail: nothing after this point can be framed.
            ++recovery_.corrupt;
            rewrite = true;
            break;
        }
        const auto payload = rest.subspan(kRecordHeader, length);
        rest = rest.subspan(kRecordHeader + length);
        ++recovery_.records;
        std::optional<DecodedRecord> decoded;
        if (crc_of(payload) == crc) {
            decoded = decode_payload(payload);
        }
        if (!decoded) {
            ++recovery_.corrupt;
            rewrite = true;
            continue;
        }
        auto& rec = decoded->entry;
        next_id_ = std::max(next_id_, rec.id + 1);
        seen.insert(rec.id);
        if (rec.state == EntryState::acked) {
            entries.erase(rec.id);
            ++acked_in_log;
            continue;
        }
        entries[rec.id] = std::move(rec);
    }

    for (auto& [id, e] : entries) {
        if (e.state == EntryState::inflight) {
            e.state = EntryState::pending;
            ++recovery_.demoted_inflight;
        }
        live_events_.insert(e.event.event_id);
    }
    recovery_.restored = entries.size();
    live_ = std::move(entries);
    log_entries_ = seen.size();
    log_acked_ = acked_in_log;

    if (recovery_.corrupt > 0) {
        std::cerr << "outbox: skipped " << recovery_.corrupt << " corrupt record(s) in " << path_.string() << "\n";
    }
    if (rewrite) {
        compact_locked();
    } else {
        open_for_append();
    }
}

void Outbox::open_for_append()
{
    if (fd_ >= 0) {
        ::close(fd_);
    }
    fd_ = ::open(path_.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
    if (fd_ < 0) {
        throw StorageError(sys_error("cannot open outbox log " + path_.string()));
    }
}

void Outbox::write_all(int fd, std::span<const std::uint8_t> bytes)
{
    while (!bytes.empty()) {
        const auto n = ::write(fd, bytes.data(), bytes.size());
        if (n < 0) {
            if (errno == EINTR) {
                continue;
            }
            throw StorageError(sys_error("outbox write failed"));
        }
        bytes = bytes.subspan(static_cast<std::size_t>(n));
    }
    if (sync_ == SyncMode::data && ::fdatasync(fd) != 0) {
        throw StorageError(sys_error("outbox sync failed"));
    }
}

void Outbox::append(const OutboxEntry& entry)
{
    write_all(fd_, record::encode(entry));
}

EntryId Outbox::enqueue(const TelemetryEvent& event, Timestamp now)
{
    std::lock_guard lock(mu_);
    OutboxEntry e;
    e.id = next_id_;
    e.event = event;
    e.next_attempt_ts = now;
    e.state = EntryState::pending;
    append(e);
    ++next_id_;
    ++log_entries_;
    live_events_.insert(event.event_id);
    live_.emplace(e.id, std::move(e));
    return next_id_ - 1;
}

std::vector<OutboxEntry> Outbox::due(Timestamp now, std::size_t limit) const
{
    std::lock_guard lock(mu_);
    std::vector<OutboxEntry> out;
    for (const auto& [id, e] : live_) {
        if (out.size() >= limit) {
            break;
        }
        if (e.state == EntryState::pending && e.next_attempt_ts <= now) {
            out.push_back(e);
        }
    }
    return out;
}

OutboxEntry& Outbox::require(EntryId id)
{
    auto it = live_.find(id);
    if (it == live_.end()) {
        throw StorageError("unknown or already acked outbox entry " + std::to_string(id));
    }
    return it->second;
}

void Outbox::mark_inflight(std::span<const EntryId> ids)
{
    std::lock_guard lock(mu_);
    for (auto id : ids) {
        auto& e = require(id);
        if (e.state != EntryState::pending) {
            throw StorageError("entry " + std::to_string(id) + " is not pending");
        }
        OutboxEntry next = e;
        next.state = EntryState::inflight;
        append(next);
        e.state = EntryState::inflight;
    }
}

void Outbox::mark_acked(std::span<const EntryId> ids)
{
    std::lock_guard lock(mu_);
    for (auto id : ids) {
        auto it = live_.find(id);
        if (it == live_.end()) {
            continue; // already acked
        }
        OutboxEntry marker;
        marker.id = id;
        marker.attempts = it->second.attempts;
        marker.state = EntryState::acked;
        append(marker);
        live_events_.erase(it->second.event.event_id);
        live_.erase(it);
        ++log_acked_;
    }
    maybe_compact();
}

void Outbox::mark_failed(EntryId id, Timestamp next_attempt, const std::string& error)
{
    std::lock_guard lock(mu_);
    auto& e = require(id);
    OutboxEntry next = e;
    next.state = EntryState::pending;
    next.attempts = e.attempts + 1;
    next.next_attempt_ts = next_attempt;
    next.last_error = error;
    append(next);
    e = std::move(next);
}

void Outbox::mark_poisoned(EntryId id, const std::string& reason)
{
    std::lock_guard lock(mu_);
    auto& e = require(id);
    OutboxEntry next = e;
    next.state = EntryState::poisoned;
    next.attempts = e.attempts + 1;
    next.last_error = reason;
    append(next);
    e = std::move(next);
}

std::vector<OutboxEntry> Outbox::entries() const
{
    std::lock_guard lock(mu_);
    std::vector<OutboxEntry> out;
    out.reserve(live_.size());
    for (const auto& [id, e] : live_) {
        out.push_back(e);
    }
    return out;
}

std::optional<OutboxEntry> Outbox::find(EntryId id) const
{
    std::lock_guard lock(mu_);
    auto it = live_.find(id);
    if (it == live_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::size_t Outbox::pending_count() const
{
    std::lock_guard lock(mu_);
    std::size_t n = 0;
    for (const auto& [id, e] : live_) {
        n += e.state == EntryState::pending || e.state == EntryState::inflight ? 1 : 0;
    }
    return n;
}

std::size_t Outbox::poisoned_count() const
{
    std::lock_guard lock(mu_);
    std::size_t n = 0;
    for (const auto& [id, e] : live_) {
        n += e.state == EntryState::poisoned ? 1 : 0;
    }
    return n;
}

bool Outbox::holds_event(const EventId& id) const
{
    std::lock_guard lock(mu_);
    return live_events_.contains(id);
}

std::optional<Timestamp> Outbox::next_due() const
{
    std::lock_guard lock(mu_);
    std::optional<Timestamp> best;
    for (const auto& [id, e] : live_) {
        if (e.state == EntryState::pending && (!best || e.next_attempt_ts < *best)) {
            best = e.next_attempt_ts;
        }
    }
    return best;
}

std::uint64_t Outbox::next_send_sequence()
{
    std::lock_guard lock(mu_);
    return send_sequence_++;
}

void Outbox::maybe_compact()
{
    if (log_entries_ > 0 && 2 * log_acked_ > log_entries_) {
        compact_locked();
    }
}

void Outbox::compact()
{
    std::lock_guard lock(mu_);
    compact_locked();
}

void Outbox::compact_locked()
{
    const std::filesystem::path tmp = path_.string() + ".tmp";
    const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
    if (fd < 0) {
        throw StorageError(sys_error("cannot create " + tmp.string()));
    }
    try {
        ByteWriter w;
        w.put_bytes(std::string_view(record::kMagic, sizeof(record::kMagic)));
        for (const auto& [id, e] : live_) {
            w.put_bytes(record::encode(e));
        }
        write_all(fd, w.bytes());
        // the rename below must never expose a partially written file
        if (sync_ == SyncMode::none && ::fdatasync(fd) != 0) {
            throw StorageError(sys_error("outbox sync failed"));
        }
    } catch (...) {
        ::close(fd);
        throw;
    }
    ::close(fd);
    std::filesystem::rename(tmp, path_);
    log_entries_ = live_.size();
    log_acked_ = 0;
    ++compactions_;
    open_for_append();
}

std::unique_ptr<Outbox> recover(const std::filesystem::path& path, SyncMode sync)
{
    return std::make_unique<Outbox>(path, sync);
}

} // namespace roadsafe::transport
