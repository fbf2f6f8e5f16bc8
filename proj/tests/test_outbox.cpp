#include "roadsafe/error.hpp"
#include "roadsafe/transport/outbox.hpp"

#include "support.hpp"

#include <catch_amalgamated.hpp>

#include <fstream>
#include <iterator>

using namespace roadsafe;
using namespace roadsafe::transport;

namespace {

std::vector<std::uint8_t> slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

void spit(const std::filesystem::path& p, const std::vector<std::uint8_t>& bytes)
{
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

} // namespace

TEST_CASE("entries survive reopening unchanged")
{
    testing::TempDir dir;
    Rng rng(1);
    std::vector<OutboxEntry> before;
    {
        Outbox box(dir / "o.log");
        for (int i = 0; i < 40; ++i) box.enqueue(testing::random_event(rng, "t", i * 15000), Timestamp{i});
        auto due = box.due(Timestamp{100}, 10);
        REQUIRE(due.size() == 10);
        box.mark_failed(due[0].id, Timestamp{5000}, "lost");
        box.mark_poisoned(due[1].id, "bad event");
        before = box.entries();
    }
    Outbox again(dir / "o.log");
    CHECK(again.entries() == before);
    CHECK(again.recovery_stats().corrupt == 0);
    CHECK(again.poisoned_count() == 1);
    CHECK(again.pending_count() == 39);
}

TEST_CASE("duplicate enqueues get distinct entries with the same event")
{
    testing::TempDir dir;
    Outbox box(dir / "o.log");
    Rng rng(2);
    auto e = testing::random_event(rng);
    auto a = box.enqueue(e, Timestamp{0});
    auto b = box.enqueue(e, Timestamp{0});
    CHECK(a != b);
    CHECK(box.find(a)->event.event_id == box.find(b)->event.event_id);
}

TEST_CASE("due is FIFO and respects next attempt time")
{
    testing::TempDir dir;
    Outbox box(dir / "o.log");
    Rng rng(3);
    std::vector<EntryId> ids;
    for (int i = 0; i < 5; ++i) ids.push_back(box.enqueue(testing::random_event(rng), Timestamp{0}));
    box.mark_failed(ids[0], Timestamp{1000}, "x");
    auto due = box.due(Timestamp{10});
    REQUIRE(due.size() == 4);
    CHECK(due.front().id == ids[1]);
    CHECK(box.next_due() == Timestamp{0});
    CHECK(box.due(Timestamp{1000}).front().id == ids[0]);
    CHECK(box.find(ids[0])->attempts == 1);
}

TEST_CASE("inflight entries are demoted to pending on recovery")
{
    testing::TempDir dir;
    Rng rng(4);
    {
        Outbox box(dir / "o.log");
        std::vector<EntryId> ids;
        for (int i = 0; i < 3; ++i) ids.push_back(box.enqueue(testing::random_event(rng), Timestamp{0}));
        box.mark_inflight(ids);
    }
    Outbox again(dir / "o.log");
    CHECK(again.recovery_stats().demoted_inflight == 3);
    CHECK(again.due(Timestamp{0}).size() == 3);
}

TEST_CASE("acked entries leave and compaction shrinks the log")
{
    testing::TempDir dir;
    Rng rng(5);
    Outbox box(dir / "o.log");
    std::vector<EntryId> ids;
    for (int i = 0; i < 100; ++i) ids.push_back(box.enqueue(testing::random_event(rng), Timestamp{0}));
    auto big = std::filesystem::file_size(dir / "o.log");
    box.mark_acked(std::span(ids).first(90));
    CHECK(box.compactions() >= 1);
    CHECK(std::filesystem::file_size(dir / "o.log") < big);
    CHECK(box.pending_count() == 10);
    Outbox again(dir / "o.log");
    CHECK(again.entries() == box.entries());
    CHECK(again.holds_event(box.find(ids[95])->event.event_id));
}

TEST_CASE("a corrupted last record is the only one lost")
{
    testing::TempDir dir;
    Rng rng(6);
    std::vector<OutboxEntry> all;
    {
        Outbox box(dir / "o.log");
        for (int i = 0; i < 20; ++i) box.enqueue(testing::random_event(rng), Timestamp{0});
        all = box.entries();
    }
    auto bytes = slurp(dir / "o.log");
    bytes[bytes.size() - 5] ^= 0x5a;
    spit(dir / "o.log", bytes);

    Outbox again(dir / "o.log");
    CHECK(again.recovery_stats().corrupt == 1);
    all.pop_back();
    CHECK(again.entries() == all);

    // The rewritten log is clean.
    auto next = again.entries();
    Outbox third(dir / "o.log");
    CHECK(third.recovery_stats().corrupt == 0);
    CHECK(third.entries() == next);
}

TEST_CASE("a torn tail write is skipped")
{
    testing::TempDir dir;
    Rng rng(7);
    std::vector<OutboxEntry> all;
    {
        Outbox box(dir / "o.log");
        for (int i = 0; i < 8; ++i) box.enqueue(testing::random_event(rng), Timestamp{0});
        all = box.entries();
    }
    auto bytes = slurp(dir / "o.log");
    bytes.resize(bytes.size() - 17);
    spit(dir / "o.log", bytes);
    Outbox again(dir / "o.log");
    all.pop_back();
    CHECK(again.entries() == all);
    CHECK(again.recovery_stats().corrupt == 1);
    // New entries never reuse an id seen in the log.
    auto id = again.enqueue(testing::random_event(rng), Timestamp{0});
    CHECK(id > all.back().id);
}

TEST_CASE("a foreign file is refused")
{
    testing::TempDir dir;
    spit(dir / "o.log", {'n', 'o', 't', 'a', 'l', 'o', 'g', '!', 1, 2, 3});
    CHECK_THROWS_AS(Outbox(dir / "o.log"), StorageError);
}

TEST_CASE("state transitions on unknown entries fail")
{
    testing::TempDir dir;
    Outbox box(dir / "o.log");
    CHECK_THROWS(box.mark_failed(77, Timestamp{0}, "x"));
    CHECK_THROWS(box.mark_poisoned(77, "x"));
}
