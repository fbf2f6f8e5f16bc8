#include "roadsafe/domain/ids.hpp"

#include "roadsafe/error.hpp"
#include "roadsafe/util/rng.hpp"

#include <cstdio>

namespace roadsafe {

std::string EventId::to_string() const
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%08x-%04x-%04x-%04x-%012llx", static_cast<unsigned>(hi >> 32),
                  static_cast<unsigned>((hi >> 16) & 0xffff), static_cast<unsigned>(hi & 0xffff),
                  static_cast<unsigned>(lo >> 48),
                  static_cast<unsigned long long>(lo & 0xffffffffffffULL));
    return buf;
}

EventId EventId::parse(std::string_view text)
{
    if (text.size() != 36 || text[8] != '-' || text[13] != '-' || text[18] != '-' || text[23] != '-') {
        throw ValidationError("malformed event id: " + std::string(text));
    }
    EventId id;
    int nibbles = 0;
    for (char c : text) {
        if (c == '-') {
            continue;
        }
        unsigned v;
        if (c >= '0' && c <= '9') {
            v = static_cast<unsigned>(c - '0');
        } else if (c >= 'a' && c <= 'f') {
            v = static_cast<unsigned>(c - 'a' + 10);
        } else if (c >= 'A' && c <= 'F') {
            v = static_cast<unsigned>(c - 'A' + 10);
        } else {
            throw ValidationError("malformed event id: " + std::string(text));
        }
        auto& word = nibbles < 16 ? id.hi : id.lo;
        word = (word << 4) | v;
        ++nibbles;
    }
    return id;
}

EventId EventId::generate(Rng& rng)
{
    EventId id{rng.next(), rng.next()};
    id.hi = (id.hi & ~0xf000ULL) | 0x4000ULL;
    id.lo = (id.lo & ~(0xc000ULL << 48)) | (0x8000ULL << 48);
    return id;
}

} // namespace roadsafe
