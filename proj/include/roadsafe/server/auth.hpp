#pragma once

#include "roadsafe/domain/types.hpp"

#include <string>

namespace roadsafe::server {

struct SessionToken {
    std::string token;
    DriverId driver_id = 0;
    Timestamp expiry;
};

/// PBKDF2-HMAC-SHA256, hex encoded.
[[nodiscard]] std::string hash_password(const std::string& password, const std::string& salt_hex);
[[nodiscard]] std::string random_hex(std::size_t bytes);
/// Constant-time comparison of equal-length strings.
[[nodiscard]] bool secure_equal(const std::string& a, const std::string& b) noexcept;

} // namespace roadsafe::server
