#include "roadsafe/server/auth.hpp"

#include "roadsafe/error.hpp"

#include <openssl/evp.h>
#include <openssl/rand.h>

#include <vector>

namespace roadsafe::server {

namespace {

constexpr int kPbkdf2Iterations = 10'000;

std::string to_hex(const unsigned char* p, std::size_t n)
{
    static constexpr char digits[] = "0123456789abcdef";
    std::string out(n * 2, '0');
    for (std::size_t i = 0; i < n; ++i) {
        out[2 * i] = digits[p[i] >> 4];
        out[2 * i + 1] = digits[p[i] & 0xf];
    }
    return out;
}

} // namespace

std::string hash_password(const std::string& password, const std::string& salt_hex)
{
    unsigned char out[32];
    if (PKCS5_PBKDF2_HMAC(password.data(), static_cast<int>(password.size()),
                          reinterpret_cast<const unsigned char*>(salt_hex.data()), static_cast<int>(salt_hex.size()),
                          kPbkdf2Iterations, EVP_sha256(), sizeof out, out) != 1)
        throw Error("password hashing failed");
    return to_hex(out, sizeof out);
}

std::string random_hex(std::size_t bytes)
{
    std::vector<unsigned char> buf(bytes);
    if (RAND_bytes(buf.data(), static_cast<int>(buf.size())) != 1) throw Error("random source failed");
    return to_hex(buf.data(), buf.size());
}

bool secure_equal(const std::string& a, const std::string& b) noexcept
{
    if (a.size() != b.size()) return false;
    unsigned char diff = 0;
    for (std::size_t i = 0; i < a.size(); ++i) diff |= static_cast<unsigned char>(a[i] ^ b[i]);
    return diff == 0;
}

} // namespace roadsafe::server
