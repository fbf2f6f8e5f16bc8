#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace roadsafe {

/// Flat "key = value" configuration. '#' starts a comment; blank lines ignored.
class KvConfig {
public:
    KvConfig() = default;

    [[nodiscard]] static KvConfig parse(std::string_view text);
    /// Throws ConfigError when the file cannot be read.
    [[nodiscard]] static KvConfig load(const std::filesystem::path& path);

    void set(std::string key, std::string value) { values_[std::move(key)] = std::move(value); }
    [[nodiscard]] bool contains(const std::string& key) const { return values_.contains(key); }
    [[nodiscard]] std::optional<std::string> get(const std::string& key) const;

    [[nodiscard]] std::string get_string(const std::string& key, std::string fallback) const;
    [[nodiscard]] double get_double(const std::string& key, double fallback) const;
    [[nodiscard]] std::int64_t get_int(const std::string& key, std::int64_t fallback) const;

    /// Overlay values from environment variables PREFIX_KEY (key upper-cased, '.' -> '_').
    void overlay_env(std::string_view prefix, std::initializer_list<std::string_view> keys);

    [[nodiscard]] const std::map<std::string, std::string>& values() const noexcept { return values_; }

private:
    std::map<std::string, std::string> values_;
};

} // namespace roadsafe
