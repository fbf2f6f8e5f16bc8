#include "roadsafe/util/kv_config.hpp"

#include "roadsafe/error.hpp"

#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace roadsafe {

namespace {

std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
        s.remove_prefix(1);
    }
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
        s.remove_suffix(1);
    }
    return s;
}

} // namespace

KvConfig KvConfig::parse(std::string_view text)
{
    KvConfig cfg;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        }
        const auto key = trim(line.substr(0, eq));
        if (key.empty()) {
            throw ConfigError("line " + std::to_string(line_no) + ": empty key");
        }
        cfg.values_[std::string(key)] = std::string(trim(line.substr(eq + 1)));
    }
    return cfg;
}

KvConfig KvConfig::load(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot read config file " + path.string());
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

std::optional<std::string> KvConfig::get(const std::string& key) const
{
    auto it = values_.find(key);
    if (it == values_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::string KvConfig::get_string(const std::string& key, std::string fallback) const
{
    return get(key).value_or(std::move(fallback));
}

double KvConfig::get_double(const std::string& key, double fallback) const
{
    auto v = get(key);
    if (!v) {
        return fallback;
    }
    char* end = nullptr;
    const double d = std::strtod(v->c_str(), &end);
    if (v->empty() || end != v->c_str() + v->size()) {
        throw ConfigError("key '" + key + "': expected a number, got '" + *v + "'");
    }
    return d;
}

std::int64_t KvConfig::get_int(const std::string& key, std::int64_t fallback) const
{
    auto v = get(key);
    if (!v) {
        return fallback;
    }
    std::int64_t out = 0;
    auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc{} || ptr != v->data() + v->size()) {
        throw ConfigError("key '" + key + "': expected an integer, got '" + *v + "'");
    }
    return out;
}

void KvConfig::overlay_env(std::string_view prefix, std::initializer_list<std::string_view> keys)
{
    for (auto key : keys) {
        std::string name(prefix);
        name += '_';
        for (char c : key) {
            name += c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        }
        if (const char* v = std::getenv(name.c_str())) {
            values_[std::string(key)] = v;
        }
    }
}

} // namespace roadsafe
