#pragma once

#include <stdexcept>
#include <string>

namespace roadsafe {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid user-supplied configuration (profile, route, link, CLI).
class ConfigError : public Error {
public:
    using Error::Error;
};

class GeoError : public Error {
public:
    using Error::Error;
};

/// Wire payload could not be decoded; field() names the offending field.
class DecodeError : public Error {
public:
    DecodeError(std::string field, const std::string& what)
        : Error("decode error at '" + field + "': " + what), field_(std::move(field))
    {
    }

    [[nodiscard]] const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class StorageError : public Error {
public:
    using Error::Error;
};

class AuthError : public Error {
public:
    AuthError() : Error("authentication failed") {}
    explicit AuthError(const std::string& what) : Error(what) {}
};

class NotFoundError : public Error {
public:
    using Error::Error;
};

/// Request conflicts with current state (ending a closed trip, duplicate key).
class ConflictError : public Error {
public:
    using Error::Error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

} // namespace roadsafe
