#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace attackmap {

/// Base for every failure the library reports.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input. `location` is a byte offset (XML, JSON) or a line number
/// (line-delimited files); `where` names the source and, for JSON, a path.
class ParseError : public Error {
public:
    ParseError(std::string where, std::size_t location, const std::string& message)
        : Error(where + " @" + std::to_string(location) + ": " + message),
          where_(std::move(where)),
          location_(location) {}

    const std::string& where() const { return where_; }
    std::size_t location() const { return location_; }

private:
    std::string where_;
    std::size_t location_;
};

class UnsupportedVersionError : public Error {
public:
    using Error::Error;
};

/// A caller-supplied argument violates an operation's precondition.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

}  // namespace attackmap
