#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fogddos {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration value or inconsistent topology.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Malformed text input. `line` is 1-based (0 when not line-oriented),
/// `offset` is the byte offset inside the line.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line = 0, std::size_t offset = 0)
        : Error(format(what, line, offset)), message_(what), line_(line), offset_(offset) {}

    /// The message without location prefix.
    const std::string& message() const noexcept { return message_; }
    std::size_t line() const noexcept { return line_; }
    std::size_t offset() const noexcept { return offset_; }

private:
    static std::string format(const std::string& what, std::size_t line, std::size_t offset) {
        if (line == 0) return what + " (at byte " + std::to_string(offset) + ")";
        return "line " + std::to_string(line) + ", byte " + std::to_string(offset) + ": " + what;
    }

    std::string message_;
    std::size_t line_;
    std::size_t offset_;
};

/// A caller broke an operation's precondition (e.g. unordered timestamps).
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// A ratio was requested whose denominator is zero.
class UndefinedRatioError : public Error {
public:
    using Error::Error;
};

/// Failure inside one pipeline stage; `stage()` names it.
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& what)
        : Error("[" + stage + "] " + what), stage_(std::move(stage)) {}

    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

}  // namespace fogddos
