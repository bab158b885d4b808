#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace decal {

// Bad argument to a library call (non-finite value, size mismatch, out-of-range parameter).
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Structurally malformed file content (ragged rows, missing header columns).
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A field could not be parsed; carries the 1-based line number.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line)
        : std::runtime_error(what + " (line " + std::to_string(line) + ")"), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// Well-formed data that violates a table invariant (duplicate ids, missing targets).
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Optimization diverged.
class TrainingError : public std::runtime_error {
public:
    TrainingError(const std::string& what, int epoch)
        : std::runtime_error(what + " at epoch " + std::to_string(epoch)), epoch_(epoch) {}

    int epoch() const noexcept { return epoch_; }

private:
    int epoch_;
};

// Experiment configuration rejected by the schema; `path` names the offending field.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string path, const std::string& what)
        : std::runtime_error(path + ": " + what), path_(std::move(path)) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

} // namespace decal
