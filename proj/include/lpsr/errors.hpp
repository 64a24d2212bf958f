#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace lpsr {

/// Bad caller input: wrong dimensions, out-of-range parameters, shape mismatch.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Input has no structure to work with (e.g. a constant image for thresholding).
class DegenerateInput : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A ratio metric whose denominator is zero.
class UndefinedMetric : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Weight store does not match the architecture it is used with.
class WeightSchemaError : public std::runtime_error {
public:
    WeightSchemaError(std::string layer, const std::string& what)
        : std::runtime_error(what), layer_(std::move(layer)) {}
    const std::string& layer() const noexcept { return layer_; }

private:
    std::string layer_;
};

/// Malformed binary container. offset() is the byte position where decoding failed.
class FormatError : public std::runtime_error {
public:
    FormatError(std::uint64_t offset, const std::string& what)
        : std::runtime_error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}
    std::uint64_t offset() const noexcept { return offset_; }

private:
    std::uint64_t offset_;
};

/// Malformed line in a text input (annotations, pattern files).
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// External adapter process failed to spawn, timed out or exited nonzero.
class AdapterFailure : public std::runtime_error {
public:
    AdapterFailure(const std::string& what, std::string captured_stderr, int exit_code)
        : std::runtime_error(what), stderr_(std::move(captured_stderr)), exit_code_(exit_code) {}
    const std::string& captured_stderr() const noexcept { return stderr_; }
    int exit_code() const noexcept { return exit_code_; }

private:
    std::string stderr_;
    int exit_code_;
};

/// File system or codec failure while reading/writing an artifact.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace lpsr
