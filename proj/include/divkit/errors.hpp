#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace divkit {

// Base class for every error this library raises on contract violations.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// ---- scoring ----

class EmptyTrace final : public Error {
public:
    EmptyTrace() : Error("trace has no scored steps") {}
};

class AlignmentError final : public Error {
public:
    explicit AlignmentError(const std::string& what) : Error(what) {}
};

class DegenerateCrossEntropy final : public Error {
public:
    explicit DegenerateCrossEntropy(double value)
        : Error("cross-entropy " + std::to_string(value) +
                " is at or below the degeneracy floor") {}
};

class RankUnavailable final : public Error {
public:
    explicit RankUnavailable(std::size_t step_index)
        : Error("rank unknown at step " + std::to_string(step_index)) {}
};

// ---- metrics ----

class DegenerateLabels final : public Error {
public:
    explicit DegenerateLabels(const std::string& what) : Error(what) {}
};

class MixedMethods final : public Error {
public:
    explicit MixedMethods(const std::string& what) : Error(what) {}
};

class EmptyInput final : public Error {
public:
    explicit EmptyInput(const std::string& what) : Error(what) {}
};

// ---- theory ----

class SupportMismatch final : public Error {
public:
    SupportMismatch(std::size_t lhs, std::size_t rhs)
        : Error("categorical supports differ: " + std::to_string(lhs) + " vs " +
                std::to_string(rhs)) {}
};

class AbsoluteContinuityViolation final : public Error {
public:
    explicit AbsoluteContinuityViolation(std::size_t index)
        : Error("p has mass where q is zero at index " + std::to_string(index)) {}
};

// ---- file formats ----

class ParseError final : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class InvariantViolation final : public Error {
public:
    InvariantViolation(const std::string& field, const std::string& message,
                       std::size_t line = 0)
        : Error(line == 0 ? field + ": " + message
                          : "line " + std::to_string(line) + ": " + field + ": " + message),
          line_(line),
          field_(field),
          message_(message) {}
    std::size_t line() const { return line_; }
    const std::string& field() const { return field_; }
    const std::string& message() const { return message_; }

private:
    std::size_t line_;
    std::string field_;
    std::string message_;
};

class SchemaViolation final : public Error {
public:
    SchemaViolation(std::size_t line, const std::string& field, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + field + ": " + what),
          line_(line),
          field_(field) {}
    std::size_t line() const { return line_; }
    const std::string& field() const { return field_; }

private:
    std::size_t line_;
    std::string field_;
};

class DanglingPair final : public Error {
public:
    explicit DanglingPair(const std::string& pair_id, const std::string& what)
        : Error("pair_id " + pair_id + ": " + what), pair_id_(pair_id) {}
    const std::string& pair_id() const { return pair_id_; }

private:
    std::string pair_id_;
};

// ---- backends ----

class TransportError final : public Error {
public:
    explicit TransportError(const std::string& what) : Error(what) {}
};

class ProtocolError final : public Error {
public:
    explicit ProtocolError(const std::string& what) : Error(what) {}
};

class AuthError final : public Error {
public:
    explicit AuthError(const std::string& what) : Error(what) {}
};

class TokenizerMismatch final : public Error {
public:
    explicit TokenizerMismatch(const std::string& what) : Error(what) {}
};

class StorageError final : public Error {
public:
    explicit StorageError(const std::string& what) : Error(what) {}
};

// ---- configuration ----

class ConfigError final : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(what) {}
};

}  // namespace divkit
