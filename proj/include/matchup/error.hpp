#pragma once

#include <stdexcept>
#include <string>

namespace matchup {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// corpus-io
class MalformedSyntax : public Error {
public:
  MalformedSyntax(const std::string& what, std::size_t byte_offset)
      : Error("malformed syntax at byte " + std::to_string(byte_offset) + ": " + what),
        offset_(byte_offset) {}
  std::size_t offset() const noexcept { return offset_; }

private:
  std::size_t offset_;
};

class SchemaViolation : public Error {
public:
  SchemaViolation(std::string field, const std::string& rule)
      : Error("schema violation in '" + field + "': " + rule), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

private:
  std::string field_;
};

class EncodingError : public Error {
public:
  using Error::Error;
};

class ManifestNotFound : public Error {
public:
  using Error::Error;
};

class ManifestMalformed : public Error {
public:
  using Error::Error;
};

// converter
class NotConvertible : public Error {
public:
  explicit NotConvertible(std::string reason)
      : Error("not convertible: " + reason), reason_(std::move(reason)) {}
  const std::string& reason() const noexcept { return reason_; }

private:
  std::string reason_;
};

class DegenerateShuffle : public Error {
public:
  using Error::Error;
};

// scorer
class LengthMismatch : public Error {
public:
  using Error::Error;
};

class UnknownLabel : public Error {
public:
  using Error::Error;
};

class UnknownPuzzleId : public Error {
public:
  explicit UnknownPuzzleId(const std::string& id) : Error("unknown puzzle id '" + id + "'") {}
};

// llm harness
class Unparseable : public Error {
public:
  using Error::Error;
};

class AuthMissing : public Error {
public:
  using Error::Error;
};

class NetworkError : public Error {
public:
  using Error::Error;
};

class ProviderError : public Error {
public:
  ProviderError(int status, std::string body)
      : Error("provider returned HTTP " + std::to_string(status)), status_(status),
        body_(std::move(body)) {}
  int status() const noexcept { return status_; }
  const std::string& body() const noexcept { return body_; }

private:
  int status_;
  std::string body_;
};

} // namespace matchup
