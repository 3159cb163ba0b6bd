#pragma once

#include <stdexcept>
#include <string>

namespace stochmatch {

enum class ErrorKind {
  Parse,         // malformed input text
  Invalid,       // well-formed but semantically invalid input or arguments
  CapExceeded,   // an exact enumeration would exceed a configured limit
  Verification,  // an exact or statistical check failed
  Internal,      // broken invariant inside the library
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what) : Error(ErrorKind::Parse, what) {}
};

class InvalidInput : public Error {
 public:
  explicit InvalidInput(const std::string& what) : Error(ErrorKind::Invalid, what) {}
};

/// Names the limit that was hit so front ends can point at the right flag.
class CapExceeded : public Error {
 public:
  CapExceeded(std::string cap, const std::string& what)
      : Error(ErrorKind::CapExceeded, what), cap_(std::move(cap)) {}
  const std::string& cap() const noexcept { return cap_; }

 private:
  std::string cap_;
};

class VerificationFailure : public Error {
 public:
  explicit VerificationFailure(const std::string& what) : Error(ErrorKind::Verification, what) {}
};

class InternalError : public Error {
 public:
  explicit InternalError(const std::string& what) : Error(ErrorKind::Internal, what) {}
};

}  // namespace stochmatch
