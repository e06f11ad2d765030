#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

#include "sap/types.hpp"

namespace sap {

/// Coarse error classes. The CLI maps each class to its own exit code.
enum class ErrorCode {
  kParse,
  kAttentionFormat,
  kMaskFormat,
  kInvalidArgument,
  kDegenerateCorpus,
  kShapeMismatch,
  kUnknownLabel,
  kOracleFailure,
  kIo,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// CoNLL-U syntax or structure error; line is 1-based (0 when not tied to a line).
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message);

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

enum class AttentionErrorKind {
  kBadMagic,
  kTruncated,
  kBadHeader,
  kBadShape,
  kValueRange,
  kRowSum,
  kMaskedRowNotZero,
  kSpanInvalid,
  kSpanMismatch,
};

const char* to_string(AttentionErrorKind kind);

class AttentionFormatError : public Error {
 public:
  AttentionFormatError(AttentionErrorKind kind, const std::string& message);

  AttentionErrorKind kind() const noexcept { return kind_; }

 private:
  AttentionErrorKind kind_;
};

class OracleError : public Error {
 public:
  OracleError(std::optional<HeadId> head, const std::string& message);

  /// The candidate whose evaluation failed; empty for the dense evaluation.
  const std::optional<HeadId>& head() const noexcept { return head_; }

 private:
  std::optional<HeadId> head_;
};

}  // namespace sap
