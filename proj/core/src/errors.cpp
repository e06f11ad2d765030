#include "sap/errors.hpp"

namespace sap {

std::string to_string(const HeadId& id) {
  return "(" + std::to_string(id.layer) + "," + std::to_string(id.head) + ")";
}

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kAttentionFormat: return "attention-format";
    case ErrorCode::kMaskFormat: return "mask-format";
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kDegenerateCorpus: return "degenerate-corpus";
    case ErrorCode::kShapeMismatch: return "shape-mismatch";
    case ErrorCode::kUnknownLabel: return "unknown-label";
    case ErrorCode::kOracleFailure: return "oracle-failure";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

const char* to_string(AttentionErrorKind kind) {
  switch (kind) {
    case AttentionErrorKind::kBadMagic: return "bad-magic";
    case AttentionErrorKind::kTruncated: return "truncated";
    case AttentionErrorKind::kBadHeader: return "bad-header";
    case AttentionErrorKind::kBadShape: return "bad-shape";
    case AttentionErrorKind::kValueRange: return "value-range";
    case AttentionErrorKind::kRowSum: return "row-sum";
    case AttentionErrorKind::kMaskedRowNotZero: return "masked-row-not-zero";
    case AttentionErrorKind::kSpanInvalid: return "span-invalid";
    case AttentionErrorKind::kSpanMismatch: return "span-mismatch";
  }
  return "unknown";
}

ParseError::ParseError(std::size_t line, const std::string& message)
    : Error(ErrorCode::kParse,
            line > 0 ? "line " + std::to_string(line) + ": " + message : message),
      line_(line) {}

AttentionFormatError::AttentionFormatError(AttentionErrorKind kind,
                                           const std::string& message)
    : Error(ErrorCode::kAttentionFormat, message),
      kind_(kind) {}

OracleError::OracleError(std::optional<HeadId> head, const std::string& message)
    : Error(ErrorCode::kOracleFailure,
            head ? "oracle failed on head " + to_string(*head) + ": " + message
                 : "oracle failed: " + message),
      head_(head) {}

}  // namespace sap
