// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 DataScout Contributors

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace datascout {

enum class ErrorCode {
  kInvalidArgument,
  kPrecondition,
  kAuthFailure,
  kTransportFailure,
  kMalformedResponse,
  kChecksumMismatch,
  kGovernanceViolation,
  kFileMissing,
  kParseError,
  kExtractionFailure,
  kDatasetNotFound,
  kUnsupportedPayload,
  kUnsupportedFormat,
  kInsufficientData,
  kNoNumericColumns,
  kTooFewRows,
  kTargetMissing,
  kOverBudget,
  kGatewayFailure,
  kInvalidInput,
  kUnknownHash,
  kEmptyIndex,
  kZeroVector,
  kDimMismatch,
  kIoFailure,
  kVersionMismatch,
  kWrongLength,
  kEmptyInput,
  kTooFewEntries,
  kAllEmptyDescriptions,
  kRetriesExhausted,
  kNoCodeBlock,
  kMissingProfile,
  kSandboxFailure,
  kPortInUse,
  kMissingIndex,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kPrecondition: return "precondition-violation";
    case ErrorCode::kAuthFailure: return "auth-failure";
    case ErrorCode::kTransportFailure: return "transport-failure";
    case ErrorCode::kMalformedResponse: return "malformed-response";
    case ErrorCode::kChecksumMismatch: return "checksum-mismatch";
    case ErrorCode::kGovernanceViolation: return "governance-violation";
    case ErrorCode::kFileMissing: return "file-missing";
    case ErrorCode::kParseError: return "parse-error";
    case ErrorCode::kExtractionFailure: return "extraction-failure";
    case ErrorCode::kDatasetNotFound: return "dataset-not-found";
    case ErrorCode::kUnsupportedPayload: return "unsupported-payload";
    case ErrorCode::kUnsupportedFormat: return "unsupported-format";
    case ErrorCode::kInsufficientData: return "insufficient-data";
    case ErrorCode::kNoNumericColumns: return "no-numeric-columns";
    case ErrorCode::kTooFewRows: return "too-few-rows";
    case ErrorCode::kTargetMissing: return "target-missing";
    case ErrorCode::kOverBudget: return "over-budget";
    case ErrorCode::kGatewayFailure: return "gateway-failure";
    case ErrorCode::kInvalidInput: return "invalid-input";
    case ErrorCode::kUnknownHash: return "unknown-hash";
    case ErrorCode::kEmptyIndex: return "empty-index";
    case ErrorCode::kZeroVector: return "zero-vector";
    case ErrorCode::kDimMismatch: return "dim-mismatch";
    case ErrorCode::kIoFailure: return "io-failure";
    case ErrorCode::kVersionMismatch: return "version-mismatch";
    case ErrorCode::kWrongLength: return "wrong-length";
    case ErrorCode::kEmptyInput: return "empty-input";
    case ErrorCode::kTooFewEntries: return "too-few-entries";
    case ErrorCode::kAllEmptyDescriptions: return "all-empty-descriptions";
    case ErrorCode::kRetriesExhausted: return "retries-exhausted";
    case ErrorCode::kNoCodeBlock: return "no-code-block-in-reply";
    case ErrorCode::kMissingProfile: return "missing-profile";
    case ErrorCode::kSandboxFailure: return "sandbox-failure";
    case ErrorCode::kPortInUse: return "port-in-use";
    case ErrorCode::kMissingIndex: return "missing-index";
  }
  return "unknown";
}

/// Every failure raised by the library carries a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  /// Transport failures are the only class worth retrying.
  bool retryable() const noexcept { return code_ == ErrorCode::kTransportFailure; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) fail(code, message);
}

}  // namespace datascout
