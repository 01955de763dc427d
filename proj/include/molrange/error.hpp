//
// molrange - Copyright 2026 The molrange Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace molrange {

enum class ErrorKind {
  kShapeMismatch,
  kNotScalar,
  kWidthMismatch,
  kEmptyMolecule,
  kEmptyCorpus,
  kStatsMismatch,
  kTooLong,
  kUnknownToken,
  kMissingEos,
  kEmptyDataset,
  kSingleClassDataset,
  kEmptyInput,
  kFewerThanTwo,
  kFileNotFound,
  kAllLinesInvalid,
  kMissingCheckpoint,
  kConfigInvalid,
  kInvalidArgument,
  kFormat,
  kNegativeProbability,
  kOutputExists,
};

std::string_view error_kind_name(ErrorKind kind);

class Error: public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string &message)
      : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message),
        kind_(kind) { }

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

inline std::string_view error_kind_name(ErrorKind kind) {
  switch (kind) {
  case ErrorKind::kShapeMismatch:
    return "ShapeMismatch";
  case ErrorKind::kNotScalar:
    return "NotScalar";
  case ErrorKind::kWidthMismatch:
    return "WidthMismatch";
  case ErrorKind::kEmptyMolecule:
    return "EmptyMolecule";
  case ErrorKind::kEmptyCorpus:
    return "EmptyCorpus";
  case ErrorKind::kStatsMismatch:
    return "StatsMismatch";
  case ErrorKind::kTooLong:
    return "TooLong";
  case ErrorKind::kUnknownToken:
    return "UnknownToken";
  case ErrorKind::kMissingEos:
    return "MissingEOS";
  case ErrorKind::kEmptyDataset:
    return "EmptyDataset";
  case ErrorKind::kSingleClassDataset:
    return "SingleClassDataset";
  case ErrorKind::kEmptyInput:
    return "EmptyInput";
  case ErrorKind::kFewerThanTwo:
    return "FewerThanTwo";
  case ErrorKind::kFileNotFound:
    return "FileNotFound";
  case ErrorKind::kAllLinesInvalid:
    return "AllLinesInvalid";
  case ErrorKind::kMissingCheckpoint:
    return "MissingCheckpoint";
  case ErrorKind::kConfigInvalid:
    return "ConfigInvalid";
  case ErrorKind::kInvalidArgument:
    return "InvalidArgument";
  case ErrorKind::kFormat:
    return "FormatError";
  case ErrorKind::kNegativeProbability:
    return "NegativeProbability";
  case ErrorKind::kOutputExists:
    return "OutputExists";
  }
  return "Unknown";
}

}  // namespace molrange
