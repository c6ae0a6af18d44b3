#pragma once

#include <stdexcept>
#include <string>

namespace suq {

enum class ErrorKind {
  InvalidInput,
  DegenerateData,
  InvalidSimilarity,
  EigenvalueOne,
  Numeric,
  EmptySample,
  InvalidConfig,
  Parse,
  NoSamples,
  Io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Process exit code for an error kind: 2 config, 3 data, 4 numeric.
inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidConfig:
      return 2;
    case ErrorKind::EigenvalueOne:
    case ErrorKind::Numeric:
      return 4;
    default:
      return 3;
  }
}

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::DegenerateData: return "degenerate-data";
    case ErrorKind::InvalidSimilarity: return "invalid-similarity";
    case ErrorKind::EigenvalueOne: return "eigenvalue-one";
    case ErrorKind::Numeric: return "numeric";
    case ErrorKind::EmptySample: return "empty-sample";
    case ErrorKind::InvalidConfig: return "invalid-config";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::NoSamples: return "no-samples";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

}  // namespace suq
