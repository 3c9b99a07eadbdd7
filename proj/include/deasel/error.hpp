#pragma once

#include <stdexcept>
#include <string>

namespace deasel {

enum class ErrorKind {
  Schema,     // malformed file header / missing column
  Shape,      // ragged or inconsistent data dimensions
  Data,       // bad value in an otherwise well-formed file
  Conflict,   // duplicate key
  Join,       // unmatched key between datasets
  Config,     // bad configuration value
  Parameter,  // bad operation parameter
  Usage,      // caller misuse (wrong inputs to an API or command)
  Model,      // a DEA model could not be scored
  Solver,     // LP engine failure
  Split,      // impossible cross-validation split
  Training,   // classifier training failure
  Internal,   // invariant violation; a bug
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

  /// Process exit status this error maps to: input/usage problems get 2,
  /// computation failures get 1.
  int exit_code() const {
    switch (kind_) {
      case ErrorKind::Schema:
      case ErrorKind::Shape:
      case ErrorKind::Data:
      case ErrorKind::Conflict:
      case ErrorKind::Join:
      case ErrorKind::Config:
      case ErrorKind::Parameter:
      case ErrorKind::Usage:
        return 2;
      default:
        return 1;
    }
  }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace deasel
