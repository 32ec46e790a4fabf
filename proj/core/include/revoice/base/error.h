// core/include/revoice/base/error.h
#ifndef REVOICE_BASE_ERROR_H_
#define REVOICE_BASE_ERROR_H_

#include <stdexcept>
#include <string>

namespace revoice {

// Error taxonomy mirrors the CLI exit codes: usage -> 1, data -> 2, model -> 3.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad invocation: unknown flags, missing required arguments.
class UsageError : public Error {
 public:
  explicit UsageError(const std::string& msg) : Error(msg) {}
};

// Bad input data: unreadable files, invalid signals, violated preconditions.
class DataError : public Error {
 public:
  explicit DataError(const std::string& msg) : Error(msg) {}
};

// Bad model state: missing/mismatched checkpoints, diverged training.
class ModelError : public Error {
 public:
  explicit ModelError(const std::string& msg) : Error(msg) {}
};

}  // namespace revoice

#endif  // REVOICE_BASE_ERROR_H_
