#pragma once

#include <stdexcept>
#include <string>

namespace fsts {

// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Problems with user-supplied data: unreadable files, parse failures,
// datasets that violate a documented precondition.
class InputError : public Error {
 public:
  explicit InputError(const std::string& msg) : Error(msg) {}
};

// Problems with run configuration: contradictory flags, overlapping
// train/validation dataset names, out-of-range hyperparameters.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// Tensor shape mismatches and other internal contract violations.
class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& msg) : Error(msg) {}
};

// Binary format errors, kept distinct so callers can tell them apart.
class BadMagicError : public InputError {
 public:
  explicit BadMagicError(const std::string& msg) : InputError(msg) {}
};

class BadVersionError : public InputError {
 public:
  explicit BadVersionError(const std::string& msg) : InputError(msg) {}
};

class TruncatedFileError : public InputError {
 public:
  explicit TruncatedFileError(const std::string& msg) : InputError(msg) {}
};

}  // namespace fsts
