#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace lasco {

// Error taxonomy. The CLI maps these onto exit codes, and checkpoint/dataset
// loaders throw distinct kinds so callers can tell corruption from mismatch.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ShapeError : Error {
  using Error::Error;
};

// Bad flag/config-file input (CLI exit code 2).
struct ConfigError : Error {
  using Error::Error;
};

// A required checkpoint or dataset is missing (CLI exit code 3).
struct PrerequisiteError : Error {
  using Error::Error;
};

// NaN/Inf during training, singular factorization, divergence (exit code 4).
struct NumericalError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

// Distinct load-failure kinds for persisted artifacts.
struct CorruptFileError : IoError {
  using IoError::IoError;
};

struct VersionMismatchError : IoError {
  using IoError::IoError;
};

struct MismatchError : IoError {
  using IoError::IoError;
};

#define LASCO_CHECK(cond, msg)                         \
  do {                                                 \
    if (!(cond)) throw ::lasco::Error(msg);            \
  } while (0)

#define LASCO_CHECK_SHAPE(cond, msg)                   \
  do {                                                 \
    if (!(cond)) throw ::lasco::ShapeError(msg);       \
  } while (0)

}  // namespace lasco
