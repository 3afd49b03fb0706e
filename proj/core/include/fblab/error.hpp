// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace fblab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid or inconsistent configuration values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Mismatched dimensions between parameters, features or gradients.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A non-finite value appeared where a finite one was required.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Dataset or checkpoint file could not be read.
class LoadError : public Error {
 public:
  using Error::Error;
};

/// API misuse, e.g. an out-of-range step or an oversized oracle request.
class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace fblab
