// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace ldlpose {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or usage. The CLI maps this to exit code 2.
class ConfigError : public Error {
public:
  using Error::Error;
};

/// An angle or index lies outside its admissible range.
class RangeError : public Error {
public:
  using Error::Error;
};

/// Dimension mismatch between containers that must agree.
class ShapeError : public Error {
public:
  using Error::Error;
};

/// Non-finite value where a finite one is required. CLI exit code 1.
class NumericError : public Error {
public:
  using Error::Error;
};

/// File system or parse failure.
class IoError : public Error {
public:
  using Error::Error;
};

} // namespace ldlpose
