// Copyright 2026 The Splineformer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace splineformer {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand dimensions do not fit together.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Operation is not available for the scalar backend in use.
class BackendError : public Error {
 public:
  using Error::Error;
};

/// SoftMax column with every entry equal to -inf.
class DegenerateColumnError : public Error {
 public:
  using Error::Error;
};

/// Malformed textual or JSON input.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Caller violated a documented precondition (wrong degree, non-autoregressive
/// declaration, unsupported product, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Construction would exceed a configured size cap.
class ResourceError : public Error {
 public:
  using Error::Error;
};

}  // namespace splineformer
