// phest: parametric channel estimation for uplink OFDMA with hopping pilots
// Copyright (C) 2026 the phest authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <stdexcept>
#include <string>

namespace phest {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not match the operation.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// An index points outside its valid range.
class IndexError : public Error {
 public:
  using Error::Error;
};

/// Input violates the mathematical domain of an operation
/// (non-finite entries, wrong structure, out-of-range parameter).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The signal subspace cannot be separated: rank-deficient least-squares
/// block, singular TLS partition, or vanishing eigen-gap. Callers may
/// catch this and fall back to a more robust mode or a smaller order.
class DegenerateSubspaceError : public Error {
 public:
  using Error::Error;
};

/// Input is degenerate for the requested statistic
/// (all-zero spectrum, zero denominator, empty accumulator).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

/// Resource allocation cannot be satisfied (tile capacity exceeded).
class AllocationError : public Error {
 public:
  using Error::Error;
};

/// Invalid experiment or system configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// File I/O failure; the message carries the offending path.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace phest
