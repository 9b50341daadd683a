// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace qloc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A quadrature or normalization check failed its tolerance.
class ToleranceError : public Error {
 public:
  using Error::Error;
};

/// A PSF lacks a symmetry the requested computation relies on.
class SymmetryError : public Error {
 public:
  using Error::Error;
};

/// The QFI closed form only holds for equal source strengths.
class UnequalStrengthError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file or table.
class FormatError : public Error {
 public:
  using Error::Error;
};

class SingularMatrixError : public Error {
 public:
  using Error::Error;
};

class IllConditionedError : public Error {
 public:
  using Error::Error;
};

/// The small-separation inverse is undefined on the diagonal d_X^2 = d_Y^2.
class DegenerateInverseError : public Error {
 public:
  using Error::Error;
};

/// A conditional outcome distribution has no mass to sample from.
class ZeroMassError : public Error {
 public:
  using Error::Error;
};

}  // namespace qloc
