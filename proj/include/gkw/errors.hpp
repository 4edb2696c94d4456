#pragma once

#include <stdexcept>
#include <string>

namespace gkw {

/// Base class for all structured errors raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A field passed to a grid operator contains NaN or infinity.
class NonFiniteField : public Error {
 public:
  using Error::Error;
};

/// A coefficient field has a negative node value.
class NegativeCoefficient : public Error {
 public:
  using Error::Error;
};

/// A pointwise exponent exceeded the guard threshold of an active term.
class ExponentOverflow : public Error {
 public:
  using Error::Error;
};

/// poisson_solve in strict mode received a right-hand side whose mean
/// exceeds the configured tolerance.
class ZeroMeanViolation : public Error {
 public:
  using Error::Error;
};

/// The LP could not certify membership on either side within tolerance.
class LPNumericalFailure : public Error {
 public:
  using Error::Error;
};

/// Foliation reduction received data that is not basic.
class NotBasicData : public Error {
 public:
  NotBasicData(const std::string& field_name, double defect)
      : Error("field '" + field_name + "' is not basic (defect " +
              std::to_string(defect) + ")"),
        field_name(field_name),
        defect(defect) {}
  std::string field_name;
  double defect;
};

/// The equivalence harness observed clauses that disagree beyond tolerance.
class InconsistencyDetected : public Error {
 public:
  using Error::Error;
};

/// Cyclic-Higgs data violates the declared symmetry.
class AsymmetricData : public Error {
 public:
  using Error::Error;
};

/// The certificate margin is too close to the cone boundary for a strict
/// solve to be trustworthy; rerun in audit mode.
class NearBoundaryRefusal : public Error {
 public:
  using Error::Error;
};

/// A configuration document violates the schema. `pointer` is the JSON
/// pointer of the offending location.
class SchemaError : public Error {
 public:
  SchemaError(const std::string& pointer, const std::string& message)
      : Error(pointer + ": " + message), pointer(pointer) {}
  std::string pointer;
};

/// An expression failed to parse or evaluate. `position` is the byte
/// offset into the expression text.
class ExpressionParseError : public Error {
 public:
  ExpressionParseError(std::size_t position, const std::string& message)
      : Error("at position " + std::to_string(position) + ": " + message),
        position(position) {}
  std::size_t position;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace gkw
