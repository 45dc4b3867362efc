#pragma once
#include <stdexcept>
#include <string>

namespace srhd {

/// Adaptive integration failed to reach the requested tolerance.
/// `residual` carries the integrator's final error estimate.
class QuadratureError : public std::runtime_error {
public:
  QuadratureError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

private:
  double residual_;
};

/// Antisymmetric mode requested for (near-)coincident sources.
class DegenerateModeError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A single realization could not produce an estimate (e.g. no interior
/// variance minimum, or a variance exceeding the invertible range).
class EstimationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Too many realizations of a Monte Carlo protocol failed.
class ProtocolError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace srhd
