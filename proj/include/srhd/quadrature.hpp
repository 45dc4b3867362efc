#pragma once
#include <functional>

#include <srhd/errors.hpp>

namespace srhd {

struct IntegrateOptions {
  double abs_tol = 1e-10;
  double rel_tol = 0.0;
  int max_intervals = 4000;
};

struct IntegrationResult {
  double value = 0.0;
  double abs_error = 0.0; ///< integrator's error estimate
};

/// Adaptive Gauss-Kronrod integration of `f` over the finite interval [a, b].
/// Throws QuadratureError (carrying the residual estimate) when the
/// requested tolerance cannot be met.
IntegrationResult integrate(const std::function<double(double)>& f, double a,
                            double b, const IntegrateOptions& opts = {});

} // namespace srhd
