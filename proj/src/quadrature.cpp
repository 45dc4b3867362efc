#include <srhd/quadrature.hpp>

#include <memory>
#include <string>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

namespace srhd {

namespace {

double callback(double x, void* params) {
  auto* f = static_cast<const std::function<double(double)>*>(params);
  return (*f)(x);
}

struct WorkspaceDeleter {
  void operator()(gsl_integration_workspace* w) const {
    gsl_integration_workspace_free(w);
  }
};

// GSL aborts on error by default; disable once, check return codes instead.
const int kHandlerOff = [] {
  gsl_set_error_handler_off();
  return 0;
}();

} // namespace

IntegrationResult integrate(const std::function<double(double)>& f, double a,
                            double b, const IntegrateOptions& opts) {
  std::unique_ptr<gsl_integration_workspace, WorkspaceDeleter> ws(
      gsl_integration_workspace_alloc(opts.max_intervals));

  gsl_function gf;
  gf.function = &callback;
  gf.params = const_cast<void*>(static_cast<const void*>(&f));

  IntegrationResult res;
  int status = gsl_integration_qag(&gf, a, b, opts.abs_tol, opts.rel_tol,
                                   opts.max_intervals, GSL_INTEG_GAUSS61,
                                   ws.get(), &res.value, &res.abs_error);
  if (status != GSL_SUCCESS && res.abs_error > opts.abs_tol) {
    throw QuadratureError("adaptive quadrature did not converge: " +
                              std::string(gsl_strerror(status)),
                          res.abs_error);
  }
  return res;
}

} // namespace srhd
