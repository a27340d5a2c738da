#include "gaussnm/quadrature.hpp"

#include "gaussnm/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <sstream>

namespace gaussnm {

QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureOptions& options) {
  if (a == b) return {};
  QuadratureResult r;
  r.value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      f, a, b, options.max_depth, options.rel_tol, &r.error, &r.l1);
  if (!std::isfinite(r.value)) throw NumericalError("non-finite quadrature result");
  if (r.error > options.fail_rel * r.l1 + 1e-300) {
    std::ostringstream msg;
    msg << "quadrature on [" << a << ", " << b << "] did not converge: error estimate " << r.error
        << " vs L1 " << r.l1;
    throw ConvergenceError(msg.str(), r.error);
  }
  return r;
}

double simpson(std::span<const double> v, double h) {
  const std::size_t n = v.size();
  if (n < 2) return 0.0;
  if (n == 2) return 0.5 * h * (v[0] + v[1]);
  double total = 0.0;
  std::size_t last = n - 1;
  if (last % 2 == 1) {
    // odd number of intervals: close the final one with the three-point rule
    total += h / 12.0 * (-v[n - 3] + 8.0 * v[n - 2] + 5.0 * v[n - 1]);
    last -= 1;
  }
  for (std::size_t i = 0; i + 2 <= last; i += 2) {
    total += h / 3.0 * (v[i] + 4.0 * v[i + 1] + v[i + 2]);
  }
  return total;
}

std::vector<double> cumulative_simpson(std::span<const double> v, double h) {
  const std::size_t n = v.size();
  std::vector<double> out(n, 0.0);
  if (n < 2) return out;
  if (n == 2) {
    out[1] = 0.5 * h * (v[0] + v[1]);
    return out;
  }
  for (std::size_t k = 1; k < n; ++k) {
    if (k % 2 == 0) {
      out[k] = out[k - 2] + h / 3.0 * (v[k - 2] + 4.0 * v[k - 1] + v[k]);
    } else if (k + 1 < n) {
      // first interval of a pair, fitted on (k-1, k, k+1)
      out[k] = out[k - 1] + h / 12.0 * (5.0 * v[k - 1] + 8.0 * v[k] - v[k + 1]);
    } else {
      out[k] = out[k - 1] + h / 12.0 * (-v[k - 2] + 8.0 * v[k - 1] + 5.0 * v[k]);
    }
  }
  return out;
}

}  // namespace gaussnm
