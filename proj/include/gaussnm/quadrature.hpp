#pragma once

#include <functional>
#include <span>
#include <vector>

namespace gaussnm {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;  // estimated absolute error
  double l1 = 0.0;     // integral of |f|, the scale the tolerance is measured against
};

struct QuadratureOptions {
  double rel_tol = 1e-10;
  // Failure threshold: error > fail_rel * l1 after max refinement raises ConvergenceError.
  double fail_rel = 1e-8;
  unsigned max_depth = 18;
};

/// Adaptive 31-point Gauss-Kronrod on [a, b].
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureOptions& options = {});

/// Composite Simpson over uniformly spaced samples (odd or even count >= 2).
double simpson(std::span<const double> values, double h);

/// Running integral from values[0]: out[k] = int_{t_0}^{t_k}. Simpson pairs for
/// even k, plus a three-point end correction for odd k; O(h^4) everywhere.
std::vector<double> cumulative_simpson(std::span<const double> values, double h);

}  // namespace gaussnm
