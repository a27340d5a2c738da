#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace gaussnm {

using Objective = std::function<double(const std::vector<double>&)>;

/// Axis-aligned search box. Points outside are projected onto it.
struct Box {
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t dim() const { return lower.size(); }
  void validate() const;
  std::vector<double> clamp(std::vector<double> x) const;
};

struct NelderMeadOptions {
  double tolerance = 1e-6;       // stop when the simplex diameter falls below this
  std::size_t max_iterations = 500;
  double initial_step = 0.1;     // fraction of the box width per axis
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  bool converged = false;
};

/// Bounded Nelder-Mead minimization (standard coefficients 1, 2, 1/2, 1/2).
NelderMeadResult nelder_mead_minimize(const Objective& f, std::vector<double> start, const Box& box,
                                      const NelderMeadOptions& options = {});

struct MultiStartOptions {
  std::size_t grid_points = 0;  // per axis; 0 picks 9 / 7 / 5 by dimension
  std::size_t starts = 3;       // local searches from the best grid points
  NelderMeadOptions local{};
  std::size_t threads = 0;      // 0 uses worker_count()
};

struct MultiStartResult {
  std::vector<double> x;
  double value = 0.0;
  std::size_t evaluations = 0;
  std::size_t iterations = 0;  // summed over local searches
  std::size_t restarts = 0;    // local searches run
  std::size_t converged = 0;   // local searches that met the tolerance
  bool stagnated = false;      // no local search improved on the best grid point
};

/// Coarse tensor grid over the box, then Nelder-Mead from the best distinct grid
/// points. Evaluations run in parallel; the result is independent of thread count.
MultiStartResult multistart_minimize(const Objective& f, const Box& box, const MultiStartOptions& options = {});

}  // namespace gaussnm
