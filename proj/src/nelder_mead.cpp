#include "gaussnm/nelder_mead.hpp"

#include "gaussnm/errors.hpp"
#include "gaussnm/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace gaussnm {

void Box::validate() const {
  if (lower.empty() || lower.size() != upper.size()) throw DomainError("search box bounds have mismatched sizes");
  for (std::size_t i = 0; i < lower.size(); ++i) {
    if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]) || lower[i] > upper[i]) {
      throw DomainError("search box bound " + std::to_string(i) + " is not a finite interval");
    }
  }
}

std::vector<double> Box::clamp(std::vector<double> x) const {
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], lower[i], upper[i]);
  return x;
}

NelderMeadResult nelder_mead_minimize(const Objective& f, std::vector<double> start, const Box& box,
                                      const NelderMeadOptions& options) {
  box.validate();
  const std::size_t n = box.dim();
  if (start.size() != n) throw DomainError("start point dimension does not match the box");

  NelderMeadResult res;
  auto eval = [&](const std::vector<double>& p) {
    ++res.evaluations;
    return f(p);
  };

  std::vector<std::vector<double>> simplex(n + 1, box.clamp(std::move(start)));
  for (std::size_t i = 0; i < n; ++i) {
    const double width = box.upper[i] - box.lower[i];
    double step = options.initial_step * (width > 0.0 ? width : 1.0);
    // step inward when the start sits on the upper bound
    if (simplex[0][i] + step > box.upper[i]) step = -step;
    simplex[i + 1][i] += step;
    simplex[i + 1] = box.clamp(std::move(simplex[i + 1]));
  }
  std::vector<double> values(n + 1);
  for (std::size_t i = 0; i <= n; ++i) values[i] = eval(simplex[i]);

  std::vector<std::size_t> order(n + 1);
  auto diameter = [&] {
    double d = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += std::pow(simplex[i][k] - simplex[0][k], 2);
      d = std::max(d, std::sqrt(s));
    }
    return d;
  };
  auto along = [&](const std::vector<double>& centroid, const std::vector<double>& worst, double coef) {
    std::vector<double> p(n);
    for (std::size_t k = 0; k < n; ++k) p[k] = centroid[k] + coef * (worst[k] - centroid[k]);
    return box.clamp(std::move(p));
  };

  while (true) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    {
      std::vector<std::vector<double>> s2;
      std::vector<double> v2;
      for (std::size_t i : order) {
        s2.push_back(simplex[i]);
        v2.push_back(values[i]);
      }
      simplex = std::move(s2);
      values = std::move(v2);
    }
    if (diameter() < options.tolerance) {
      res.converged = true;
      break;
    }
    if (res.iterations >= options.max_iterations) break;
    ++res.iterations;

    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < n; ++k) centroid[k] += simplex[i][k] / static_cast<double>(n);
    }
    const std::vector<double>& worst = simplex[n];

    const std::vector<double> reflected = along(centroid, worst, -1.0);
    const double fr = eval(reflected);
    if (fr < values[0]) {
      const std::vector<double> expanded = along(centroid, worst, -2.0);
      const double fe = eval(expanded);
      if (fe < fr) {
        simplex[n] = expanded;
        values[n] = fe;
      } else {
        simplex[n] = reflected;
        values[n] = fr;
      }
      continue;
    }
    if (fr < values[n - 1]) {
      simplex[n] = reflected;
      values[n] = fr;
      continue;
    }
    const bool outside = fr < values[n];
    const std::vector<double> contracted = along(centroid, worst, outside ? -0.5 : 0.5);
    const double fc = eval(contracted);
    if (fc < (outside ? fr : values[n])) {
      simplex[n] = contracted;
      values[n] = fc;
      continue;
    }
    // shrink towards the best vertex
    for (std::size_t i = 1; i <= n; ++i) {
      for (std::size_t k = 0; k < n; ++k) simplex[i][k] = simplex[0][k] + 0.5 * (simplex[i][k] - simplex[0][k]);
      values[i] = eval(simplex[i]);
    }
  }
  res.x = simplex[0];
  res.value = values[0];
  return res;
}

MultiStartResult multistart_minimize(const Objective& f, const Box& box, const MultiStartOptions& options) {
  box.validate();
  const std::size_t dim = box.dim();
  std::size_t per_axis = options.grid_points;
  if (per_axis == 0) per_axis = dim == 1 ? 9 : dim == 2 ? 7 : 5;
  per_axis = std::max<std::size_t>(per_axis, 2);
  const std::size_t threads = options.threads ? options.threads : worker_count();

  std::size_t total = 1;
  for (std::size_t k = 0; k < dim; ++k) total *= per_axis;
  auto grid_point = [&](std::size_t index) {
    std::vector<double> p(dim);
    for (std::size_t k = 0; k < dim; ++k) {
      const std::size_t j = index % per_axis;
      index /= per_axis;
      const double frac = static_cast<double>(j) / static_cast<double>(per_axis - 1);
      p[k] = box.lower[k] + frac * (box.upper[k] - box.lower[k]);
    }
    return p;
  };
  const std::vector<double> grid_values = parallel_map(total, [&](std::size_t i) { return f(grid_point(i)); }, threads);

  std::vector<std::size_t> ranked(total);
  std::iota(ranked.begin(), ranked.end(), 0);
  std::stable_sort(ranked.begin(), ranked.end(),
                   [&](std::size_t a, std::size_t b) { return grid_values[a] < grid_values[b]; });
  const std::size_t starts = std::min(std::max<std::size_t>(options.starts, 1), total);
  ranked.resize(starts);

  const auto local = parallel_map(
      starts, [&](std::size_t i) { return nelder_mead_minimize(f, grid_point(ranked[i]), box, options.local); },
      threads);

  MultiStartResult res;
  res.x = grid_point(ranked[0]);
  res.value = grid_values[ranked[0]];
  res.evaluations = total;
  res.stagnated = true;
  for (const NelderMeadResult& r : local) {
    res.evaluations += r.evaluations;
    res.iterations += r.iterations;
    ++res.restarts;
    if (r.converged) ++res.converged;
    if (r.value < res.value) {
      if (r.value < grid_values[ranked[0]] - 1e-15 * std::abs(grid_values[ranked[0]])) res.stagnated = false;
      res.value = r.value;
      res.x = r.x;
    }
  }
  return res;
}

}  // namespace gaussnm
