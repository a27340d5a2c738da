#include "gaussnm/spectral.hpp"

#include "gaussnm/csv.hpp"
#include "gaussnm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

namespace gaussnm {

namespace {

void require_time(double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("time must be finite and >= 0");
}

// Integrate a rate from 0 to t in pieces no longer than half an oscillation period.
double time_integral(const std::function<double(double)>& rate, double t, double omega0,
                     const QuadratureOptions& quad) {
  require_time(t);
  if (t == 0.0) return 0.0;
  const double piece = std::numbers::pi / std::max(omega0, 1e-3);
  const auto n = static_cast<std::size_t>(std::ceil(t / piece));
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = t * static_cast<double>(i) / static_cast<double>(n);
    const double b = t * static_cast<double>(i + 1) / static_cast<double>(n);
    total += integrate(rate, a, b, quad).value;
  }
  return total;
}

}  // namespace

void EnvironmentSpec::validate() const {
  if (!(omega0 > 0.0) || !std::isfinite(omega0)) throw DomainError("omega0 must be finite and > 0");
  if (!(omega_c > 0.0) || !std::isfinite(omega_c)) throw DomainError("omega_c must be finite and > 0");
  if (!(temperature >= 0.0) || !std::isfinite(temperature)) {
    throw DomainError("temperature must be finite and >= 0");
  }
}

double spectral_density(double omega, const EnvironmentSpec& env) {
  if (!(omega >= 0.0)) throw DomainError("spectral density requires omega >= 0");
  return omega * std::exp(-omega / env.omega_c);
}

double bose_occupation(double omega, double temperature) {
  if (temperature <= 0.0) return 0.0;
  return 1.0 / std::expm1(omega / temperature);
}

std::complex<double> trigamma(std::complex<double> z) {
  if (!(z.real() > 0.0)) throw DomainError("trigamma implemented for Re z > 0 only");
  std::complex<double> acc = 0.0;
  while (std::abs(z) < 16.0) {
    acc += 1.0 / (z * z);
    z += 1.0;
  }
  // psi'(z) ~ 1/z + 1/(2 z^2) + sum_k B_2k / z^(2k+1)
  static constexpr double bernoulli[] = {1.0 / 6.0,  -1.0 / 30.0,     1.0 / 42.0, -1.0 / 30.0,
                                         5.0 / 66.0, -691.0 / 2730.0, 7.0 / 6.0};
  const std::complex<double> inv = 1.0 / z;
  const std::complex<double> inv2 = inv * inv;
  std::complex<double> term = inv * inv2;
  std::complex<double> series = inv + 0.5 * inv2;
  for (double b : bernoulli) {
    series += b * term;
    term *= inv2;
  }
  return acc + series;
}

double sine_transform(double s, const EnvironmentSpec& env) {
  const double a = 1.0 / env.omega_c;
  const double den = a * a + s * s;
  return 2.0 * a * s / (den * den);
}

double cosine_transform(double s, const EnvironmentSpec& env) {
  const double a = 1.0 / env.omega_c;
  const double den = a * a + s * s;
  return (a * a - s * s) / (den * den);
}

double thermal_cutoff_frequency(const EnvironmentSpec& env) {
  const double scale = std::max(env.omega_c, env.temperature);
  return scale * std::log(1e12) + 10.0 * scale;
}

double thermal_cosine_transform(double s, const EnvironmentSpec& env, ThermalKernel kernel) {
  const double temp = env.temperature;
  if (temp == 0.0) return 0.0;
  const double a = 1.0 / env.omega_c;
  if (kernel == ThermalKernel::trigamma) {
    // sum_k Re (a + k/T - i s)^-2 = T^2 Re psi'(1 + T a - i T s)
    return temp * temp * trigamma({1.0 + temp * a, -temp * s}).real();
  }
  // J(w) N(w) = e^{-w/wc} * w N(w); w N(w) -> T as w -> 0.
  auto integrand = [&](double w) {
    const double u = w / temp;
    const double wn = u < 1e-8 ? temp * (1.0 - 0.5 * u) : w / std::expm1(u);
    return std::exp(-w / env.omega_c) * wn * std::cos(w * s);
  };
  const double w_max = thermal_cutoff_frequency(env);
  // Split by oscillation period so the adaptive rule sees a few cycles at a time.
  const auto pieces = static_cast<std::size_t>(std::clamp(std::ceil(w_max * s / (4.0 * std::numbers::pi)), 1.0, 4000.0));
  QuadratureOptions quad;
  quad.rel_tol = 1e-12;
  double total = 0.0;
  for (std::size_t i = 0; i < pieces; ++i) {
    const double lo = w_max * static_cast<double>(i) / static_cast<double>(pieces);
    const double hi = w_max * static_cast<double>(i + 1) / static_cast<double>(pieces);
    total += integrate(integrand, lo, hi, quad).value;
  }
  return total;
}

double gamma_rate(double s, const EnvironmentSpec& env) {
  return std::sin(env.omega0 * s) * sine_transform(s, env);
}

double delta_zero_rate(double s, const EnvironmentSpec& env) {
  return 0.5 * std::cos(env.omega0 * s) * cosine_transform(s, env);
}

double delta_thermal_rate(double s, const EnvironmentSpec& env, ThermalKernel kernel) {
  if (env.temperature == 0.0) return 0.0;
  return std::cos(env.omega0 * s) * thermal_cosine_transform(s, env, kernel);
}

double gamma_coefficient(double t, const EnvironmentSpec& env, const QuadratureOptions& quad) {
  env.validate();
  return time_integral([&](double s) { return gamma_rate(s, env); }, t, env.omega0, quad);
}

double delta_zero_coefficient(double t, const EnvironmentSpec& env, const QuadratureOptions& quad) {
  env.validate();
  return time_integral([&](double s) { return delta_zero_rate(s, env); }, t, env.omega0, quad);
}

double delta_thermal_coefficient(double t, const EnvironmentSpec& env, ThermalKernel kernel,
                                 const QuadratureOptions& quad) {
  env.validate();
  require_time(t);
  if (env.temperature == 0.0) return 0.0;
  return time_integral([&](double s) { return delta_thermal_rate(s, env, kernel); }, t, env.omega0, quad);
}

double delta_coefficient(double t, const EnvironmentSpec& env, ThermalKernel kernel, const QuadratureOptions& quad) {
  return delta_zero_coefficient(t, env, quad) + delta_thermal_coefficient(t, env, kernel, quad);
}

ChannelCoefficients ChannelCoefficients::with_alpha(double new_alpha) const {
  if (!(new_alpha > 0.0) || !std::isfinite(new_alpha)) throw DomainError("alpha must be finite and > 0");
  ChannelCoefficients out = *this;
  const double ratio = new_alpha / alpha;
  for (double& v : out.x) v *= ratio;
  for (double& v : out.y) v *= ratio;
  out.alpha = new_alpha;
  return out;
}

void ChannelCoefficients::validate() const {
  const std::size_t n = times.size();
  if (n < 2) throw DomainError("coefficient table needs at least two samples");
  if (gamma.size() != n || delta.size() != n || x.size() != n || y.size() != n) {
    throw DomainError("coefficient columns have different lengths");
  }
  if (times.front() != 0.0 || x.front() != 0.0 || y.front() != 0.0) {
    throw DomainError("coefficient table must start at t = 0 with x = y = 0");
  }
  for (std::size_t i = 1; i < n; ++i) {
    if (!(times[i] > times[i - 1])) throw DomainError("coefficient grid is not strictly increasing");
  }
}

namespace {

ChannelCoefficients finish_table(std::vector<double> times, std::vector<double> gamma, std::vector<double> delta,
                                 double alpha, double h) {
  ChannelCoefficients c;
  c.alpha = alpha;
  c.x = cumulative_simpson(gamma, h);
  c.y = cumulative_simpson(delta, h);
  for (double& v : c.x) v *= 2.0 * alpha;
  for (double& v : c.y) v *= 2.0 * alpha;
  c.times = std::move(times);
  c.gamma = std::move(gamma);
  c.delta = std::move(delta);
  return c;
}

void check_grid_args(double alpha, double t_end, std::size_t n_steps) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError("alpha must be finite and > 0");
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw DomainError("t_end must be finite and > 0");
  if (n_steps < 2) throw DomainError("n_steps must be >= 2");
}

std::vector<double> uniform(double t_end, std::size_t n_steps) {
  std::vector<double> t(n_steps + 1);
  for (std::size_t i = 0; i <= n_steps; ++i) t[i] = t_end * static_cast<double>(i) / static_cast<double>(n_steps);
  return t;
}

}  // namespace

ChannelCoefficients build_coefficients(const EnvironmentSpec& env, double alpha, double t_end, std::size_t n_steps,
                                       const CoefficientOptions& options) {
  env.validate();
  check_grid_args(alpha, t_end, n_steps);
  std::vector<double> times = uniform(t_end, n_steps);
  std::vector<double> gamma(times.size(), 0.0);
  std::vector<double> delta(times.size(), 0.0);
  auto g_rate = [&](double s) { return gamma_rate(s, env); };
  auto d_rate = [&](double s) { return delta_zero_rate(s, env) + delta_thermal_rate(s, env, options.kernel); };
  double err = 0.0;
  for (std::size_t i = 1; i < times.size(); ++i) {
    const QuadratureResult g = integrate(g_rate, times[i - 1], times[i], options.quad);
    const QuadratureResult d = integrate(d_rate, times[i - 1], times[i], options.quad);
    gamma[i] = gamma[i - 1] + g.value;
    delta[i] = delta[i - 1] + d.value;
    err += g.error + d.error;
  }
  const double h = times[1] - times[0];
  ChannelCoefficients c = finish_table(std::move(times), std::move(gamma), std::move(delta), alpha, h);
  c.quadrature_error = err;
  return c;
}

ChannelCoefficients tabulate_coefficients(const std::function<double(double)>& gamma_fn,
                                          const std::function<double(double)>& delta_fn, double alpha, double t_end,
                                          std::size_t n_steps) {
  check_grid_args(alpha, t_end, n_steps);
  std::vector<double> times = uniform(t_end, n_steps);
  std::vector<double> gamma(times.size());
  std::vector<double> delta(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    gamma[i] = gamma_fn(times[i]);
    delta[i] = delta_fn(times[i]);
  }
  const double h = times[1] - times[0];
  return finish_table(std::move(times), std::move(gamma), std::move(delta), alpha, h);
}

std::vector<TimeInterval> negative_intervals(const std::vector<double>& times, const std::vector<double>& values) {
  std::vector<TimeInterval> out;
  const std::size_t n = std::min(times.size(), values.size());
  auto crossing = [&](std::size_t i) {
    // zero of the linear interpolant between samples i-1 and i
    const double v0 = values[i - 1];
    const double v1 = values[i];
    return times[i - 1] + (times[i] - times[i - 1]) * v0 / (v0 - v1);
  };
  bool inside = false;
  double begin = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const bool neg = values[i] < 0.0;
    if (neg && !inside) {
      begin = i == 0 ? times[0] : crossing(i);
      inside = true;
    } else if (!neg && inside) {
      out.push_back({begin, crossing(i)});
      inside = false;
    }
  }
  if (inside) out.push_back({begin, times[n - 1]});
  return out;
}

std::vector<TimeInterval> divisibility_check(const ChannelCoefficients& coeffs) {
  std::vector<double> margin(coeffs.size());
  for (std::size_t i = 0; i < coeffs.size(); ++i) margin[i] = coeffs.delta[i] - std::abs(coeffs.gamma[i]);
  return negative_intervals(coeffs.times, margin);
}

double negative_part_integral(const std::vector<double>& times, const std::vector<double>& values) {
  // Trapezoid on the clipped samples, with the zero crossings inserted so partial
  // cells are integrated exactly for the linear interpolant.
  double total = 0.0;
  for (std::size_t i = 1; i < times.size(); ++i) {
    const double v0 = values[i - 1];
    const double v1 = values[i];
    const double h = times[i] - times[i - 1];
    if (v0 <= 0.0 && v1 <= 0.0) {
      total += 0.5 * h * (v0 + v1);
    } else if (v0 < 0.0 && v1 > 0.0) {
      const double frac = v0 / (v0 - v1);
      total += 0.5 * h * frac * v0;
    } else if (v0 > 0.0 && v1 < 0.0) {
      const double frac = v1 / (v1 - v0);
      total += 0.5 * h * frac * v1;
    }
  }
  return total;
}

double settling_time(const EnvironmentSpec& env, const SettlingOptions& options) {
  env.validate();
  double t_end = options.initial > 0.0 ? options.initial : 20.0 * 2.0 * std::numbers::pi / env.omega0;
  for (;;) {
    const ChannelCoefficients c = build_coefficients(env, 1.0, t_end, options.samples);
    auto settled = [&](const std::vector<double>& v) {
      double amp = 0.0;
      for (double e : v) amp = std::max(amp, std::abs(e));
      if (amp == 0.0) return true;
      const double last = v.back();
      const auto tail_start = static_cast<std::size_t>(std::floor((1.0 - options.tail_fraction) * static_cast<double>(v.size() - 1)));
      for (std::size_t i = tail_start; i < v.size(); ++i) {
        if (std::abs(v[i] - last) >= options.threshold * amp) return false;
      }
      return true;
    };
    if (settled(c.gamma) && settled(c.delta)) return t_end;
    if (2.0 * t_end > options.max_t_end) return options.max_t_end;
    t_end *= 2.0;
  }
}

void write_coefficients_csv(std::ostream& out, const ChannelCoefficients& c) {
  csv::write_row(out, {"t", "gamma", "delta", "x", "y"});
  for (std::size_t i = 0; i < c.size(); ++i) {
    csv::write_row(out, {csv::number(c.times[i]), csv::number(c.gamma[i]), csv::number(c.delta[i]),
                         csv::number(c.x[i]), csv::number(c.y[i])});
  }
}

}  // namespace gaussnm
