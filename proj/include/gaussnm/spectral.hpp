#pragma once

#include "gaussnm/quadrature.hpp"

#include <complex>
#include <functional>
#include <iosfwd>
#include <vector>

namespace gaussnm {

/// Ohmic bath with exponential cutoff, J(w) = w exp(-w / omega_c).
/// Units: hbar = k_B = 1, temperature is k_B T.
struct EnvironmentSpec {
  double omega0 = 1.0;
  double omega_c = 0.2;
  double temperature = 0.0;

  void validate() const;
};

/// How the thermal cosine transform int J(w) N(w) cos(w s) dw is evaluated.
/// trigamma sums the Bose series exactly: T^2 Re psi'(1 + T/omega_c - i T s).
/// quadrature integrates over w directly (slower; kept as an independent route).
enum class ThermalKernel { trigamma, quadrature };

double spectral_density(double omega, const EnvironmentSpec& env);

/// Bose occupation 1 / (exp(w / T) - 1); zero for T == 0.
double bose_occupation(double omega, double temperature);

/// psi'(z) for Re z > 0.
std::complex<double> trigamma(std::complex<double> z);

/// int_0^inf J(w) sin(w s) dw = 2 a s / (a^2 + s^2)^2 with a = 1/omega_c.
double sine_transform(double s, const EnvironmentSpec& env);
/// int_0^inf J(w) cos(w s) dw = (a^2 - s^2) / (a^2 + s^2)^2.
double cosine_transform(double s, const EnvironmentSpec& env);
/// int_0^inf J(w) N(w) cos(w s) dw.
double thermal_cosine_transform(double s, const EnvironmentSpec& env,
                                ThermalKernel kernel = ThermalKernel::trigamma);

/// Upper frequency at which the thermal w-integral is truncated.
double thermal_cutoff_frequency(const EnvironmentSpec& env);

// Integrands of the time integrals, i.e. d gamma / dt and d Delta / dt.
double gamma_rate(double s, const EnvironmentSpec& env);
double delta_zero_rate(double s, const EnvironmentSpec& env);
double delta_thermal_rate(double s, const EnvironmentSpec& env, ThermalKernel kernel = ThermalKernel::trigamma);

/// gamma(t) = int_0^t ds int dw J(w) sin(w0 s) sin(w s).  Temperature independent.
double gamma_coefficient(double t, const EnvironmentSpec& env, const QuadratureOptions& quad = {});
/// Delta_0(t), the T = 0 part of the diffusion coefficient.
double delta_zero_coefficient(double t, const EnvironmentSpec& env, const QuadratureOptions& quad = {});
/// Delta_T(t), the thermal-photon part. Exactly zero for T == 0.
double delta_thermal_coefficient(double t, const EnvironmentSpec& env,
                                 ThermalKernel kernel = ThermalKernel::trigamma,
                                 const QuadratureOptions& quad = {});
/// Delta(t) = Delta_0(t) + Delta_T(t).
double delta_coefficient(double t, const EnvironmentSpec& env, ThermalKernel kernel = ThermalKernel::trigamma,
                         const QuadratureOptions& quad = {});

/// Tabulated damping/diffusion coefficients on a uniform grid together with the
/// cumulative integrals x(t) = 2 alpha int gamma and y(t) = 2 alpha int Delta.
struct ChannelCoefficients {
  std::vector<double> times;
  std::vector<double> gamma;
  std::vector<double> delta;
  std::vector<double> x;
  std::vector<double> y;
  double alpha = 0.0;
  double quadrature_error = 0.0;  // accumulated |error| estimate of the gamma/Delta samples

  std::size_t size() const { return times.size(); }
  double step() const { return times.size() > 1 ? times[1] - times[0] : 0.0; }
  double t_end() const { return times.empty() ? 0.0 : times.back(); }

  /// Same gamma/Delta samples with x, y rescaled to another coupling.
  ChannelCoefficients with_alpha(double alpha) const;
  void validate() const;
};

struct CoefficientOptions {
  ThermalKernel kernel = ThermalKernel::trigamma;
  QuadratureOptions quad{};
};

/// Samples gamma and Delta on n_steps + 1 uniform points of [0, t_end].
ChannelCoefficients build_coefficients(const EnvironmentSpec& env, double alpha, double t_end, std::size_t n_steps,
                                       const CoefficientOptions& options = {});

/// Tabulates arbitrary gamma(t) / Delta(t) functions (stub coefficients, user tables).
ChannelCoefficients tabulate_coefficients(const std::function<double(double)>& gamma,
                                          const std::function<double(double)>& delta, double alpha, double t_end,
                                          std::size_t n_steps);

struct TimeInterval {
  double begin = 0.0;
  double end = 0.0;
  double length() const { return end - begin; }
};

/// Maximal runs where values < 0, endpoints located by linear interpolation of
/// the sign change between neighbouring samples.
std::vector<TimeInterval> negative_intervals(const std::vector<double>& times, const std::vector<double>& values);

/// Intervals where Delta(t) < |gamma(t)|. Empty means divisible at grid resolution.
std::vector<TimeInterval> divisibility_check(const ChannelCoefficients& coeffs);

/// int over the intervals where values < 0 of values dt (a non-positive number).
double negative_part_integral(const std::vector<double>& times, const std::vector<double>& values);

struct SettlingOptions {
  double threshold = 1e-3;     // fraction of max amplitude
  double tail_fraction = 0.1;  // last part of the window that must be settled
  double initial = 0.0;        // first candidate; 0 picks 20 periods of omega0
  double max_t_end = 4000.0;
  std::size_t samples = 800;
};

/// Smallest doubling of the initial window after which gamma and Delta vary by
/// less than threshold * max|.| over the final tail fraction.
double settling_time(const EnvironmentSpec& env, const SettlingOptions& options = {});

/// CSV with header t,gamma,delta,x,y and 12 significant digits.
void write_coefficients_csv(std::ostream& out, const ChannelCoefficients& coeffs);

}  // namespace gaussnm
