#pragma once

#include "gaussnm/gaussian_state.hpp"
#include "gaussnm/spectral.hpp"

#include <iosfwd>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace gaussnm {

enum class EvolutionMode { exact, first_order };

/// Time-dependent rate of the damping channel.
struct DampingRateSpec {
  enum class Kind { paper_example, constant, user_table };

  Kind kind = Kind::paper_example;
  double gamma0 = 0.0;               // constant kind
  std::vector<double> table_times;   // user_table kind: strictly increasing, starting at 0
  std::vector<double> table_rates;   // piecewise linear between samples

  static DampingRateSpec example() { return {}; }
  static DampingRateSpec constant(double gamma0);
  static DampingRateSpec table(std::vector<double> times, std::vector<double> rates);

  void validate() const;
  /// Natural window end: 4 pi for the example rate, the last sample for a table.
  double default_t_end() const;
};

/// gamma(t). The example rate is 1/2 e^{-t/10} sin t below 5 pi/2 and 1/2 e^{-pi/4} after.
double damping_rate(double t, const DampingRateSpec& spec);

/// x(t) = 2 alpha int_0^t gamma(s) ds, analytic for the example and constant rates.
double damping_x(double t, double alpha, const DampingRateSpec& spec);

/// Intervals in [0, t_end] where gamma < 0. Exact for the example and constant rates.
std::vector<TimeInterval> rate_negative_intervals(const DampingRateSpec& spec, double t_end);

/// int over gamma < 0 of 2 gamma(t) dt on [0, t_end] (non-positive, per unit coupling).
double rate_negative_integral(const DampingRateSpec& spec, double t_end);

/// Both channels act as mean -> m mean, cov -> c cov + n I/2.
struct MapCoefficients {
  double mean_scale = 1.0;  // m
  double cov_scale = 1.0;   // c
  double noise = 0.0;       // n
  double x = 0.0;           // accumulated damping integral, for the breakdown flag
};

/// Applies the affine map. The result must stay positive definite (DomainError
/// otherwise) but may fall below the Heisenberg bound; check is_physical().
GaussianState apply_map(const GaussianState& state, const MapCoefficients& map);

struct EvolvedState {
  GaussianState state;
  bool first_order_breakdown = false;  // first-order mode with |x| above kFirstOrderLimit
  bool physical = true;                // det cov >= 1/4 within tolerance
};

inline constexpr double kFirstOrderLimit = 0.3;

/// A phase-insensitive single-mode Gaussian channel with time-dependent coefficients.
class Channel {
 public:
  virtual ~Channel() = default;

  /// Map coefficients at time t in [0, t_end()]. Throws RangeError outside.
  virtual MapCoefficients coefficients(double t, EvolutionMode mode) const = 0;

  virtual double alpha() const = 0;
  virtual double t_end() const = 0;
  /// Default sampling grid for trajectories.
  virtual std::vector<double> grid() const = 0;
  virtual std::string name() const = 0;

  /// Intervals where the coefficient that drives coherent-state backflow is negative
  /// (gamma for damping, Delta for QBM).
  virtual std::vector<TimeInterval> backflow_intervals() const = 0;
  /// int over those intervals of 2 x coefficient, per unit coupling (non-positive).
  virtual double negative_integral() const = 0;

  virtual std::shared_ptr<const Channel> with_alpha(double alpha) const = 0;

  /// Evolved state at time t.
  EvolvedState evolve(const GaussianState& state, double t, EvolutionMode mode) const;
};

class DampingChannel final : public Channel {
 public:
  /// t_end <= 0 picks spec.default_t_end().
  DampingChannel(DampingRateSpec spec, double alpha, double t_end = 0.0, std::size_t n_steps = 2000);

  MapCoefficients coefficients(double t, EvolutionMode mode) const override;
  double alpha() const override { return alpha_; }
  double t_end() const override { return t_end_; }
  std::vector<double> grid() const override;
  std::string name() const override { return "damping"; }
  std::vector<TimeInterval> backflow_intervals() const override;
  double negative_integral() const override;
  std::shared_ptr<const Channel> with_alpha(double alpha) const override;

  const DampingRateSpec& spec() const { return spec_; }
  std::size_t steps() const { return n_steps_; }

 private:
  DampingRateSpec spec_;
  double alpha_;
  double t_end_;
  std::size_t n_steps_;
};

/// Weight of the tabulated Delta in the QBM master equation.
///  coth:    the diffusion rate is 2 Delta = int J(w) coth(w / 2T) cos cos, so the
///           stationary covariance is (N + 1/2) I and states stay physical.
///  printed: Delta enters as tabulated; the stationary covariance is (N + 1/2) I / 2,
///           below the vacuum for T < ~0.9 w0, and the fidelity loses its meaning there.
enum class NoiseConvention { coth, printed };

double noise_scale(NoiseConvention convention);

/// Secular weak-coupling QBM channel over a tabulated coefficient grid:
/// d cov/dt = -2 alpha gamma cov + s alpha Delta I with s = noise_scale(convention).
/// Between grid points x, y and the exact noise term are interpolated by cubic
/// Hermite polynomials using their known time derivatives.
class QbmChannel final : public Channel {
 public:
  explicit QbmChannel(ChannelCoefficients coeffs, NoiseConvention convention = NoiseConvention::coth);

  MapCoefficients coefficients(double t, EvolutionMode mode) const override;
  double alpha() const override { return coeffs_.alpha; }
  double t_end() const override { return coeffs_.t_end(); }
  std::vector<double> grid() const override { return coeffs_.times; }
  std::string name() const override { return "qbm"; }
  std::vector<TimeInterval> backflow_intervals() const override;
  double negative_integral() const override;
  std::shared_ptr<const Channel> with_alpha(double alpha) const override;

  const ChannelCoefficients& table() const { return coeffs_; }
  NoiseConvention convention() const { return convention_; }
  /// s 2 alpha e^{-x(t)} int_0^t e^{x(s)} Delta(s) ds on the grid.
  const std::vector<double>& exact_noise() const { return noise_; }
  /// Intervals where the upward rate s Delta - gamma or the downward rate
  /// s Delta + gamma is negative, i.e. s Delta < |gamma|.
  std::vector<TimeInterval> divisibility_violations() const;

 private:
  ChannelCoefficients coeffs_;
  NoiseConvention convention_;
  double scale_;
  std::vector<double> noise_;
};

/// One initial state evolved over a grid.
struct Trajectory {
  std::vector<double> times;
  std::vector<GaussianState> states;
  std::string channel;
  SingleModeParams initial;
  bool first_order_breakdown = false;
  double min_det = 0.0;  // smallest det cov along the trajectory
};

/// Evolves both members of a pair over the grid (the channel grid when empty).
std::pair<Trajectory, Trajectory> trajectory(const StatePairParams& pair, const Channel& channel,
                                             EvolutionMode mode, std::vector<double> grid = {});

/// CSV with header t,mean_q,mean_p,cov_qq,cov_qp,cov_pp.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

}  // namespace gaussnm
