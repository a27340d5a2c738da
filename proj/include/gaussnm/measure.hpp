#pragma once

#include "gaussnm/channels.hpp"
#include "gaussnm/gaussian_state.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gaussnm {

enum class Family { coherent, squeezed, coherent_thermal, general_pure };
enum class MeasureMethod { numeric_opt, closed_form, first_order };

std::string to_string(Family family);
std::string to_string(MeasureMethod method);
/// Throws DomainError for unknown names.
Family parse_family(std::string_view name);
MeasureMethod parse_method(std::string_view name);

/// Fidelity of a fixed pair of initial states after the common map
/// mean -> m mean, cov -> c cov + n I/2. Determinants are expanded in c and n so
/// that the Heisenberg excess of nearly pure states keeps its precision.
class PairFidelity {
 public:
  PairFidelity(const GaussianState& a, const GaussianState& b);
  explicit PairFidelity(const StatePairParams& pair);

  double operator()(const MapCoefficients& map) const;
  double initial() const { return (*this)(MapCoefficients{}); }

 private:
  Vec2 dmean_;
  Mat2 sum_;          // cov_a + cov_b
  double det_sum_;
  double trace_sum_;
  double trace_[2];
  double excess_[2];  // det cov - 1/4 at t = 0
};

/// A maximal time window on which the fidelity decreases.
struct NegativityInterval {
  double t_plus = 0.0;        // onset of the decrease (local maximum or t = 0)
  double t_minus = 0.0;       // end of the decrease (local minimum or end of window)
  double contribution = 0.0;  // F(t_plus) - F(t_minus)
};

struct FidelityTrajectory {
  std::vector<double> times;
  std::vector<double> fidelity;
  std::vector<NegativityInterval> intervals;
  std::size_t refinements = 0;  // extrema refined between grid points
};

/// F(t) of the evolved pair on the grid (the channel grid when empty) with every
/// local extremum refined by Brent's method between its neighbouring samples.
FidelityTrajectory fidelity_trajectory(const StatePairParams& pair, const Channel& channel,
                                       EvolutionMode mode = EvolutionMode::exact, std::vector<double> grid = {});

/// Sum over decrease intervals of F(t_plus) - F(t_minus).
double measure_from_trajectory(const FidelityTrajectory& traj);

struct SearchBounds {
  double amplitude_max = 6.0;  // |beta| of each state
  double squeeze_max = 6.0;    // r of each state
  double thermal_max = 5.0;    // N, coherent_thermal family

  void validate() const;
};

struct OptimizerConfig {
  std::size_t grid_points = 0;  // per active dimension; 0 picks 9 / 7 / 5 by dimension
  std::size_t starts = 3;
  double tolerance = 1e-6;      // simplex diameter
  std::size_t max_iterations = 500;
  double squeeze_angle = 0.1;   // angle between squeezing directions, squeezed family
  bool equal_squeeze = false;   // constrain r1 = r2
  std::optional<double> fixed_thermal;  // pin N1 = N2 in the coherent_thermal family
  EvolutionMode mode = EvolutionMode::exact;
  std::size_t threads = 0;      // 0 uses worker_count()
};

struct MeasureDiagnostics {
  std::size_t evaluations = 0;
  std::size_t iterations = 0;
  std::size_t restarts = 0;
  std::size_t converged = 0;
  std::size_t refinements = 0;
  bool stagnated = false;
  std::string note;
};

/// A named optimum coordinate, e.g. K for coherent pairs or r for squeezed pairs.
struct NamedValue {
  std::string name;
  double value = 0.0;
};

struct MeasureResult {
  Family family = Family::coherent;
  std::string channel;
  MeasureMethod method = MeasureMethod::numeric_opt;
  double value = 0.0;
  StatePairParams argmax;
  std::vector<NegativityInterval> intervals;
  std::vector<NamedValue> extras;
  MeasureDiagnostics diagnostics;

  /// Value of a named extra, or nullopt.
  std::optional<double> extra(std::string_view name) const;
};

/// Maximizes the backflow over the family. Coherent pairs reduce to |beta1 - beta2|,
/// squeezed pairs to {r1, r2} (or r) at the configured angle, coherent_thermal to
/// {|beta1 - beta2|, N}, general_pure to {|beta|, theta, r1, r2, phi}.
MeasureResult maximize_measure(Family family, const Channel& channel, const SearchBounds& bounds = {},
                               const OptimizerConfig& config = {});

/// Exact optimum over coherent pairs for a damping rate with one negativity
/// interval. Throws UnsupportedShapeError for zero or several intervals.
MeasureResult closed_form_coherent_damping(double alpha, const DampingRateSpec& spec, double t_end = 0.0);

/// Optimum over coherent pairs for QBM. Each decrease window contributes
/// e^{-P u(t+)} - e^{-P u(t-)} with u = e^{-x} / (e^{-x} + n); P is the common
/// pair parameter |beta1 - beta2|^2 / 2, chosen in closed form for a single window
/// and by a one-dimensional search for several. Empty intervals default to the
/// Delta-negativity windows of the channel.
MeasureResult closed_form_coherent_qbm(const QbmChannel& channel, std::vector<TimeInterval> intervals = {});

/// (1/e) alpha |int over negativity of 2 x coefficient|.
double first_order_coherent(const Channel& channel);

/// first_order_coherent / (2N + 1), both states with thermal occupation N.
double first_order_coherent_thermal(double thermal, const Channel& channel);

/// 8 cosh(2r) (k - sqrt k) / k^2 with k = 3 + cos phi + cosh(4r)(1 - cos phi).
double g1_squeezed(double r, double phi);

/// dF/dx at x = 0 for squeezed vacua (r1 at angle phi, r2 at angle 0) under the
/// damping map, one-sided and Richardson extrapolated.
double g1_oracle(double r1, double r2, double phi);

/// Zeroth-order derivatives of F with respect to x and y for the map
/// cov -> e^{-x} cov + y I/2, taken along directions that stay physical.
struct SqueezedSlopes {
  double s_gamma = 0.0;
  double s_delta = 0.0;
};
SqueezedSlopes squeezed_slopes(double r1, double r2, double phi);

/// alpha g1 |int over gamma < 0 of 2 gamma|, damping channel.
double first_order_squeezed_damping(double r1, double r2, double phi, const Channel& channel);
/// alpha S_Delta |int over Delta < 0 of 2 Delta|, QBM channel.
double first_order_squeezed_qbm(double r1, double r2, double phi, const Channel& channel);

/// First-order squeezed estimate maximized over r (r1 = r2 when equal_squeeze),
/// using g1 for damping and S_Delta for QBM.
MeasureResult first_order_squeezed(const Channel& channel, double phi, const SearchBounds& bounds = {},
                                   bool equal_squeeze = true);

/// Reporting split of the first-order coefficient for a general pure pair:
/// dF/dx = S(0) dC/dx + C(0) dS/dx, S the zero-displacement fidelity and C = F / S.
struct GeneralPureFirstOrder {
  double squeeze_fidelity = 0.0;  // S(0)
  double displacement_slope = 0.0;  // dC/dx at 0
  double displacement_weight = 0.0;  // C(0)
  double squeeze_slope = 0.0;  // dS/dx at 0
  double coefficient = 0.0;  // S dC + C dS
  double value = 0.0;  // alpha coefficient |int 2 coeff over negativity|
};
GeneralPureFirstOrder first_order_general_pure(const StatePairParams& pair, const Channel& channel);

/// Dispatches on the method: numeric maximization, the coherent closed forms, or
/// the first-order estimates (coherent, coherent_thermal at fixed_thermal or 0,
/// squeezed at the configured angle). Throws UnsupportedShapeError for
/// combinations without a closed or first-order form.
MeasureResult compute_measure(Family family, const Channel& channel, MeasureMethod method,
                              const SearchBounds& bounds = {}, const OptimizerConfig& config = {});

/// Context columns of a measure record.
struct RecordContext {
  double alpha = 0.0;
  std::optional<double> temperature;
  std::optional<double> omega0;
  std::optional<double> omega_c;
};

/// family,channel,alpha,T,omega0,omega_c,value,method,param_* columns.
std::vector<std::string> measure_record_header();
std::vector<std::string> measure_record(const MeasureResult& result, const RecordContext& context);

}  // namespace gaussnm
