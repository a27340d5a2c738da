#include "gaussnm/measure.hpp"

#include "gaussnm/csv.hpp"
#include "gaussnm/errors.hpp"
#include "gaussnm/nelder_mead.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace gaussnm {

std::string to_string(Family family) {
  switch (family) {
    case Family::coherent: return "coherent";
    case Family::squeezed: return "squeezed";
    case Family::coherent_thermal: return "coherent_thermal";
    case Family::general_pure: return "general_pure";
  }
  return "?";
}

std::string to_string(MeasureMethod method) {
  switch (method) {
    case MeasureMethod::numeric_opt: return "numeric";
    case MeasureMethod::closed_form: return "closed";
    case MeasureMethod::first_order: return "first-order";
  }
  return "?";
}

Family parse_family(std::string_view name) {
  for (Family f : {Family::coherent, Family::squeezed, Family::coherent_thermal, Family::general_pure}) {
    if (name == to_string(f)) return f;
  }
  throw DomainError("unknown state family '" + std::string(name) + "'");
}

MeasureMethod parse_method(std::string_view name) {
  if (name == "numeric" || name == "numeric_opt") return MeasureMethod::numeric_opt;
  if (name == "closed" || name == "closed_form") return MeasureMethod::closed_form;
  if (name == "first-order" || name == "first_order") return MeasureMethod::first_order;
  throw DomainError("unknown method '" + std::string(name) + "'");
}

std::optional<double> MeasureResult::extra(std::string_view name) const {
  for (const NamedValue& e : extras) {
    if (e.name == name) return e.value;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// PairFidelity

namespace {

double snapped_excess(const Mat2& cov) {
  const double e = cov.determinant() - 0.25;
  const double slack = kStateTolerance * std::max(1.0, std::abs(cov(0, 0) * cov(1, 1)) + cov(0, 1) * cov(0, 1));
  return (e < 0.0 && -e <= slack) ? 0.0 : e;
}

Mat2 adjugate(const Mat2& m) {
  Mat2 a;
  a << m(1, 1), -m(0, 1), -m(1, 0), m(0, 0);
  return a;
}

}  // namespace

PairFidelity::PairFidelity(const GaussianState& a, const GaussianState& b)
    : dmean_(a.mean() - b.mean()), sum_(a.cov() + b.cov()) {
  det_sum_ = sum_.determinant();
  trace_sum_ = sum_.trace();
  trace_[0] = a.cov().trace();
  trace_[1] = b.cov().trace();
  excess_[0] = snapped_excess(a.cov());
  excess_[1] = snapped_excess(b.cov());
}

PairFidelity::PairFidelity(const StatePairParams& pair)
    : PairFidelity(make_gaussian(pair.state(0)), make_gaussian(pair.state(1))) {
  // det = (N + 1/2)^2 exactly for these states
  for (std::size_t i = 0; i < 2; ++i) excess_[i] = pair.thermal[i] * (pair.thermal[i] + 1.0);
}

double PairFidelity::operator()(const MapCoefficients& map) const {
  const double c = map.cov_scale;
  const double n = map.noise;
  // det(c S + n I) and the Heisenberg excess of c s_i + n I/2, expanded
  const double det = c * c * det_sum_ + c * n * trace_sum_ + n * n;
  if (!(det > 0.0)) throw NumericalError("singular covariance sum in fidelity evaluation");
  const double shift = 0.25 * (c * c + n * n - 1.0);
  const double e0 = c * c * excess_[0] + 0.5 * c * n * trace_[0] + shift;
  const double e1 = c * c * excess_[1] + 0.5 * c * n * trace_[1] + shift;
  double small_delta = 16.0 * e0 * e1;
  if (small_delta < 0.0) {
    if (-small_delta > 1e-12 * std::max(1.0, det)) {
      throw NumericalError("fidelity undefined: one evolved state lies below the Heisenberg bound");
    }
    small_delta = 0.0;
  }
  const double big_delta = 4.0 * det;
  const double prefactor = 2.0 * (std::sqrt(big_delta + small_delta) + std::sqrt(small_delta)) / big_delta;
  // adj(c S + n I) = c adj(S) + n I
  const double quad =
      map.mean_scale * map.mean_scale * (c * dmean_.dot(adjugate(sum_) * dmean_) + n * dmean_.squaredNorm()) / det;
  return std::sqrt(prefactor) * std::exp(-0.25 * quad);
}

// ---------------------------------------------------------------------------
// Fidelity trajectories

namespace {

// Diffs smaller than this are treated as flat (rounding noise of F near 1).
constexpr double kFlat = 1e-14;

// Precomputed map coefficients on a grid, shared by all pairs in a search.
class TrajectoryEngine {
 public:
  TrajectoryEngine(const Channel& channel, EvolutionMode mode, std::vector<double> grid)
      : channel_(channel), mode_(mode), times_(grid.empty() ? channel.grid() : std::move(grid)) {
    if (times_.empty()) throw DomainError("empty time grid");
    maps_.reserve(times_.size());
    for (double t : times_) maps_.push_back(channel_.coefficients(t, mode_));
  }

  FidelityTrajectory run(const PairFidelity& pf) const {
    FidelityTrajectory out;
    out.times = times_;
    out.fidelity.resize(times_.size());
    for (std::size_t k = 0; k < times_.size(); ++k) out.fidelity[k] = pf(maps_[k]);
    locate_intervals(pf, out);
    return out;
  }

 private:
  // Refined extremum of F on [a, b]; maximum when want_max.
  std::pair<double, double> refine(const PairFidelity& pf, double a, double b, bool want_max, double t_grid,
                                   double f_grid) const {
    auto g = [&](double t) {
      const double f = pf(channel_.coefficients(t, mode_));
      return want_max ? -f : f;
    };
    const int bits = std::numeric_limits<double>::digits / 2;
    std::uintmax_t max_iter = 200;
    const auto [t, v] = boost::math::tools::brent_find_minima(g, a, b, bits, max_iter);
    const double f = want_max ? -v : v;
    // keep the grid sample if Brent landed on a worse point
    if (want_max ? f >= f_grid : f <= f_grid) return {t, f};
    return {t_grid, f_grid};
  }

  void locate_intervals(const PairFidelity& pf, FidelityTrajectory& out) const {
    const auto& t = out.times;
    const auto& f = out.fidelity;
    const std::size_t n = t.size();
    if (n < 2) return;
    int prev = 0;
    std::size_t prev_k = 0;  // diff index carrying the previous non-flat sign
    bool open = false;
    NegativityInterval current;
    for (std::size_t k = 0; k + 1 < n; ++k) {
      const double d = f[k + 1] - f[k];
      const int s = d > kFlat ? 1 : (d < -kFlat ? -1 : 0);
      if (s == 0) continue;
      if (prev == 0 && s < 0) {
        // decreasing from the first non-flat step: F(0) is the onset
        open = true;
        current.t_plus = t[0];
        current.contribution = f[0];
      } else if (prev != 0 && s != prev) {
        // extremum between t[prev_k] and t[k + 1], the grid candidate is t[k]
        const bool is_max = prev > 0;
        const auto [te, fe] = refine(pf, t[prev_k], t[k + 1], is_max, t[k], f[k]);
        ++out.refinements;
        if (is_max) {
          open = true;
          current.t_plus = te;
          current.contribution = fe;
        } else if (open) {
          current.t_minus = te;
          current.contribution -= fe;
          out.intervals.push_back(current);
          open = false;
        }
      }
      prev = s;
      prev_k = k;
    }
    if (open) {
      current.t_minus = t[n - 1];
      current.contribution -= f[n - 1];
      out.intervals.push_back(current);
    }
  }

  const Channel& channel_;
  EvolutionMode mode_;
  std::vector<double> times_;
  std::vector<MapCoefficients> maps_;
};

}  // namespace

FidelityTrajectory fidelity_trajectory(const StatePairParams& pair, const Channel& channel, EvolutionMode mode,
                                       std::vector<double> grid) {
  return TrajectoryEngine(channel, mode, std::move(grid)).run(PairFidelity(pair));
}

double measure_from_trajectory(const FidelityTrajectory& traj) {
  double total = 0.0;
  for (const NegativityInterval& iv : traj.intervals) total += iv.contribution;
  return total;
}

// ---------------------------------------------------------------------------
// Maximization

void SearchBounds::validate() const {
  auto check = [](double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError(std::string(name) + " bound must be finite and >= 0");
  };
  check(amplitude_max, "amplitude");
  check(squeeze_max, "squeeze");
  check(thermal_max, "thermal");
}

namespace {

struct FamilyModel {
  Box box;
  std::function<StatePairParams(const std::vector<double>&)> pair;
  std::function<std::vector<NamedValue>(const std::vector<double>&)> extras;
};

// Coherent pairs sit symmetrically at +-d/2 on the real axis; only |beta1 - beta2| matters.
StatePairParams coherent_pair(double d, double thermal = 0.0) {
  StatePairParams p;
  p.amplitude = {0.5 * d, 0.5 * d};
  p.phase = {0.0, std::numbers::pi};
  p.thermal = {thermal, thermal};
  return p;
}

StatePairParams squeezed_pair(double r1, double r2, double phi) {
  StatePairParams p;
  p.squeeze = {r1, r2};
  p.squeeze_angle = {phi, 0.0};
  return p;
}

FamilyModel family_model(Family family, const SearchBounds& b, const OptimizerConfig& cfg) {
  FamilyModel m;
  const double phi = cfg.squeeze_angle;
  switch (family) {
    case Family::coherent:
      m.box = {{0.0}, {2.0 * b.amplitude_max}};
      m.pair = [](const std::vector<double>& v) { return coherent_pair(v[0]); };
      m.extras = [](const std::vector<double>& v) {
        return std::vector<NamedValue>{{"K", 0.5 * v[0] * v[0]}};
      };
      break;
    case Family::squeezed:
      if (!(phi > 0.0 && phi <= std::numbers::pi)) throw DomainError("squeeze angle must lie in (0, pi]");
      if (cfg.equal_squeeze) {
        m.box = {{0.0}, {b.squeeze_max}};
        m.pair = [phi](const std::vector<double>& v) { return squeezed_pair(v[0], v[0], phi); };
        m.extras = [phi](const std::vector<double>& v) {
          return std::vector<NamedValue>{{"r1", v[0]}, {"r2", v[0]}, {"phi", phi}};
        };
      } else {
        m.box = {{0.0, 0.0}, {b.squeeze_max, b.squeeze_max}};
        m.pair = [phi](const std::vector<double>& v) { return squeezed_pair(v[0], v[1], phi); };
        m.extras = [phi](const std::vector<double>& v) {
          return std::vector<NamedValue>{{"r1", v[0]}, {"r2", v[1]}, {"phi", phi}};
        };
      }
      break;
    case Family::coherent_thermal:
      if (cfg.fixed_thermal) {
        const double n = *cfg.fixed_thermal;
        if (!(n >= 0.0)) throw DomainError("fixed thermal occupation must be >= 0");
        m.box = {{0.0}, {2.0 * b.amplitude_max}};
        m.pair = [n](const std::vector<double>& v) { return coherent_pair(v[0], n); };
        m.extras = [n](const std::vector<double>& v) {
          return std::vector<NamedValue>{{"K", 0.5 * v[0] * v[0]}, {"N", n}};
        };
      } else {
        m.box = {{0.0, 0.0}, {2.0 * b.amplitude_max, b.thermal_max}};
        m.pair = [](const std::vector<double>& v) { return coherent_pair(v[0], v[1]); };
        m.extras = [](const std::vector<double>& v) {
          return std::vector<NamedValue>{{"K", 0.5 * v[0] * v[0]}, {"N", v[1]}};
        };
      }
      break;
    case Family::general_pure:
      // state 1 displaced by |beta| e^{i theta} and squeezed along phi; state 2 squeezed vacuum along 0
      m.box = {{0.0, 0.0, 0.0, 0.0, 0.0},
               {b.amplitude_max, 2.0 * std::numbers::pi, b.squeeze_max, b.squeeze_max, std::numbers::pi}};
      m.pair = [](const std::vector<double>& v) {
        StatePairParams p = squeezed_pair(v[2], v[3], v[4]);
        p.amplitude = {v[0], 0.0};
        p.phase = {v[1], 0.0};
        return p;
      };
      m.extras = [](const std::vector<double>& v) {
        return std::vector<NamedValue>{{"beta", v[0]}, {"theta", v[1]}, {"r1", v[2]}, {"r2", v[3]}, {"phi", v[4]}};
      };
      break;
  }
  return m;
}

}  // namespace

MeasureResult maximize_measure(Family family, const Channel& channel, const SearchBounds& bounds,
                               const OptimizerConfig& config) {
  bounds.validate();
  const FamilyModel model = family_model(family, bounds, config);
  const TrajectoryEngine engine(channel, config.mode, {});

  const Objective objective = [&](const std::vector<double>& v) {
    return -measure_from_trajectory(engine.run(PairFidelity(model.pair(v))));
  };
  MultiStartOptions opts;
  opts.grid_points = config.grid_points;
  opts.starts = config.starts;
  opts.local.tolerance = config.tolerance;
  opts.local.max_iterations = config.max_iterations;
  opts.threads = config.threads;
  const MultiStartResult best = multistart_minimize(objective, model.box, opts);

  MeasureResult res;
  res.family = family;
  res.channel = channel.name();
  res.method = MeasureMethod::numeric_opt;
  res.argmax = model.pair(best.x);
  const FidelityTrajectory traj = engine.run(PairFidelity(res.argmax));
  res.intervals = traj.intervals;
  res.value = measure_from_trajectory(traj);
  res.extras = model.extras(best.x);
  res.diagnostics.evaluations = best.evaluations;
  res.diagnostics.iterations = best.iterations;
  res.diagnostics.restarts = best.restarts;
  res.diagnostics.converged = best.converged;
  res.diagnostics.refinements = traj.refinements;
  res.diagnostics.stagnated = best.stagnated;
  if (best.stagnated) res.diagnostics.note = "no local search improved on the coarse grid";
  return res;
}

// ---------------------------------------------------------------------------
// Closed forms and first-order expansions

namespace {

MeasureResult coherent_result(Family family, std::string channel, MeasureMethod method, double value, double k) {
  MeasureResult res;
  res.family = family;
  res.channel = std::move(channel);
  res.method = method;
  res.value = value;
  res.argmax = coherent_pair(std::sqrt(2.0 * std::max(k, 0.0)));
  res.extras = {{"K", k}};
  return res;
}

}  // namespace

MeasureResult closed_form_coherent_damping(double alpha, const DampingRateSpec& spec, double t_end) {
  spec.validate();
  if (!(alpha > 0.0)) throw DomainError("alpha must be > 0");
  if (t_end <= 0.0) t_end = spec.default_t_end();
  const auto intervals = rate_negative_intervals(spec, t_end);
  if (intervals.size() != 1) {
    throw UnsupportedShapeError("the closed form needs exactly one negativity interval of the rate, found " +
                                std::to_string(intervals.size()) + "; use the numeric method");
  }
  const TimeInterval iv = intervals.front();
  const double xp = damping_x(iv.begin, alpha, spec);
  const double xm = damping_x(iv.end, alpha, spec);
  double k = 0.0;
  double value = 0.0;
  if (std::abs(xp - xm) < 1e-14 * std::max(1.0, std::abs(xp))) {
    k = std::exp(xp);  // limit of the ratio, no net backflow
  } else {
    k = (xm - xp) / (std::exp(-xp) - std::exp(-xm));
    value = std::exp(-k * std::exp(-xp)) - std::exp(-k * std::exp(-xm));
  }
  MeasureResult res = coherent_result(Family::coherent, "damping", MeasureMethod::closed_form, value, k);
  res.intervals = {{iv.begin, iv.end, value}};
  return res;
}

MeasureResult closed_form_coherent_qbm(const QbmChannel& channel, std::vector<TimeInterval> intervals) {
  if (intervals.empty()) intervals = channel.backflow_intervals();
  struct Window {
    TimeInterval iv;
    double u_plus;
    double u_minus;
  };
  std::vector<Window> windows;
  auto u_at = [&](double t) {
    const MapCoefficients m = channel.coefficients(t, EvolutionMode::exact);
    const double denom = m.cov_scale + m.noise;
    if (!(denom > 0.0)) throw DomainError("coefficient table is unphysical: y <= -e^{-x} inside a window");
    return m.cov_scale / denom;
  };
  for (const TimeInterval& iv : intervals) windows.push_back({iv, u_at(iv.begin), u_at(iv.end)});

  auto total = [&](double p) {
    double s = 0.0;
    for (const Window& w : windows) s += std::exp(-p * w.u_plus) - std::exp(-p * w.u_minus);
    return s;
  };

  double p = 0.0;
  if (windows.empty()) {
    p = 1.0;
  } else if (windows.size() == 1) {
    const Window& w = windows.front();
    p = std::abs(w.u_minus - w.u_plus) < 1e-15 ? 1.0 / w.u_plus
                                                 : std::log(w.u_plus / w.u_minus) / (w.u_plus - w.u_minus);
  } else {
    // scan for the best bracket, then polish with Brent
    double u_min = windows.front().u_plus;
    for (const Window& w : windows) u_min = std::min({u_min, w.u_plus, w.u_minus});
    const double p_max = 10.0 / u_min;
    const int samples = 400;
    int best = 1;
    for (int i = 1; i <= samples; ++i) {
      if (total(p_max * i / samples) > total(p_max * best / samples)) best = i;
    }
    const double lo = p_max * (best - 1) / samples;
    const double hi = p_max * std::min(best + 1, samples) / samples;
    std::uintmax_t it = 200;
    p = boost::math::tools::brent_find_minima([&](double q) { return -total(q); }, lo, hi,
                                              std::numeric_limits<double>::digits / 2, it)
            .first;
  }
  const double value = windows.empty() ? 0.0 : total(p);
  MeasureResult res = coherent_result(Family::coherent, "qbm", MeasureMethod::closed_form, value, p);
  for (const Window& w : windows) {
    res.intervals.push_back({w.iv.begin, w.iv.end, std::exp(-p * w.u_plus) - std::exp(-p * w.u_minus)});
  }
  if (windows.size() > 1) res.diagnostics.note = "common pair parameter optimized over several windows";
  return res;
}

double first_order_coherent(const Channel& channel) {
  return channel.alpha() * std::abs(channel.negative_integral()) / std::numbers::e;
}

double first_order_coherent_thermal(double thermal, const Channel& channel) {
  if (!(thermal >= 0.0) || !std::isfinite(thermal)) throw DomainError("thermal occupation must be finite and >= 0");
  return first_order_coherent(channel) / (2.0 * thermal + 1.0);
}

double g1_squeezed(double r, double phi) {
  if (!(r >= 0.0)) throw DomainError("r must be >= 0");
  const double k = 3.0 + std::cos(phi) + std::cosh(4.0 * r) * (1.0 - std::cos(phi));
  return 8.0 * std::cosh(2.0 * r) * (k - std::sqrt(k)) / (k * k);
}

namespace {

constexpr double kSlopeStep = 1e-6;

// One-sided derivative at 0 of f(h), Richardson-combined: 2 D(h/2) - D(h).
template <class F>
double forward_slope(F&& f) {
  const double f0 = f(0.0);
  const double h = kSlopeStep;
  const double d_full = (f(h) - f0) / h;
  const double d_half = (f(0.5 * h) - f0) / (0.5 * h);
  return 2.0 * d_half - d_full;
}

MapCoefficients damping_step(double x) { return {std::exp(-0.5 * x), std::exp(-x), -std::expm1(-x), x}; }

double damping_slope(const PairFidelity& pf) {
  return forward_slope([&](double h) { return pf(damping_step(h)); });
}

double diffusion_slope(const PairFidelity& pf) {
  return forward_slope([&](double h) { return pf(MapCoefficients{1.0, 1.0, h, 0.0}); });
}

}  // namespace

double g1_oracle(double r1, double r2, double phi) {
  return damping_slope(PairFidelity(squeezed_pair(r1, r2, phi)));
}

SqueezedSlopes squeezed_slopes(double r1, double r2, double phi) {
  const PairFidelity pf(squeezed_pair(r1, r2, phi));
  SqueezedSlopes s;
  s.s_delta = diffusion_slope(pf);
  // the x direction alone leaves the physical cone for pure states; take it as
  // the damping direction (dx = dy) minus the pure diffusion direction
  s.s_gamma = damping_slope(pf) - s.s_delta;
  return s;
}

double first_order_squeezed_damping(double r1, double r2, double phi, const Channel& channel) {
  return channel.alpha() * g1_oracle(r1, r2, phi) * std::abs(channel.negative_integral());
}

double first_order_squeezed_qbm(double r1, double r2, double phi, const Channel& channel) {
  return channel.alpha() * squeezed_slopes(r1, r2, phi).s_delta * std::abs(channel.negative_integral());
}

MeasureResult first_order_squeezed(const Channel& channel, double phi, const SearchBounds& bounds,
                                   bool equal_squeeze) {
  bounds.validate();
  const bool damping = channel.name() == "damping";
  auto slope = [&](double r1, double r2) {
    return damping ? g1_oracle(r1, r2, phi) : squeezed_slopes(r1, r2, phi).s_delta;
  };
  Box box = equal_squeeze ? Box{{0.0}, {bounds.squeeze_max}} : Box{{0.0, 0.0}, {bounds.squeeze_max, bounds.squeeze_max}};
  const Objective objective = [&](const std::vector<double>& v) {
    return -slope(v[0], equal_squeeze ? v[0] : v[1]);
  };
  MultiStartOptions opts;
  opts.grid_points = equal_squeeze ? 25 : 13;
  opts.local.tolerance = 1e-8;
  const MultiStartResult best = multistart_minimize(objective, box, opts);
  const double r1 = best.x[0];
  const double r2 = equal_squeeze ? best.x[0] : best.x[1];

  MeasureResult res;
  res.family = Family::squeezed;
  res.channel = channel.name();
  res.method = MeasureMethod::first_order;
  res.value = channel.alpha() * (-best.value) * std::abs(channel.negative_integral());
  res.argmax = squeezed_pair(r1, r2, phi);
  res.extras = {{"r1", r1}, {"r2", r2}, {"phi", phi}, {damping ? "g1" : "S_delta", -best.value}};
  res.diagnostics.evaluations = best.evaluations;
  res.diagnostics.iterations = best.iterations;
  res.diagnostics.restarts = best.restarts;
  res.diagnostics.converged = best.converged;
  res.diagnostics.stagnated = best.stagnated;
  return res;
}

GeneralPureFirstOrder first_order_general_pure(const StatePairParams& pair, const Channel& channel) {
  StatePairParams bare = pair;
  bare.amplitude = {0.0, 0.0};
  const PairFidelity full(pair);
  const PairFidelity squeeze(bare);
  GeneralPureFirstOrder out;
  out.squeeze_fidelity = squeeze.initial();
  out.displacement_weight = full.initial() / out.squeeze_fidelity;
  out.squeeze_slope = damping_slope(squeeze);
  const double full_slope = damping_slope(full);
  // F = C S  =>  dC = (dF - C dS) / S
  out.displacement_slope = (full_slope - out.displacement_weight * out.squeeze_slope) / out.squeeze_fidelity;
  out.coefficient = out.squeeze_fidelity * out.displacement_slope + out.displacement_weight * out.squeeze_slope;
  out.value = channel.alpha() * out.coefficient * std::abs(channel.negative_integral());
  return out;
}

MeasureResult compute_measure(Family family, const Channel& channel, MeasureMethod method,
                              const SearchBounds& bounds, const OptimizerConfig& config) {
  switch (method) {
    case MeasureMethod::numeric_opt:
      return maximize_measure(family, channel, bounds, config);
    case MeasureMethod::closed_form:
      if (family != Family::coherent) {
        throw UnsupportedShapeError("closed forms exist for the coherent family only; use the numeric method");
      }
      if (const auto* d = dynamic_cast<const DampingChannel*>(&channel)) {
        return closed_form_coherent_damping(d->alpha(), d->spec(), d->t_end());
      }
      if (const auto* q = dynamic_cast<const QbmChannel*>(&channel)) return closed_form_coherent_qbm(*q);
      throw UnsupportedShapeError("no closed form for channel " + channel.name());
    case MeasureMethod::first_order:
      switch (family) {
        case Family::coherent:
          return coherent_result(family, channel.name(), method, first_order_coherent(channel), 1.0);
        case Family::coherent_thermal: {
          const double n = config.fixed_thermal.value_or(0.0);
          MeasureResult res =
              coherent_result(family, channel.name(), method, first_order_coherent_thermal(n, channel), 1.0);
          res.argmax.thermal = {n, n};
          res.extras.push_back({"N", n});
          return res;
        }
        case Family::squeezed:
          return first_order_squeezed(channel, config.squeeze_angle, bounds, config.equal_squeeze);
        case Family::general_pure:
          throw UnsupportedShapeError("the general pure first-order split is reporting-only; use the numeric method");
      }
  }
  throw UnsupportedShapeError("unsupported method");
}

// ---------------------------------------------------------------------------
// Records

std::vector<std::string> measure_record_header() {
  return {"family",       "channel",     "alpha",       "T",           "omega0",    "omega_c",   "value",
          "method",       "param_beta1", "param_beta2", "param_theta1", "param_theta2", "param_r1", "param_r2",
          "param_phi1",   "param_phi2",  "param_N1",    "param_N2",    "param_K"};
}

std::vector<std::string> measure_record(const MeasureResult& r, const RecordContext& ctx) {
  auto opt = [](const std::optional<double>& v) { return v ? csv::number(*v) : std::string(); };
  const StatePairParams& p = r.argmax;
  return {to_string(r.family),
          r.channel,
          csv::number(ctx.alpha),
          opt(ctx.temperature),
          opt(ctx.omega0),
          opt(ctx.omega_c),
          csv::number(r.value),
          to_string(r.method),
          csv::number(p.amplitude[0]),
          csv::number(p.amplitude[1]),
          csv::number(p.phase[0]),
          csv::number(p.phase[1]),
          csv::number(p.squeeze[0]),
          csv::number(p.squeeze[1]),
          csv::number(p.squeeze_angle[0]),
          csv::number(p.squeeze_angle[1]),
          csv::number(p.thermal[0]),
          csv::number(p.thermal[1]),
          opt(r.extra("K"))};
}

}  // namespace gaussnm
