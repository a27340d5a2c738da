#include "gaussnm/channels.hpp"

#include "gaussnm/csv.hpp"
#include "gaussnm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

namespace gaussnm {

namespace {

constexpr double kDecay = 0.1;                        // e^{-t/10} envelope of the example rate
constexpr double kSwitch = 2.5 * std::numbers::pi;    // example rate turns constant here

// int_0^t e^{-s/10} sin s ds
double example_antiderivative(double t) {
  return (1.0 - std::exp(-kDecay * t) * (kDecay * std::sin(t) + std::cos(t))) / (1.0 + kDecay * kDecay);
}

double example_tail_rate() { return 0.5 * std::exp(-std::numbers::pi / 4.0); }

void require_time(double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("time must be finite and >= 0");
}

void check_window(double t, double t_end) {
  if (!(t >= 0.0) || t > t_end * (1.0 + 1e-12)) {
    throw RangeError("time " + std::to_string(t) + " outside the channel window [0, " + std::to_string(t_end) + "]");
  }
}

// Index i of the cell [times[i], times[i+1]] containing t.
std::size_t cell_of(const std::vector<double>& times, double t) {
  auto it = std::upper_bound(times.begin(), times.end(), t);
  std::size_t i = it == times.begin() ? 0 : static_cast<std::size_t>(it - times.begin()) - 1;
  return std::min(i, times.size() - 2);
}

// int_0^t of the piecewise-linear table.
double table_integral(const DampingRateSpec& spec, double t) {
  const auto& ts = spec.table_times;
  const auto& rs = spec.table_rates;
  if (t > ts.back() * (1.0 + 1e-12)) throw RangeError("time beyond the rate table");
  double total = 0.0;
  for (std::size_t i = 1; i < ts.size() && ts[i - 1] < t; ++i) {
    const double hi = std::min(t, ts[i]);
    const double h = ts[i] - ts[i - 1];
    const double frac = (hi - ts[i - 1]) / h;
    const double r_hi = rs[i - 1] + frac * (rs[i] - rs[i - 1]);
    total += 0.5 * (hi - ts[i - 1]) * (rs[i - 1] + r_hi);
  }
  return total;
}

double hermite(double s, double h, double f0, double f1, double d0, double d1) {
  const double s2 = s * s;
  const double s3 = s2 * s;
  return (2.0 * s3 - 3.0 * s2 + 1.0) * f0 + (s3 - 2.0 * s2 + s) * h * d0 + (-2.0 * s3 + 3.0 * s2) * f1 +
         (s3 - s2) * h * d1;
}

}  // namespace

DampingRateSpec DampingRateSpec::constant(double gamma0) {
  DampingRateSpec s;
  s.kind = Kind::constant;
  s.gamma0 = gamma0;
  s.validate();
  return s;
}

DampingRateSpec DampingRateSpec::table(std::vector<double> times, std::vector<double> rates) {
  DampingRateSpec s;
  s.kind = Kind::user_table;
  s.table_times = std::move(times);
  s.table_rates = std::move(rates);
  s.validate();
  return s;
}

void DampingRateSpec::validate() const {
  switch (kind) {
    case Kind::paper_example:
      return;
    case Kind::constant:
      if (!std::isfinite(gamma0)) throw DomainError("gamma0 must be finite");
      return;
    case Kind::user_table:
      if (table_times.size() < 2 || table_times.size() != table_rates.size()) {
        throw DomainError("rate table needs at least two (t, gamma) samples of equal length");
      }
      if (table_times.front() != 0.0) throw DomainError("rate table must start at t = 0");
      for (std::size_t i = 0; i < table_times.size(); ++i) {
        if (!std::isfinite(table_rates[i])) throw DomainError("rate table holds a non-finite rate");
        if (i > 0 && !(table_times[i] > table_times[i - 1])) {
          throw DomainError("rate table times must be strictly increasing");
        }
      }
      return;
  }
}

double DampingRateSpec::default_t_end() const {
  if (kind == Kind::user_table) return table_times.back();
  return 4.0 * std::numbers::pi;
}

double damping_rate(double t, const DampingRateSpec& spec) {
  require_time(t);
  switch (spec.kind) {
    case DampingRateSpec::Kind::paper_example:
      return t < kSwitch ? 0.5 * std::exp(-kDecay * t) * std::sin(t) : example_tail_rate();
    case DampingRateSpec::Kind::constant:
      return spec.gamma0;
    case DampingRateSpec::Kind::user_table: {
      const auto& ts = spec.table_times;
      if (t > ts.back() * (1.0 + 1e-12)) throw RangeError("time beyond the rate table");
      const std::size_t i = cell_of(ts, t);
      const double frac = (t - ts[i]) / (ts[i + 1] - ts[i]);
      return spec.table_rates[i] + frac * (spec.table_rates[i + 1] - spec.table_rates[i]);
    }
  }
  return 0.0;
}

double damping_x(double t, double alpha, const DampingRateSpec& spec) {
  require_time(t);
  switch (spec.kind) {
    case DampingRateSpec::Kind::paper_example:
      // 2 alpha * (1/2) int e^{-s/10} sin s
      if (t < kSwitch) return alpha * example_antiderivative(t);
      return alpha * (example_antiderivative(kSwitch) + 2.0 * example_tail_rate() * (t - kSwitch));
    case DampingRateSpec::Kind::constant:
      return 2.0 * alpha * spec.gamma0 * t;
    case DampingRateSpec::Kind::user_table:
      return 2.0 * alpha * table_integral(spec, t);
  }
  return 0.0;
}

std::vector<TimeInterval> rate_negative_intervals(const DampingRateSpec& spec, double t_end) {
  require_time(t_end);
  switch (spec.kind) {
    case DampingRateSpec::Kind::paper_example: {
      const double pi = std::numbers::pi;
      if (t_end <= pi) return {};
      return {{pi, std::min(t_end, 2.0 * pi)}};
    }
    case DampingRateSpec::Kind::constant:
      if (spec.gamma0 < 0.0 && t_end > 0.0) return {{0.0, t_end}};
      return {};
    case DampingRateSpec::Kind::user_table: {
      std::vector<double> ts;
      std::vector<double> rs;
      for (std::size_t i = 0; i < spec.table_times.size() && spec.table_times[i] <= t_end; ++i) {
        ts.push_back(spec.table_times[i]);
        rs.push_back(spec.table_rates[i]);
      }
      return negative_intervals(ts, rs);
    }
  }
  return {};
}

double rate_negative_integral(const DampingRateSpec& spec, double t_end) {
  require_time(t_end);
  switch (spec.kind) {
    case DampingRateSpec::Kind::paper_example: {
      double total = 0.0;
      for (const TimeInterval& iv : rate_negative_intervals(spec, t_end)) {
        total += example_antiderivative(iv.end) - example_antiderivative(iv.begin);
      }
      return total;
    }
    case DampingRateSpec::Kind::constant:
      return spec.gamma0 < 0.0 ? 2.0 * spec.gamma0 * t_end : 0.0;
    case DampingRateSpec::Kind::user_table: {
      std::vector<double> ts;
      std::vector<double> rs;
      for (std::size_t i = 0; i < spec.table_times.size() && spec.table_times[i] <= t_end; ++i) {
        ts.push_back(spec.table_times[i]);
        rs.push_back(spec.table_rates[i]);
      }
      return 2.0 * negative_part_integral(ts, rs);
    }
  }
  return 0.0;
}

GaussianState apply_map(const GaussianState& state, const MapCoefficients& map) {
  Mat2 cov = map.cov_scale * state.cov();
  cov.diagonal().array() += 0.5 * map.noise;
  return GaussianState::approximate(map.mean_scale * state.mean(), cov);
}

EvolvedState Channel::evolve(const GaussianState& state, double t, EvolutionMode mode) const {
  const MapCoefficients map = coefficients(t, mode);
  GaussianState out = apply_map(state, map);
  const bool physical = out.is_physical();
  return {std::move(out), mode == EvolutionMode::first_order && std::abs(map.x) > kFirstOrderLimit, physical};
}

DampingChannel::DampingChannel(DampingRateSpec spec, double alpha, double t_end, std::size_t n_steps)
    : spec_(std::move(spec)), alpha_(alpha), t_end_(t_end > 0.0 ? t_end : spec_.default_t_end()), n_steps_(n_steps) {
  spec_.validate();
  if (!(alpha_ > 0.0) || !std::isfinite(alpha_)) throw DomainError("alpha must be finite and > 0");
  if (!std::isfinite(t_end_)) throw DomainError("t_end must be finite");
  if (n_steps_ < 2) throw DomainError("n_steps must be >= 2");
  if (spec_.kind == DampingRateSpec::Kind::user_table && t_end_ > spec_.table_times.back() * (1.0 + 1e-12)) {
    throw DomainError("t_end extends beyond the rate table");
  }
}

MapCoefficients DampingChannel::coefficients(double t, EvolutionMode mode) const {
  check_window(t, t_end_);
  const double x = damping_x(std::min(t, t_end_), alpha_, spec_);
  if (mode == EvolutionMode::exact) return {std::exp(-0.5 * x), std::exp(-x), -std::expm1(-x), x};
  return {1.0 - 0.5 * x, 1.0 - x, x, x};
}

std::vector<double> DampingChannel::grid() const {
  std::vector<double> t(n_steps_ + 1);
  for (std::size_t i = 0; i <= n_steps_; ++i) t[i] = t_end_ * static_cast<double>(i) / static_cast<double>(n_steps_);
  return t;
}

std::vector<TimeInterval> DampingChannel::backflow_intervals() const { return rate_negative_intervals(spec_, t_end_); }

double DampingChannel::negative_integral() const { return rate_negative_integral(spec_, t_end_); }

std::shared_ptr<const Channel> DampingChannel::with_alpha(double alpha) const {
  return std::make_shared<DampingChannel>(spec_, alpha, t_end_, n_steps_);
}

double noise_scale(NoiseConvention convention) { return convention == NoiseConvention::coth ? 2.0 : 1.0; }

QbmChannel::QbmChannel(ChannelCoefficients coeffs, NoiseConvention convention)
    : coeffs_(std::move(coeffs)), convention_(convention), scale_(noise_scale(convention)) {
  coeffs_.validate();
  // d/dt (e^x n) = 2 s alpha e^x Delta, so n = 2 s alpha e^{-x} int e^{x} Delta.
  const std::size_t n = coeffs_.size();
  std::vector<double> weighted(n);
  for (std::size_t i = 0; i < n; ++i) weighted[i] = std::exp(coeffs_.x[i]) * coeffs_.delta[i];
  noise_ = cumulative_simpson(weighted, coeffs_.step());
  for (std::size_t i = 0; i < n; ++i) noise_[i] *= scale_ * 2.0 * coeffs_.alpha * std::exp(-coeffs_.x[i]);
}

MapCoefficients QbmChannel::coefficients(double t, EvolutionMode mode) const {
  const auto& ts = coeffs_.times;
  check_window(t, ts.back());
  const std::size_t i = cell_of(ts, t);
  const double h = ts[i + 1] - ts[i];
  const double s = std::clamp((t - ts[i]) / h, 0.0, 1.0);
  const double two_a = 2.0 * coeffs_.alpha;
  const double dx0 = two_a * coeffs_.gamma[i];
  const double dx1 = two_a * coeffs_.gamma[i + 1];
  const double x = hermite(s, h, coeffs_.x[i], coeffs_.x[i + 1], dx0, dx1);
  const double dy0 = scale_ * two_a * coeffs_.delta[i];
  const double dy1 = scale_ * two_a * coeffs_.delta[i + 1];
  if (mode == EvolutionMode::exact) {
    const double dn0 = -dx0 * noise_[i] + dy0;
    const double dn1 = -dx1 * noise_[i + 1] + dy1;
    const double noise = hermite(s, h, noise_[i], noise_[i + 1], dn0, dn1);
    return {std::exp(-0.5 * x), std::exp(-x), noise, x};
  }
  const double y = scale_ * hermite(s, h, coeffs_.y[i], coeffs_.y[i + 1], dy0 / scale_, dy1 / scale_);
  return {1.0 - 0.5 * x, 1.0 - x, y, x};
}

std::vector<TimeInterval> QbmChannel::backflow_intervals() const {
  return negative_intervals(coeffs_.times, coeffs_.delta);
}

std::vector<TimeInterval> QbmChannel::divisibility_violations() const {
  std::vector<double> margin(coeffs_.size());
  for (std::size_t i = 0; i < margin.size(); ++i) margin[i] = scale_ * coeffs_.delta[i] - std::abs(coeffs_.gamma[i]);
  return negative_intervals(coeffs_.times, margin);
}

double QbmChannel::negative_integral() const {
  // the first-order noise is 2 s alpha int Delta; its Hermite interpolant is fourth-order accurate
  double total = 0.0;
  for (const TimeInterval& iv : backflow_intervals()) {
    total += coefficients(iv.end, EvolutionMode::first_order).noise -
             coefficients(iv.begin, EvolutionMode::first_order).noise;
  }
  return total / coeffs_.alpha;
}

std::shared_ptr<const Channel> QbmChannel::with_alpha(double alpha) const {
  return std::make_shared<QbmChannel>(coeffs_.with_alpha(alpha), convention_);
}

std::pair<Trajectory, Trajectory> trajectory(const StatePairParams& pair, const Channel& channel,
                                             EvolutionMode mode, std::vector<double> grid) {
  if (grid.empty()) grid = channel.grid();
  std::pair<Trajectory, Trajectory> out;
  Trajectory* both[] = {&out.first, &out.second};
  for (std::size_t k = 0; k < 2; ++k) {
    Trajectory& tr = *both[k];
    tr.times = grid;
    tr.channel = channel.name();
    tr.initial = pair.state(k);
    const GaussianState initial = make_gaussian(tr.initial);
    tr.min_det = initial.det();
    tr.states.reserve(grid.size());
    for (double t : grid) {
      EvolvedState e = channel.evolve(initial, t, mode);
      tr.first_order_breakdown = tr.first_order_breakdown || e.first_order_breakdown;
      tr.min_det = std::min(tr.min_det, e.state.det());
      tr.states.push_back(std::move(e.state));
    }
  }
  return out;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  csv::write_row(out, {"t", "mean_q", "mean_p", "cov_qq", "cov_qp", "cov_pp"});
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    const GaussianState& s = traj.states[i];
    csv::write_row(out, {csv::number(traj.times[i]), csv::number(s.mean()(0)), csv::number(s.mean()(1)),
                         csv::number(s.cov()(0, 0)), csv::number(s.cov()(0, 1)), csv::number(s.cov()(1, 1))});
  }
}

}  // namespace gaussnm
