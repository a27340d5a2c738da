#include "gaussnm/gaussian_state.hpp"

#include "gaussnm/errors.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace gaussnm {

namespace {

// det is formed from products of entries, so its rounding error scales with them.
double det_slack(const Mat2& cov) {
  const double scale = std::abs(cov(0, 0) * cov(1, 1)) + cov(0, 1) * cov(0, 1);
  return kStateTolerance * std::max(1.0, scale);
}

// det - 1/4, with rounding-level negatives snapped to zero.
double heisenberg_excess(const GaussianState& s) {
  const double excess = s.det() - 0.25;
  if (excess < 0.0 && -excess <= det_slack(s.cov())) return 0.0;
  return excess;
}

}  // namespace

StatePairParams StatePairParams::from_states(const SingleModeParams& a, const SingleModeParams& b) {
  StatePairParams p;
  p.thermal = {a.thermal, b.thermal};
  p.squeeze = {a.squeeze, b.squeeze};
  p.squeeze_angle = {a.squeeze_angle, b.squeeze_angle};
  p.amplitude = {a.amplitude, b.amplitude};
  p.phase = {a.phase, b.phase};
  return p;
}

Mat2 GaussianState::checked_symmetric(const Mat2& cov) {
  if (!cov.allFinite()) throw DomainError("covariance matrix has non-finite entries");
  const double asym = std::abs(cov(0, 1) - cov(1, 0));
  if (asym > kStateTolerance * std::max(1.0, cov.cwiseAbs().maxCoeff())) {
    throw DomainError("covariance matrix is not symmetric (|s12 - s21| = " + std::to_string(asym) + ")");
  }
  Mat2 sym = cov;
  sym(0, 1) = sym(1, 0) = 0.5 * (cov(0, 1) + cov(1, 0));
  if (sym(0, 0) <= 0.0 || sym.determinant() <= 0.0) {
    throw DomainError("covariance matrix is not positive definite");
  }
  return sym;
}

GaussianState GaussianState::from_moments(const Vec2& mean, const Mat2& cov) {
  if (!mean.allFinite()) throw DomainError("first moments are not finite");
  GaussianState s(mean, checked_symmetric(cov));
  if (!s.is_physical()) {
    throw DomainError("covariance violates the Heisenberg bound: det = " + std::to_string(s.det()));
  }
  return s;
}

GaussianState GaussianState::approximate(const Vec2& mean, const Mat2& cov) {
  if (!mean.allFinite()) throw DomainError("first moments are not finite");
  return {mean, checked_symmetric(cov)};
}

bool GaussianState::is_physical() const { return det() >= 0.25 - det_slack(cov_); }

GaussianState GaussianState::rotated(double angle) const {
  const Mat2 rot = rotation(angle);
  Mat2 cov = rot * cov_ * rot.transpose();
  cov(0, 1) = cov(1, 0) = 0.5 * (cov(0, 1) + cov(1, 0));
  return {rot * mean_, cov};
}

Mat2 rotation(double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Mat2 r;
  r << c, -s, s, c;
  return r;
}

GaussianState make_gaussian(const SingleModeParams& p) {
  if (!(p.thermal >= 0.0) || !std::isfinite(p.thermal)) {
    throw DomainError("thermal occupation N must be finite and >= 0");
  }
  if (!(p.squeeze >= 0.0) || !std::isfinite(p.squeeze)) {
    throw DomainError("squeezing r must be finite and >= 0");
  }
  if (!(p.amplitude >= 0.0) || !std::isfinite(p.amplitude)) {
    throw DomainError("displacement magnitude |beta| must be finite and >= 0");
  }
  if (!std::isfinite(p.squeeze_angle) || !std::isfinite(p.phase)) {
    throw DomainError("angles must be finite");
  }
  // (N + 1/2) R(phi/2) diag(e^{-2r}, e^{2r}) R(phi/2)^T, written out entrywise.
  // cosh 2r - sinh 2r cancels badly for large r, so use the exponentials directly.
  const double nu = p.thermal + 0.5;
  const double lo = std::exp(-2.0 * p.squeeze);
  const double hi = std::exp(2.0 * p.squeeze);
  const double c2 = std::pow(std::cos(0.5 * p.squeeze_angle), 2);
  const double s2 = std::pow(std::sin(0.5 * p.squeeze_angle), 2);
  Mat2 cov;
  cov(0, 0) = nu * (lo * c2 + hi * s2);
  cov(1, 1) = nu * (lo * s2 + hi * c2);
  cov(0, 1) = cov(1, 0) = -nu * std::sinh(2.0 * p.squeeze) * std::sin(p.squeeze_angle);
  const std::complex<double> beta = p.beta();
  const Vec2 mean(std::sqrt(2.0) * beta.real(), std::sqrt(2.0) * beta.imag());
  return GaussianState::from_moments(mean, cov);
}

FidelityTerms fidelity_terms(const GaussianState& a, const GaussianState& b) {
  const Mat2 sum = a.cov() + b.cov();
  const double det_sum = sum.determinant();
  if (!(det_sum > 0.0) || !std::isfinite(det_sum)) {
    throw NumericalError("singular covariance sum in fidelity evaluation");
  }
  const double big_delta = 4.0 * det_sum;
  double small_delta = 16.0 * heisenberg_excess(a) * heisenberg_excess(b);
  if (small_delta < 0.0) {
    throw NumericalError("fidelity undefined: exactly one state lies below the Heisenberg bound");
  }
  // 2 / (sqrt(D + d) - sqrt(d)) rationalised to avoid cancellation for mixed states.
  const double prefactor = 2.0 * (std::sqrt(big_delta + small_delta) + std::sqrt(small_delta)) / big_delta;

  const Vec2 d = a.mean() - b.mean();
  Mat2 adj;
  adj << sum(1, 1), -sum(0, 1), -sum(1, 0), sum(0, 0);
  const double quad = d.dot(adj * d) / det_sum;
  return {big_delta, small_delta, prefactor, -0.5 * quad};
}

double fidelity(const GaussianState& a, const GaussianState& b) {
  const FidelityTerms t = fidelity_terms(a, b);
  const double f = std::sqrt(t.prefactor) * std::exp(0.5 * t.exponent);
  if (!std::isfinite(f)) throw NumericalError("non-finite fidelity");
  return f;
}

double bures_distance(const GaussianState& a, const GaussianState& b) {
  const double f = fidelity(a, b);
  // F carries a few ulps of round-off; without this identical states sit at ~1e-8
  if (f > 1.0 - 8.0 * std::numeric_limits<double>::epsilon()) return 0.0;
  return std::sqrt(std::max(0.0, 2.0 - 2.0 * std::sqrt(f)));
}

}  // namespace gaussnm
