#pragma once

#include <Eigen/Dense>

#include <array>
#include <complex>

namespace gaussnm {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Slack on the symmetry and Heisenberg checks, relative to the size of the
/// covariance entries (det is computed from products of entries).
inline constexpr double kStateTolerance = 1e-12;

/// Parameters of one single-mode Gaussian state
/// rho = D(beta) S(r e^{i phi}) nu_th(N) S^dag D^dag, with beta = amplitude * e^{i phase}.
struct SingleModeParams {
  double thermal = 0.0;        // N, mean thermal quanta
  double squeeze = 0.0;        // r
  double squeeze_angle = 0.0;  // phi
  double amplitude = 0.0;      // |beta|
  double phase = 0.0;          // theta

  std::complex<double> beta() const { return std::polar(amplitude, phase); }
};

/// Collective arguments {N1,N2}, {r1,r2,phi1,phi2}, {|b1|,|b2|,th1,th2} of a state pair.
struct StatePairParams {
  std::array<double, 2> thermal{};
  std::array<double, 2> squeeze{};
  std::array<double, 2> squeeze_angle{};
  std::array<double, 2> amplitude{};
  std::array<double, 2> phase{};

  SingleModeParams state(std::size_t i) const {
    return {thermal.at(i), squeeze.at(i), squeeze_angle.at(i), amplitude.at(i), phase.at(i)};
  }
  static StatePairParams from_states(const SingleModeParams& a, const SingleModeParams& b);
};

/// Single-mode Gaussian state: first moments and 2x2 covariance matrix in
/// quadrature units where the vacuum covariance is I/2 (hbar = 1).
class GaussianState {
 public:
  /// Validated construction. Throws DomainError unless cov is symmetric,
  /// positive definite and satisfies det cov >= 1/4.
  static GaussianState from_moments(const Vec2& mean, const Mat2& cov);

  /// For the output of truncated (first-order) dynamics, which may dip below
  /// the Heisenberg bound. Still requires symmetry and positive definiteness.
  static GaussianState approximate(const Vec2& mean, const Mat2& cov);

  static GaussianState vacuum() { return {Vec2::Zero(), 0.5 * Mat2::Identity()}; }

  const Vec2& mean() const { return mean_; }
  const Mat2& cov() const { return cov_; }
  double det() const { return cov_.determinant(); }

  /// det cov >= 1/4 up to the relative slack.
  bool is_physical() const;

  /// Both moments rotated by angle in phase space.
  GaussianState rotated(double angle) const;

  std::complex<double> amplitude() const { return {mean_(0) / std::sqrt(2.0), mean_(1) / std::sqrt(2.0)}; }

 private:
  GaussianState(const Vec2& mean, const Mat2& cov) : mean_(mean), cov_(cov) {}
  static Mat2 checked_symmetric(const Mat2& cov);

  Vec2 mean_;
  Mat2 cov_;
};

Mat2 rotation(double angle);

/// Squeeze-then-displace a thermal state. Throws DomainError for N < 0 or r < 0.
GaussianState make_gaussian(const SingleModeParams& params);

/// Intermediate quantities of the Gaussian fidelity formula, exposed for tests.
struct FidelityTerms {
  double big_delta;    // 4 det(s1 + s2)
  double small_delta;  // 16 (det s1 - 1/4)(det s2 - 1/4)
  double prefactor;    // 2 / (sqrt(D + d) - sqrt(d))
  double exponent;     // -1/2 dX^T (s1 + s2)^{-1} dX
};

FidelityTerms fidelity_terms(const GaussianState& a, const GaussianState& b);

/// Uhlmann fidelity Tr sqrt(sqrt(rho1) rho2 sqrt(rho1)), i.e. the square root of
/// prefactor * exp(exponent). Lies in (0, 1] for physical states.
double fidelity(const GaussianState& a, const GaussianState& b);

/// sqrt(2 - 2 sqrt(F)).
double bures_distance(const GaussianState& a, const GaussianState& b);

}  // namespace gaussnm
