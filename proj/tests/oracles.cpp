#include "oracles.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace oracle {

namespace {

CMat psd_sqrt(const CMat& m) {
  Eigen::SelfAdjointEigenSolver<CMat> es(m);
  const Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().adjoint();
}

template <class F>
double gk(F f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 25, 1e-13);
}

// Upper end of the frequency integrals: e^{-w/wc} is below 1e-16 there.
double frequency_cutoff(const gaussnm::EnvironmentSpec& env) { return 40.0 * env.omega_c; }

// Eigendecomposition of a real symmetric tridiagonal matrix with zero diagonal
// and off-diagonal entries offdiag(j), cached by key since the oracle rebuilds
// the same generator for every state and only the scale factor changes.
struct Tridiagonal {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

const Tridiagonal& cached_tridiagonal(std::size_t key, Eigen::Index len, const std::function<double(Eigen::Index)>& offdiag) {
  static std::mutex guard;
  static std::map<std::size_t, Tridiagonal> cache;
  std::lock_guard lock(guard);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(len);
  Eigen::VectorXd sub(std::max<Eigen::Index>(len - 1, 0));
  for (Eigen::Index j = 0; j + 1 < len; ++j) sub(j) = offdiag(j);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success) throw std::runtime_error("tridiagonal eigensolver did not converge");
  return cache.emplace(key, Tridiagonal{es.eigenvalues(), es.eigenvectors()}).first->second;
}

}  // namespace

CMat fock_factor(const gaussnm::SingleModeParams& p, std::size_t dim, std::size_t work_dim) {
  using C = std::complex<double>;
  const auto d = static_cast<Eigen::Index>(dim);
  const auto w = static_cast<Eigen::Index>(std::max(work_dim, dim));

  // thermal weights, cut where they drop below 1e-16 of the total
  std::vector<double> weights;
  const double n = p.thermal;
  for (Eigen::Index k = 0; k < w; ++k) {
    const double pk = std::pow(n, double(k)) / std::pow(n + 1.0, double(k + 1));
    if (k > 0 && pk < 1e-16) break;
    weights.push_back(n == 0.0 ? (k == 0 ? 1.0 : 0.0) : pk);
    if (n == 0.0) break;
  }
  const auto kmax = static_cast<Eigen::Index>(weights.size());
  if (2 * kmax >= w) throw std::invalid_argument("work dimension too small for the thermal tail");

  // S = exp(-i H) with H = i (conj(xi) a^2 - xi a^dag^2) / 2, which couples n to n + 2 only.
  // On each parity chain H = r U T U^dag with T real tridiagonal and U = diag(e^{i j chi}),
  // so the truncated exponential is exactly unitary; w stays far above the
  // levels that matter, so the cut at the top does not reach them.
  const C chi_phase = std::polar(1.0, p.squeeze_angle - 0.5 * std::numbers::pi);
  CMat sq = CMat::Zero(w, kmax);
  for (Eigen::Index parity = 0; parity < 2; ++parity) {
    const Eigen::Index len = (w - parity + 1) / 2;
    if (len < 2) continue;
    const Tridiagonal& chain = cached_tridiagonal(2 * static_cast<std::size_t>(w) + static_cast<std::size_t>(parity),
                                                  len, [parity](Eigen::Index j) {
                                                    const double level = double(parity + 2 * j);
                                                    return 0.5 * std::sqrt((level + 1.0) * (level + 2.0));
                                                  });
    const Eigen::MatrixXd& v = chain.vectors;
    std::vector<C> u(static_cast<std::size_t>(len));
    C phase = 1.0;
    for (Eigen::Index j = 0; j < len; ++j, phase *= chi_phase) u[static_cast<std::size_t>(j)] = phase;
    for (Eigen::Index k = parity; k < kmax; k += 2) {
      const Eigen::Index jk = k / 2;
      // column jk of U V e^{-i r lambda} V^T U^dag
      Eigen::VectorXcd coeff(len);
      for (Eigen::Index e = 0; e < len; ++e) coeff(e) = std::polar(v(jk, e), -p.squeeze * chain.values(e));
      const Eigen::VectorXcd col = v.cast<C>() * coeff;
      for (Eigen::Index j = 0; j < len; ++j) {
        sq(parity + 2 * j, k) = u[static_cast<std::size_t>(j)] * col(j) * std::conj(u[static_cast<std::size_t>(jk)]);
      }
    }
  }

  // D = exp(beta a^dag - conj(beta) a) = P exp(-i |beta| T1) P^dag with T1 the real
  // tridiagonal matrix of off-diagonals sqrt(n) and P = diag((i e^{i theta})^n).
  // A margin above w keeps the truncation edge away from the block we read.
  // (A ladder recurrence for D|m> loses everything to cancellation once m >> row.)
  const Eigen::Index wd = w + 200;
  const Tridiagonal& gen = cached_tridiagonal(static_cast<std::size_t>(wd) << 20, wd,
                                              [](Eigen::Index j) { return std::sqrt(double(j + 1)); });
  const double mag = p.amplitude;
  Eigen::VectorXcd spectral_phase(wd);
  for (Eigen::Index e = 0; e < wd; ++e) spectral_phase(e) = std::polar(1.0, -mag * gen.values(e));
  const CMat left = gen.vectors.topRows(d).cast<C>() * spectral_phase.asDiagonal();
  CMat disp = left * gen.vectors.topRows(w).transpose().cast<C>();
  const C step = C(0.0, 1.0) * std::polar(1.0, p.phase);
  std::vector<C> pw(static_cast<std::size_t>(w));
  pw[0] = 1.0;
  for (Eigen::Index m = 1; m < w; ++m) pw[static_cast<std::size_t>(m)] = pw[static_cast<std::size_t>(m - 1)] * step;
  for (Eigen::Index col = 0; col < w; ++col) {
    for (Eigen::Index row = 0; row < d; ++row) {
      disp(row, col) *= pw[static_cast<std::size_t>(row)] * std::conj(pw[static_cast<std::size_t>(col)]);
    }
  }

  CMat factor = disp * sq;
  for (Eigen::Index k = 0; k < kmax; ++k) factor.col(k) *= std::sqrt(weights[static_cast<std::size_t>(k)]);
  return factor;
}

CMat fock_density(const gaussnm::SingleModeParams& p, std::size_t dim, std::size_t work_dim) {
  const CMat a = fock_factor(p, dim, work_dim);
  return a * a.adjoint();
}

double factor_fidelity(const CMat& a, const CMat& b) {
  Eigen::BDCSVD<CMat> svd(a.adjoint() * b);
  return svd.singularValues().sum();
}

double fock_fidelity(const CMat& rho, const CMat& sigma) {
  const CMat prod = psd_sqrt(rho) * psd_sqrt(sigma);
  Eigen::BDCSVD<CMat> svd(prod);
  return svd.singularValues().sum();
}

double gamma_2d(double t, const gaussnm::EnvironmentSpec& env) {
  const double w_max = frequency_cutoff(env);
  return gk(
      [&](double s) {
        const double inner = gk(
            [&](double w) { return w * std::exp(-w / env.omega_c) * std::sin(w * s); }, 0.0, w_max);
        return std::sin(env.omega0 * s) * inner;
      },
      0.0, t);
}

double delta_2d(double t, const gaussnm::EnvironmentSpec& env) {
  const double w_max = frequency_cutoff(env) + 40.0 * env.temperature;
  // (N + 1/2) w = (w / 2) coth(w / 2T), finite at w = 0
  auto weight = [&](double w) {
    if (env.temperature == 0.0) return 0.5 * w;
    const double x = w / (2.0 * env.temperature);
    return x < 1e-6 ? env.temperature * (1.0 + x * x / 3.0) : 0.5 * w / std::tanh(x);
  };
  return gk(
      [&](double s) {
        const double inner =
            gk([&](double w) { return weight(w) * std::exp(-w / env.omega_c) * std::cos(w * s); }, 0.0, w_max);
        return std::cos(env.omega0 * s) * inner;
      },
      0.0, t);
}

}  // namespace oracle
