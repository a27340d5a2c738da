#include "gaussnm/errors.hpp"
#include "gaussnm/measure.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace gaussnm;
using doctest::Approx;

namespace {

constexpr double pi = std::numbers::pi;

StatePairParams coherent(double distance) {
  StatePairParams p;
  p.amplitude = {distance, 0.0};
  return p;
}

StatePairParams squeezed(double r1, double r2, double phi) {
  StatePairParams p;
  p.squeeze = {r1, r2};
  p.squeeze_angle = {phi, 0.0};
  return p;
}

// dF/dx at 0 under exact damping, via the generic fidelity of the mapped states
double generic_damping_slope(const StatePairParams& pair) {
  const GaussianState a = make_gaussian(pair.state(0));
  const GaussianState b = make_gaussian(pair.state(1));
  auto f = [&](double x) {
    const MapCoefficients m{std::exp(-0.5 * x), std::exp(-x), -std::expm1(-x), x};
    return fidelity(apply_map(a, m), apply_map(b, m));
  };
  const double h = 1e-5;
  return (-3.0 * f(0.0) + 4.0 * f(h) - f(2.0 * h)) / (2.0 * h);
}

}  // namespace

TEST_SUITE("measure") {
  TEST_CASE("names round-trip") {
    for (Family f : {Family::coherent, Family::squeezed, Family::coherent_thermal, Family::general_pure}) {
      CHECK(parse_family(to_string(f)) == f);
    }
    for (MeasureMethod m : {MeasureMethod::numeric_opt, MeasureMethod::closed_form, MeasureMethod::first_order}) {
      CHECK(parse_method(to_string(m)) == m);
    }
    CHECK_THROWS_AS(parse_family("cat"), DomainError);
    CHECK_THROWS_AS(parse_method("guess"), DomainError);
  }

  TEST_CASE("pair fidelity agrees with the generic formula on random maps") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 50; ++i) {
      const SingleModeParams a{u(rng), 1.5 * u(rng), pi * u(rng), 2 * u(rng), 2 * pi * u(rng)};
      const SingleModeParams b{u(rng), 1.5 * u(rng), pi * u(rng), 2 * u(rng), 2 * pi * u(rng)};
      const double x = 2.0 * u(rng);
      const MapCoefficients m{std::exp(-0.5 * x), std::exp(-x), -std::expm1(-x) + 0.5 * u(rng), x};
      const PairFidelity pf(make_gaussian(a), make_gaussian(b));
      const double direct = fidelity(apply_map(make_gaussian(a), m), apply_map(make_gaussian(b), m));
      CHECK(pf(m) == Approx(direct).epsilon(1e-12));
      CHECK(pf.initial() == Approx(fidelity(make_gaussian(a), make_gaussian(b))).epsilon(1e-12));
    }
  }

  TEST_CASE("fidelity trajectory of coherent states under the example rate") {
    const DampingChannel ch(DampingRateSpec::example(), 0.1);
    const auto traj = fidelity_trajectory(coherent(1.5), ch);
    REQUIRE(traj.intervals.size() == 1);
    CHECK(traj.intervals[0].t_plus == Approx(pi).epsilon(1e-6));
    CHECK(traj.intervals[0].t_minus == Approx(2 * pi).epsilon(1e-6));
    CHECK(measure_from_trajectory(traj) == Approx(traj.intervals[0].contribution));
    CHECK(traj.intervals[0].contribution > 0.0);
    CHECK(traj.refinements >= 2);
  }

  TEST_CASE("fidelity trajectory edge cases") {
    const DampingChannel ch(DampingRateSpec::example(), 0.1);
    StatePairParams same;
    same.amplitude = {0.7, 0.7};
    const auto flat = fidelity_trajectory(same, ch);
    for (double f : flat.fidelity) CHECK(f == Approx(1.0).epsilon(1e-14));
    CHECK(flat.intervals.empty());

    const DampingChannel divisible(DampingRateSpec::constant(0.5), 0.1, 10.0, 200);
    const auto rising = fidelity_trajectory(coherent(1.0), divisible);
    for (std::size_t i = 1; i < rising.fidelity.size(); ++i) CHECK(rising.fidelity[i] > rising.fidelity[i - 1]);
    CHECK(rising.intervals.empty());

    // K = 1: |beta1 - beta2| = sqrt 2
    const auto unit = fidelity_trajectory(coherent(std::sqrt(2.0)), ch);
    REQUIRE(unit.intervals.size() == 1);
    CHECK(std::abs(unit.intervals[0].t_plus - pi) < 1e-3);
    CHECK(std::abs(unit.intervals[0].t_minus - 2 * pi) < 1e-3);
  }

  TEST_CASE("backflow sums the decrease windows") {
    FidelityTrajectory t;
    CHECK(measure_from_trajectory(t) == 0.0);
    t.intervals = {{1.0, 2.0, 0.391 - 0.345}};
    CHECK(measure_from_trajectory(t) == Approx(0.046));
    t.intervals.push_back({4.0, 5.0, 0.01});
    CHECK(measure_from_trajectory(t) == Approx(0.056));
  }

  TEST_CASE("trajectory invariants: identical states, swap, global rotation") {
    const DampingChannel ch(DampingRateSpec::example(), 0.2);
    StatePairParams same;
    same.squeeze = {0.7, 0.7};
    same.amplitude = {1.0, 1.0};
    CHECK(measure_from_trajectory(fidelity_trajectory(same, ch)) == 0.0);

    StatePairParams p;
    p.thermal = {0.2, 0.1};
    p.squeeze = {0.6, 0.3};
    p.squeeze_angle = {0.4, 1.2};
    p.amplitude = {1.1, 0.3};
    p.phase = {0.2, 2.0};
    const double base = measure_from_trajectory(fidelity_trajectory(p, ch));
    CHECK(base > 0.0);
    StatePairParams swapped = StatePairParams::from_states(p.state(1), p.state(0));
    CHECK(measure_from_trajectory(fidelity_trajectory(swapped, ch)) == Approx(base).epsilon(1e-10));
    // rotating phase space by a turns squeeze angles by 2a and displacement phases by a
    StatePairParams rot = p;
    const double a = 0.9;
    for (std::size_t k = 0; k < 2; ++k) {
      rot.squeeze_angle[k] += 2 * a;
      rot.phase[k] += a;
    }
    CHECK(measure_from_trajectory(fidelity_trajectory(rot, ch)) == Approx(base).epsilon(1e-9));
  }

  TEST_CASE("closed form for the example damping rate") {
    const auto res = closed_form_coherent_damping(0.1, DampingRateSpec::example());
    CHECK(res.value == Approx(0.0460055719765).epsilon(1e-9));
    CHECK(*res.extra("K") == Approx(1.11416556973).epsilon(1e-9));
    CHECK_FALSE(res.extra("missing"));
    // value = e^{-K e^{-x+}} - e^{-K e^{-x-}} at the onset and end of the window
    const double xp = damping_x(pi, 0.1, DampingRateSpec::example());
    const double xm = damping_x(2 * pi, 0.1, DampingRateSpec::example());
    const double k = (xp - xm) / (std::exp(-xm) - std::exp(-xp));
    CHECK(*res.extra("K") == Approx(k).epsilon(1e-12));
    CHECK_THROWS_AS(closed_form_coherent_damping(0.1, DampingRateSpec::constant(0.3), 5.0), UnsupportedShapeError);
    CHECK_THROWS_AS(closed_form_coherent_damping(0.0, DampingRateSpec::example()), DomainError);
  }

  TEST_CASE("numeric optimum over coherent pairs reproduces the closed form") {
    const DampingChannel ch(DampingRateSpec::example(), 0.1);
    const auto num = maximize_measure(Family::coherent, ch);
    CHECK(num.value == Approx(0.0460055719765).epsilon(1e-8));
    CHECK(*num.extra("K") == Approx(1.11416556973).epsilon(1e-3));
    CHECK(num.diagnostics.evaluations > 0);
  }

  TEST_CASE("QBM coherent closed form matches the numeric optimum") {
    const QbmChannel ch(build_coefficients({1.0, 0.2, 0.2}, 0.05, 80.0, 4000));
    const auto closed = closed_form_coherent_qbm(ch);
    const auto num = maximize_measure(Family::coherent, ch);
    CHECK(closed.value > 0.0);
    CHECK(num.value == Approx(closed.value).epsilon(1e-4));
  }

  TEST_CASE("QBM closed form against a direct trajectory for a pure-diffusion stub") {
    // gamma = 0 and Delta = 1 + 1.5 cos t: accumulated noise stays positive but shrinks where Delta < 0
    const QbmChannel ch(tabulate_coefficients([](double) { return 0.0; }, [](double t) { return 1.0 + 1.5 * std::cos(t); }, 0.1,
                                              2 * pi, 2000));
    const auto closed = closed_form_coherent_qbm(ch);
    REQUIRE(closed.intervals.size() == 1);
    CHECK(closed.value > 0.0);
    const double direct = measure_from_trajectory(fidelity_trajectory(closed.argmax, ch));
    CHECK(direct == Approx(closed.value).epsilon(1e-8));
    CHECK(maximize_measure(Family::coherent, ch).value == Approx(closed.value).epsilon(1e-6));
  }

  TEST_CASE("QBM backflow switches on with temperature off resonance") {
    const QbmChannel cold(build_coefficients({4.0, 1.0, 0.2}, 0.05, 30.0, 3000));
    const QbmChannel warm(build_coefficients({4.0, 1.0, 1.0}, 0.05, 30.0, 3000));
    CHECK(first_order_coherent(cold) == 0.0);
    CHECK(first_order_coherent(warm) > 0.0);
  }

  TEST_CASE("divisible dynamics give zero for every family") {
    const DampingChannel ch(DampingRateSpec::constant(0.5), 0.1, 10.0, 400);
    OptimizerConfig cfg;
    cfg.grid_points = 5;
    for (Family f : {Family::coherent, Family::squeezed, Family::coherent_thermal}) {
      CHECK(maximize_measure(f, ch, {}, cfg).value < 1e-9);
    }
    CHECK(first_order_coherent(ch) == 0.0);
  }

  TEST_CASE("coherent first order is the weak-coupling limit of the exact measure") {
    const DampingChannel ch(DampingRateSpec::example(), 1e-3);
    const double fo = first_order_coherent(ch);
    CHECK(fo == Approx(1e-3 * (1.0 + std::exp(-pi / 10)) * std::exp(-pi / 10) / 1.01 / std::numbers::e));
    CHECK(closed_form_coherent_damping(1e-3, DampingRateSpec::example()).value == Approx(fo).epsilon(2e-3));
    CHECK(first_order_coherent_thermal(1.0, ch) == Approx(fo / 3.0));
    CHECK_THROWS_AS(first_order_coherent_thermal(-1.0, ch), DomainError);
  }

  TEST_CASE("thermal noise in the initial states lowers the backflow") {
    const DampingChannel ch(DampingRateSpec::example(), 0.1);
    OptimizerConfig cfg;
    double previous = 1.0;
    for (double n : {0.0, 0.5, 2.0}) {
      cfg.fixed_thermal = n;
      const double v = maximize_measure(Family::coherent_thermal, ch, {}, cfg).value;
      CHECK(v < previous);
      previous = v;
    }
  }

  TEST_CASE("g1 printed formula and the fidelity slope") {
    CHECK(g1_squeezed(0.0, 0.3) == Approx(1.0));
    for (double r : {0.2, 1.0, 2.0}) CHECK(g1_squeezed(r, 0.0) == Approx(std::cosh(2 * r)).epsilon(1e-12));
    {
      const double k = 3.0 + std::cos(0.1) + std::cosh(2.0) * (1.0 - std::cos(0.1));
      const double want = 8.0 * std::cosh(1.0) * (k - std::sqrt(k)) / (k * k);
      CHECK(g1_squeezed(0.5, 0.1) == Approx(want).epsilon(1e-12));
    }
    CHECK_THROWS_AS(g1_squeezed(-0.1, 0.3), DomainError);
    CHECK(std::abs(g1_oracle(0.0, 0.0, 0.3)) < 1e-6);
    for (double r : {0.3, 0.8, 1.5}) {
      for (double phi : {0.1, 0.5, 2.0}) {
        const double want = generic_damping_slope(squeezed(r, r, phi));
        CHECK(g1_oracle(r, r, phi) == Approx(want).epsilon(1e-5));
      }
    }
    CHECK(g1_oracle(0.9, 0.4, 0.7) == Approx(generic_damping_slope(squeezed(0.9, 0.4, 0.7))).epsilon(1e-5));
  }

  TEST_CASE("squeezed first order is the weak-coupling limit for a fixed pair") {
    const double alpha = 1e-3;
    const DampingChannel ch(DampingRateSpec::example(), alpha);
    const auto pair = squeezed(1.0, 1.0, 0.1);
    const double exact = measure_from_trajectory(fidelity_trajectory(pair, ch));
    CHECK(first_order_squeezed_damping(1.0, 1.0, 0.1, ch) == Approx(exact).epsilon(5e-3));

    const QbmChannel q(build_coefficients({1.0, 0.2, 0.2}, alpha, 80.0, 4000));
    const double exact_q = measure_from_trajectory(fidelity_trajectory(pair, q));
    CHECK(first_order_squeezed_qbm(1.0, 1.0, 0.1, q) == Approx(exact_q).epsilon(2e-2));
  }

  TEST_CASE("squeezed first order: identical pairs vanish, small alpha tracks the optimizer") {
    const QbmChannel q(build_coefficients({1.0, 0.2, 0.2}, 0.005, 150.0, 3000));
    CHECK(std::abs(first_order_squeezed_qbm(1.0, 1.0, 0.0, q)) < 1e-9);
    OptimizerConfig cfg;
    cfg.squeeze_angle = 0.1;
    cfg.equal_squeeze = true;
    const double numeric = maximize_measure(Family::squeezed, q, {}, cfg).value;
    CHECK(first_order_squeezed(q, 0.1).value == Approx(numeric).epsilon(0.10));
  }

  TEST_CASE("squeezed slopes split the damping slope") {
    const auto s = squeezed_slopes(1.0, 1.0, 0.05);
    CHECK(s.s_gamma + s.s_delta == Approx(g1_oracle(1.0, 1.0, 0.05)).epsilon(1e-9));
    // diffusion pulls two pure states together, so backflow comes from Delta < 0
    CHECK(s.s_delta > 0.0);
    // the diffusion slope dominates only once squeezing is strong: the ratio is
    // about 0.27 at r = 1 but falls steadily and is below 0.1 from r = 2 on
    double previous = 1.0;
    for (double r : {1.0, 1.5, 2.0, 2.5}) {
      const auto sl = squeezed_slopes(r, r, 0.05);
      const double ratio = sl.s_gamma / sl.s_delta;
      CHECK(ratio < previous);
      previous = ratio;
    }
    const auto strong = squeezed_slopes(2.0, 2.0, 0.05);
    CHECK(strong.s_gamma / strong.s_delta < 0.1);
  }

  TEST_CASE("compute_measure dispatch") {
    const DampingChannel ch(DampingRateSpec::example(), 0.1);
    CHECK(compute_measure(Family::coherent, ch, MeasureMethod::closed_form).value ==
          Approx(0.0460055719765).epsilon(1e-9));
    CHECK(compute_measure(Family::coherent, ch, MeasureMethod::first_order).value == Approx(first_order_coherent(ch)));
    OptimizerConfig cfg;
    cfg.fixed_thermal = 1.0;
    const auto th = compute_measure(Family::coherent_thermal, ch, MeasureMethod::first_order, {}, cfg);
    CHECK(th.value == Approx(first_order_coherent(ch) / 3.0));
    CHECK(*th.extra("N") == 1.0);
    const auto sq = compute_measure(Family::squeezed, ch, MeasureMethod::first_order);
    CHECK(sq.value > 0.0);
    CHECK(sq.extra("g1"));
    CHECK_THROWS_AS(compute_measure(Family::squeezed, ch, MeasureMethod::closed_form), UnsupportedShapeError);
    CHECK_THROWS_AS(compute_measure(Family::general_pure, ch, MeasureMethod::first_order), UnsupportedShapeError);
  }

  TEST_CASE("search bounds and squeeze angle validation") {
    const DampingChannel ch(DampingRateSpec::example(), 0.1);
    SearchBounds bad;
    bad.squeeze_max = -1.0;
    CHECK_THROWS_AS(maximize_measure(Family::squeezed, ch, bad), DomainError);
    OptimizerConfig cfg;
    cfg.squeeze_angle = 0.0;
    CHECK_THROWS_AS(maximize_measure(Family::squeezed, ch, {}, cfg), DomainError);
  }

  TEST_CASE("general pure pairs dominate the restricted families") {
    const DampingChannel ch(DampingRateSpec::example(), 0.1, 0.0, 400);
    OptimizerConfig cfg;
    cfg.grid_points = 4;
    SearchBounds b;
    b.amplitude_max = 3.0;
    b.squeeze_max = 2.0;
    const double general = maximize_measure(Family::general_pure, ch, b, cfg).value;
    CHECK(general >= closed_form_coherent_damping(0.1, DampingRateSpec::example()).value - 1e-6);
  }

  TEST_CASE("general pure first-order split adds up") {
    const DampingChannel ch(DampingRateSpec::example(), 0.05);
    StatePairParams p = squeezed(0.5, 0.2, 0.3);
    p.amplitude = {0.8, 0.0};
    const auto split = first_order_general_pure(p, ch);
    CHECK(split.coefficient == Approx(split.squeeze_fidelity * split.displacement_slope +
                                      split.displacement_weight * split.squeeze_slope));
    CHECK(split.coefficient == Approx(generic_damping_slope(p)).epsilon(1e-4));
  }

  TEST_CASE("record columns line up with the header") {
    const DampingChannel ch(DampingRateSpec::example(), 0.1);
    const auto res = closed_form_coherent_damping(0.1, DampingRateSpec::example());
    const auto header = measure_record_header();
    const auto row = measure_record(res, {0.1, std::nullopt, std::nullopt, std::nullopt});
    CHECK(row.size() == header.size());
    CHECK(header.front() == "family");
    CHECK(row.front() == "coherent");
  }
}
