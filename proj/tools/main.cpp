// gaussnm: fidelity, coefficient tables, evolution, non-Markovianity measures and
// figure reproduction from the command line.

#include "gaussnm/channels.hpp"
#include "gaussnm/csv.hpp"
#include "gaussnm/errors.hpp"
#include "gaussnm/experiments.hpp"
#include "gaussnm/gaussian_state.hpp"
#include "gaussnm/measure.hpp"
#include "gaussnm/spectral.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

namespace {

using namespace gaussnm;

enum Exit { ok = 0, failure = 1, bad_argument = 2, unsupported = 3, io = 4 };

constexpr const char* kUnits =
    "Units: hbar = k_B = 1. Frequencies (omega0, omega_c) and the temperature T = k_B T share one energy unit; "
    "times are in its inverse. Quadratures are scaled so the vacuum covariance is I/2.";

struct ChannelFlags {
  std::string channel = "damping";
  double alpha = 0.1;
  std::string rate = "example";
  double gamma0 = 0.5;
  double temperature = 0.0;
  double omega0 = 1.0;
  double omega_c = 0.2;
  double t_end = 0.0;
  std::size_t n_steps = 2000;
  std::string noise = "coth";

  void attach(CLI::App& app) {
    app.add_option("--channel", channel, "Channel: damping or qbm")
        ->check(CLI::IsMember({"damping", "qbm"}))
        ->capture_default_str();
    app.add_option("--alpha", alpha, "Coupling strength alpha (dimensionless, > 0)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("--rate", rate,
                   "Damping rate shape: example (1/2 e^{-t/10} sin t, constant after 5 pi/2) or constant")
        ->check(CLI::IsMember({"example", "constant"}))
        ->capture_default_str();
    app.add_option("--gamma0", gamma0, "Constant damping rate gamma0 (inverse time), with --rate constant")
        ->capture_default_str();
    app.add_option("--T", temperature, "Bath temperature k_B T (energy units, >= 0), qbm")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    app.add_option("--omega0", omega0, "Oscillator frequency omega0 (energy units, > 0), qbm")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("--omega-c", omega_c, "Ohmic cutoff frequency omega_c (energy units, > 0), qbm")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("--t-end", t_end,
                   "Time window end (inverse energy units); 0 picks 4 pi for damping and the settling time for qbm")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    app.add_option("--n-steps", n_steps, "Number of time steps on the window (>= 10)")
        ->check(CLI::Range(std::size_t{10}, std::size_t{10000000}))
        ->capture_default_str();
    app.add_option("--noise-convention", noise,
                   "Weight of the diffusion coefficient in the qbm map: coth (physical) or printed")
        ->check(CLI::IsMember({"coth", "printed"}))
        ->capture_default_str();
  }

  NoiseConvention convention() const { return noise == "coth" ? NoiseConvention::coth : NoiseConvention::printed; }

  EnvironmentSpec environment() const { return {omega0, omega_c, temperature}; }

  ChannelCoefficients table() const {
    const EnvironmentSpec env = environment();
    env.validate();
    const double end = t_end > 0.0 ? t_end : settling_time(env);
    return build_coefficients(env, alpha, end, n_steps);
  }

  std::unique_ptr<Channel> build() const {
    if (channel == "qbm") return std::make_unique<QbmChannel>(table(), convention());
    const DampingRateSpec spec = rate == "constant" ? DampingRateSpec::constant(gamma0) : DampingRateSpec::example();
    return std::make_unique<DampingChannel>(spec, alpha, t_end, n_steps);
  }
};

// Writes to --out when given, stdout otherwise.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (path.empty()) return;
    file_.open(path, std::ios::binary);
    if (!file_) throw IoError("cannot open " + path + " for writing");
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }
  void finish() {
    stream().flush();
    if (!stream()) throw IoError("failed while writing output");
  }

 private:
  std::ofstream file_;
};

std::string fixed12(double v) {
  std::ostringstream s;
  s.imbue(std::locale::classic());
  s << std::fixed << std::setprecision(12) << v;
  return s.str();
}

SingleModeParams state_of(const std::vector<double>& n, const std::vector<double>& r, const std::vector<double>& phi,
                          const std::vector<double>& mag, const std::vector<double>& arg, std::size_t i) {
  return {n.at(i), r.at(i), phi.at(i), mag.at(i), arg.at(i)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string("Fidelity-based non-Markovianity of single-mode Gaussian channels.\n") + kUnits, "gaussnm"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  // fidelity --------------------------------------------------------------
  auto* fid = app.add_subcommand("fidelity", "Fidelity and Bures distance of two Gaussian states");
  std::vector<double> f_n, f_r, f_phi, f_mag, f_arg;
  fid->add_option("--n", f_n, "Thermal occupations N of state 1 and 2 (>= 0)")->expected(2)->required()
      ->check(CLI::NonNegativeNumber);
  fid->add_option("--r", f_r, "Squeezing parameters r of state 1 and 2 (>= 0)")->expected(2)->required()
      ->check(CLI::NonNegativeNumber);
  fid->add_option("--phi", f_phi, "Squeezing angles phi of state 1 and 2 (radians)")->expected(2)->required();
  fid->add_option("--beta-mag", f_mag, "Displacement magnitudes |beta| of state 1 and 2 (>= 0)")->expected(2)
      ->required()->check(CLI::NonNegativeNumber);
  fid->add_option("--beta-arg", f_arg, "Displacement phases arg beta of state 1 and 2 (radians)")->expected(2)
      ->required();
  fid->footer(kUnits);

  // coeffs ----------------------------------------------------------------
  auto* coeffs = app.add_subcommand("coeffs", "Tabulate gamma(t), Delta(t), x(t), y(t) of the QBM channel as CSV");
  ChannelFlags c_flags;
  c_flags.channel = "qbm";
  c_flags.alpha = 0.05;
  coeffs->add_option("--alpha", c_flags.alpha, "Coupling strength alpha scaling x and y (> 0)")
      ->check(CLI::PositiveNumber)->capture_default_str();
  coeffs->add_option("--T", c_flags.temperature, "Bath temperature k_B T (energy units, >= 0)")
      ->check(CLI::NonNegativeNumber)->capture_default_str();
  coeffs->add_option("--omega0", c_flags.omega0, "Oscillator frequency omega0 (energy units, > 0)")
      ->check(CLI::PositiveNumber)->capture_default_str();
  coeffs->add_option("--omega-c", c_flags.omega_c, "Ohmic cutoff frequency omega_c (energy units, > 0)")
      ->check(CLI::PositiveNumber)->capture_default_str();
  coeffs->add_option("--t-end", c_flags.t_end, "Window end (inverse energy units); 0 picks the settling time")
      ->check(CLI::NonNegativeNumber)->capture_default_str();
  coeffs->add_option("--n-steps", c_flags.n_steps, "Number of time steps (>= 10)")
      ->check(CLI::Range(std::size_t{10}, std::size_t{10000000}))->capture_default_str();
  std::string c_out;
  coeffs->add_option("--out", c_out, "Output CSV file (stdout when omitted)");
  coeffs->footer(kUnits);

  // evolve ----------------------------------------------------------------
  auto* evolve = app.add_subcommand("evolve", "Evolve one Gaussian state through a channel; CSV trajectory");
  SingleModeParams e_state;
  evolve->add_option("--n", e_state.thermal, "Thermal occupation N (>= 0)")->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  evolve->add_option("--r", e_state.squeeze, "Squeezing parameter r (>= 0)")->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  evolve->add_option("--phi", e_state.squeeze_angle, "Squeezing angle phi (radians)")->capture_default_str();
  evolve->add_option("--beta-mag", e_state.amplitude, "Displacement magnitude |beta| (>= 0)")
      ->check(CLI::NonNegativeNumber)->capture_default_str();
  evolve->add_option("--beta-arg", e_state.phase, "Displacement phase arg beta (radians)")->capture_default_str();
  ChannelFlags e_flags;
  e_flags.attach(*evolve);
  std::string e_mode = "exact";
  evolve->add_option("--mode", e_mode, "Evolution: exact or first-order")
      ->check(CLI::IsMember({"exact", "first-order"}))->capture_default_str();
  std::string e_out;
  evolve->add_option("--out", e_out, "Output CSV file (stdout when omitted)");
  evolve->footer(kUnits);

  // measure ---------------------------------------------------------------
  auto* measure = app.add_subcommand("measure", "Non-Markovianity over a state family; prints a CSV record");
  ChannelFlags m_flags;
  m_flags.attach(*measure);
  std::string m_family = "coherent";
  measure->add_option("--family", m_family, "State family: coherent, squeezed, coherent_thermal or general_pure")
      ->check(CLI::IsMember({"coherent", "squeezed", "coherent_thermal", "general_pure"}))->capture_default_str();
  std::string m_method = "numeric";
  measure->add_option("--method", m_method, "Method: numeric, closed or first-order")
      ->check(CLI::IsMember({"numeric", "closed", "first-order"}))->capture_default_str();
  double m_phi = 0.1;
  measure->add_option("--phi", m_phi, "Angle between squeezing directions, squeezed family (radians)")
      ->capture_default_str();
  bool m_equal = false;
  measure->add_flag("--equal-squeeze", m_equal, "Constrain r1 = r2 in the squeezed family");
  std::optional<double> m_thermal;
  measure->add_option("--thermal", m_thermal, "Pin N1 = N2 = N in the coherent_thermal family (>= 0)")
      ->check(CLI::NonNegativeNumber);
  SearchBounds m_bounds;
  measure->add_option("--amplitude-max", m_bounds.amplitude_max, "Search bound on |beta| (> 0)")
      ->check(CLI::PositiveNumber)->capture_default_str();
  measure->add_option("--squeeze-max", m_bounds.squeeze_max, "Search bound on r (> 0)")
      ->check(CLI::PositiveNumber)->capture_default_str();
  measure->add_option("--thermal-max", m_bounds.thermal_max, "Search bound on N (> 0)")
      ->check(CLI::PositiveNumber)->capture_default_str();
  std::string m_out;
  measure->add_option("--out", m_out, "Output CSV file (stdout when omitted)");
  measure->footer(kUnits);

  // reproduce -------------------------------------------------------------
  auto* reproduce = app.add_subcommand("reproduce", "Reproduce a figure: CSV tables plus a JSON run summary");
  int r_figure = 1;
  reproduce->add_option("--figure", r_figure, "Figure number 1-5")->required()->check(CLI::Range(1, 5));
  std::string r_config;
  reproduce->add_option("--config", r_config, "Config file (schema=1 key=value text) overriding the figure defaults");
  std::string r_out = "out";
  reproduce->add_option("--out", r_out, "Output directory (created if missing)")->capture_default_str();
  reproduce->footer(kUnits);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return bad_argument;
  }

  try {
    if (*fid) {
      const GaussianState a = make_gaussian(state_of(f_n, f_r, f_phi, f_mag, f_arg, 0));
      const GaussianState b = make_gaussian(state_of(f_n, f_r, f_phi, f_mag, f_arg, 1));
      std::cout << "fidelity " << fixed12(fidelity(a, b)) << '\n'
                << "bures_distance " << fixed12(bures_distance(a, b)) << '\n';
    } else if (*coeffs) {
      Sink sink(c_out);
      write_coefficients_csv(sink.stream(), c_flags.table());
      sink.finish();
    } else if (*evolve) {
      const auto channel = e_flags.build();
      const EvolutionMode mode = e_mode == "exact" ? EvolutionMode::exact : EvolutionMode::first_order;
      const SingleModeParams other{};
      const auto [traj, unused] = trajectory(StatePairParams::from_states(e_state, other), *channel, mode);
      (void)unused;
      Sink sink(e_out);
      write_trajectory_csv(sink.stream(), traj);
      sink.finish();
      if (traj.first_order_breakdown) std::cerr << "warning: first-order expansion used beyond |x| = 0.3\n";
    } else if (*measure) {
      const auto channel = m_flags.build();
      OptimizerConfig cfg;
      cfg.squeeze_angle = m_phi;
      cfg.equal_squeeze = m_equal;
      cfg.fixed_thermal = m_thermal;
      const MeasureResult result =
          compute_measure(parse_family(m_family), *channel, parse_method(m_method), m_bounds, cfg);
      RecordContext ctx;
      ctx.alpha = m_flags.alpha;
      if (m_flags.channel == "qbm") {
        ctx.temperature = m_flags.temperature;
        ctx.omega0 = m_flags.omega0;
        ctx.omega_c = m_flags.omega_c;
      }
      Sink sink(m_out);
      csv::write_row(sink.stream(), measure_record_header());
      csv::write_row(sink.stream(), measure_record(result, ctx));
      sink.finish();
      if (result.diagnostics.stagnated) std::cerr << "note: " << result.diagnostics.note << '\n';
    } else if (*reproduce) {
      const std::string experiment = "fig" + std::to_string(r_figure);
      ExperimentConfig cfg = ExperimentConfig::defaults(experiment);
      if (!r_config.empty()) cfg = load_config(r_config, cfg);
      if (cfg.experiment != experiment) {
        throw DomainError("config names experiment " + cfg.experiment + " but --figure asks for " + experiment);
      }
      const ExperimentOutput output = run_experiment(cfg);
      for (const auto& path : write_outputs(output, experiment, r_out)) std::cout << "wrote " << path.string() << '\n';
    }
  } catch (const UnsupportedShapeError& e) {
    std::cerr << "unsupported: " << e.what() << '\n';
    return unsupported;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return io;
  } catch (const DomainError& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return bad_argument;
  } catch (const RangeError& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return bad_argument;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return failure;
  }
  return ok;
}
