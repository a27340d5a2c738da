#pragma once

#include "gaussnm/channels.hpp"
#include "gaussnm/measure.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace gaussnm {

/// Parameters of one figure reproduction. Read from flat key=value text whose
/// first entry is schema=1; see README for the key list.
struct ExperimentConfig {
  std::string experiment = "fig1";  // fig1..fig5 or custom

  double alpha_min = 0.005;
  double alpha_max = 0.15;
  std::size_t alpha_points = 30;  // step 0.005, so 0.01, 0.05, 0.1 lie on the grid
  std::vector<double> alphas;  // explicit list, overrides the range when non-empty

  std::vector<double> phis;          // squeezing angles
  std::vector<double> temperatures;  // in temperature_unit
  std::string temperature_unit = "omega0";  // omega0, omega_c or absolute
  std::vector<double> omega0s{1.0};
  double omega_c = 0.2;

  double t_end = 0.0;         // 0 picks the default window (4 pi damping, settling time QBM)
  double fig2_t_end = 30.0;   // time axis of the diffusion-coefficient figure
  std::size_t n_steps = 2000;

  DampingRateSpec rate;       // damping channel rate
  std::string channel = "damping";  // custom experiment only
  std::vector<Family> families{Family::coherent};  // custom experiment only
  std::string method = "numeric";  // custom experiment only

  bool equal_squeeze = true;
  SearchBounds bounds;
  std::size_t grid_points = 0;
  std::size_t starts = 3;
  NoiseConvention noise = NoiseConvention::coth;
  std::size_t threads = 0;  // 0 uses worker_count()

  /// Caption defaults of the named experiment.
  static ExperimentConfig defaults(std::string_view experiment);

  std::vector<double> alpha_grid() const;
  /// k_B T in absolute units for a temperature given in temperature_unit.
  double absolute_temperature(double value, double omega0) const;
  void validate() const;
};

/// Applies key=value overrides from text on top of base. Throws DomainError on a
/// missing or unsupported schema line, unknown keys or malformed values.
ExperimentConfig parse_config(std::istream& in, ExperimentConfig base);
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base);
/// Serializes every key (the inverse of parse_config).
std::string format_config(const ExperimentConfig& config);

struct Table {
  std::string name;  // file stem
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index by header name; throws DomainError if absent.
  std::size_t column(std::string_view name) const;
  double number(std::size_t row, std::string_view column) const;
};

struct ExperimentOutput {
  std::vector<Table> tables;
  std::string summary_json;  // run summary: config echo, quadrature errors, optimizer diagnostics
};

ExperimentOutput run_fig1(const ExperimentConfig& config);
ExperimentOutput run_fig2(const ExperimentConfig& config);
ExperimentOutput run_fig3(const ExperimentConfig& config);
ExperimentOutput run_fig4(const ExperimentConfig& config);
ExperimentOutput run_fig5(const ExperimentConfig& config);
ExperimentOutput run_custom(const ExperimentConfig& config);
ExperimentOutput run_experiment(const ExperimentConfig& config);

void write_table(std::ostream& out, const Table& table);
/// Writes <name>.csv per table and <experiment>_summary.json into dir (created if
/// missing). Throws IoError when the directory or a file cannot be written.
std::vector<std::filesystem::path> write_outputs(const ExperimentOutput& output, const std::string& experiment,
                                                 const std::filesystem::path& dir);

}  // namespace gaussnm
