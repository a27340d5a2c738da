#include "gaussnm/experiments.hpp"

#include "gaussnm/csv.hpp"
#include "gaussnm/errors.hpp"
#include "gaussnm/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <memory>
#include <numbers>
#include <ostream>
#include <sstream>

namespace gaussnm {

namespace {

using json = nlohmann::ordered_json;

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_number(std::string_view key, std::string_view text) {
  text = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw DomainError("config key '" + std::string(key) + "': '" + std::string(text) + "' is not a finite number");
  }
  return v;
}

std::size_t parse_count(std::string_view key, std::string_view text) {
  text = trim(text);
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw DomainError("config key '" + std::string(key) + "': '" + std::string(text) +
                      "' is not a non-negative integer");
  }
  return v;
}

bool parse_bool(std::string_view key, std::string_view text) {
  text = trim(text);
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw DomainError("config key '" + std::string(key) + "': expected true or false");
}

template <class F>
auto parse_list(std::string_view text, F&& item) {
  std::vector<std::invoke_result_t<F&, std::string_view>> out;
  text = trim(text);
  if (text.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    out.push_back(item(trim(text.substr(start, comma == std::string_view::npos ? comma : comma - start))));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::vector<double> parse_numbers(std::string_view key, std::string_view text) {
  return parse_list(text, [&](std::string_view item) { return parse_number(key, item); });
}

std::string join(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) out += (i ? "," : "") + csv::number(values[i]);
  return out;
}

std::string rate_kind_name(DampingRateSpec::Kind kind) {
  switch (kind) {
    case DampingRateSpec::Kind::paper_example:
      return "example";
    case DampingRateSpec::Kind::constant:
      return "constant";
    case DampingRateSpec::Kind::user_table:
      return "table";
  }
  return "example";
}

std::string noise_name(NoiseConvention n) { return n == NoiseConvention::coth ? "coth" : "printed"; }

bool is_figure(std::string_view e) {
  return e == "fig1" || e == "fig2" || e == "fig3" || e == "fig4" || e == "fig5" || e == "custom";
}

// ---------------------------------------------------------------------------
// Shared pieces of the figure runners

OptimizerConfig optimizer_for(const ExperimentConfig& cfg, double phi = 0.1) {
  OptimizerConfig o;
  o.grid_points = cfg.grid_points;
  o.starts = cfg.starts;
  o.squeeze_angle = phi;
  o.equal_squeeze = cfg.equal_squeeze;
  o.threads = 1;  // parallelism lives at the curve/point level
  return o;
}

std::size_t workers(const ExperimentConfig& cfg) { return cfg.threads ? cfg.threads : worker_count(); }

// QBM coefficient table at unit coupling, rescaled per alpha by the curves.
struct QbmSetup {
  EnvironmentSpec env;
  double temperature_label = 0.0;
  ChannelCoefficients base;
  double settling = 0.0;
};

QbmSetup qbm_setup(const ExperimentConfig& cfg, double omega0, double temperature) {
  QbmSetup s;
  s.env = {omega0, cfg.omega_c, cfg.absolute_temperature(temperature, omega0)};
  s.env.validate();
  s.temperature_label = temperature;
  s.settling = settling_time(s.env);
  const double t_end = cfg.t_end > 0.0 ? cfg.t_end : s.settling;
  s.base = build_coefficients(s.env, 1.0, t_end, cfg.n_steps);
  return s;
}

json intervals_json(const std::vector<TimeInterval>& ivs) {
  json out = json::array();
  for (const TimeInterval& iv : ivs) out.push_back({iv.begin, iv.end});
  return out;
}

json qbm_json(const QbmSetup& s, NoiseConvention noise) {
  const QbmChannel ch(s.base, noise);
  return {{"omega0", s.env.omega0},
          {"omega_c", s.env.omega_c},
          {"temperature", s.temperature_label},
          {"absolute_temperature", s.env.temperature},
          {"t_end", s.base.t_end()},
          {"settling_time", s.settling},
          {"quadrature_error", s.base.quadrature_error},
          {"delta_negative_intervals", intervals_json(ch.backflow_intervals())},
          {"divisibility_violations", ch.divisibility_violations().size()}};
}

// One column of an alpha sweep.
struct Curve {
  std::string name;
  std::function<MeasureResult(double alpha)> eval;
};

struct CurveStats {
  std::size_t evaluations = 0;
  std::size_t iterations = 0;
  std::size_t restarts = 0;
  std::size_t converged = 0;
  std::size_t refinements = 0;
  std::vector<double> stagnated_at;
  std::vector<std::string> notes;
};

// Evaluates every (curve, alpha) pair on the worker pool and assembles the table
// in config order. Optimizer diagnostics are folded per curve into the summary.
Table sweep(const std::string& name, const std::vector<Curve>& curves, const ExperimentConfig& cfg, json& summary) {
  const std::vector<double> alphas = cfg.alpha_grid();
  const std::size_t n_a = alphas.size();
  const std::vector<MeasureResult> results = parallel_map(
      curves.size() * n_a, [&](std::size_t k) { return curves[k / n_a].eval(alphas[k % n_a]); }, workers(cfg));

  Table table;
  table.name = name;
  table.header.push_back("alpha");
  for (const Curve& c : curves) table.header.push_back(c.name);
  for (std::size_t i = 0; i < n_a; ++i) {
    std::vector<std::string> row{csv::number(alphas[i])};
    for (std::size_t c = 0; c < curves.size(); ++c) row.push_back(csv::number(results[c * n_a + i].value));
    table.rows.push_back(std::move(row));
  }

  json& diag = summary["optimizer"];
  for (std::size_t c = 0; c < curves.size(); ++c) {
    CurveStats st;
    for (std::size_t i = 0; i < n_a; ++i) {
      const MeasureDiagnostics& d = results[c * n_a + i].diagnostics;
      st.evaluations += d.evaluations;
      st.iterations += d.iterations;
      st.restarts += d.restarts;
      st.converged += d.converged;
      st.refinements += d.refinements;
      if (d.stagnated) st.stagnated_at.push_back(alphas[i]);
      if (!d.note.empty() && std::find(st.notes.begin(), st.notes.end(), d.note) == st.notes.end()) {
        st.notes.push_back(d.note);
      }
    }
    diag[curves[c].name] = {{"evaluations", st.evaluations}, {"iterations", st.iterations},
                            {"restarts", st.restarts},       {"converged", st.converged},
                            {"refinements", st.refinements}, {"stagnated_alphas", st.stagnated_at},
                            {"notes", st.notes}};
  }
  return table;
}

json summary_header(const ExperimentConfig& cfg) {
  json config = json::object();
  std::istringstream lines(format_config(cfg));
  for (std::string line; std::getline(lines, line);) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) config[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return {{"experiment", cfg.experiment}, {"config", config}};
}

std::string phi_label(double phi) { return "phi" + csv::number(phi); }
std::string t_label(double t) { return "T" + csv::number(t); }
std::string omega_label(const ExperimentConfig& cfg, double w0) {
  return cfg.omega0s.size() > 1 ? "_omega0_" + csv::number(w0) : std::string();
}

std::vector<QbmSetup> qbm_setups(const ExperimentConfig& cfg) {
  std::vector<std::pair<double, double>> keys;
  for (double w0 : cfg.omega0s) {
    for (double t : cfg.temperatures) keys.emplace_back(w0, t);
  }
  return parallel_map(
      keys.size(), [&](std::size_t i) { return qbm_setup(cfg, keys[i].first, keys[i].second); }, workers(cfg));
}

Curve qbm_curve(std::string name, std::shared_ptr<const QbmSetup> setup, const ExperimentConfig& cfg, Family family,
                MeasureMethod method, double phi = 0.1) {
  const OptimizerConfig opt = optimizer_for(cfg, phi);
  const SearchBounds bounds = cfg.bounds;
  const NoiseConvention noise = cfg.noise;
  return {std::move(name), [=](double alpha) {
            const QbmChannel ch(setup->base.with_alpha(alpha), noise);
            return compute_measure(family, ch, method, bounds, opt);
          }};
}

std::vector<std::string> column(const Table& t, std::size_t c) {
  std::vector<std::string> out;
  for (const auto& row : t.rows) out.push_back(row.at(c));
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Config

ExperimentConfig ExperimentConfig::defaults(std::string_view experiment) {
  if (!is_figure(experiment)) throw DomainError("unknown experiment '" + std::string(experiment) + "'");
  ExperimentConfig c;
  c.experiment = std::string(experiment);
  if (experiment == "fig1") {
    c.phis = {0.1, 0.2};
  } else if (experiment == "fig2") {
    c.omega_c = 1.0;
    c.omega0s = {4.0, 6.0};
    c.temperatures = {0.0, 0.2, 1.0, 4.0};
    c.temperature_unit = "omega_c";
  } else if (experiment == "fig3") {
    c.temperatures = {0.2, 0.5};
  } else if (experiment == "fig4") {
    c.temperatures = {0.2};
    c.phis = {0.05, 0.1};
  } else if (experiment == "fig5") {
    c.temperatures = {0.3, 0.9, 4.0, 8.0};
    c.phis = {0.05};
  } else {
    c.temperatures = {0.2};
    c.phis = {0.1};
  }
  return c;
}

std::vector<double> ExperimentConfig::alpha_grid() const {
  if (!alphas.empty()) return alphas;
  if (alpha_points == 1) return {alpha_min};
  std::vector<double> out(alpha_points);
  for (std::size_t i = 0; i < alpha_points; ++i) {
    out[i] = alpha_min + (alpha_max - alpha_min) * static_cast<double>(i) / static_cast<double>(alpha_points - 1);
  }
  return out;
}

double ExperimentConfig::absolute_temperature(double value, double omega0) const {
  if (temperature_unit == "omega0") return value * omega0;
  if (temperature_unit == "omega_c") return value * omega_c;
  return value;
}

void ExperimentConfig::validate() const {
  if (!is_figure(experiment)) throw DomainError("unknown experiment '" + experiment + "'");
  if (alphas.empty()) {
    if (alpha_points == 0) throw DomainError("alpha_points must be >= 1");
    if (!(alpha_min <= alpha_max)) throw DomainError("alpha_min must not exceed alpha_max");
  }
  for (double a : alpha_grid()) {
    if (!(a > 0.0 && a <= 0.5)) throw DomainError("alpha values must lie in (0, 0.5], got " + csv::number(a));
  }
  for (double p : phis) {
    if (!(p > 0.0 && p <= std::numbers::pi)) throw DomainError("phi values must lie in (0, pi], got " + csv::number(p));
  }
  for (double t : temperatures) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("temperatures must be finite and >= 0");
  }
  if (temperature_unit != "omega0" && temperature_unit != "omega_c" && temperature_unit != "absolute") {
    throw DomainError("temperature_unit must be omega0, omega_c or absolute");
  }
  if (omega0s.empty()) throw DomainError("omega0s must not be empty");
  for (double w : omega0s) {
    if (!(w > 0.0) || !std::isfinite(w)) throw DomainError("omega0 values must be finite and > 0");
  }
  if (!(omega_c > 0.0) || !std::isfinite(omega_c)) throw DomainError("omega_c must be finite and > 0");
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw DomainError("t_end must be finite and >= 0");
  if (!(fig2_t_end > 0.0) || !std::isfinite(fig2_t_end)) throw DomainError("fig2_t_end must be finite and > 0");
  if (n_steps < 10) throw DomainError("n_steps must be >= 10");
  rate.validate();
  if (channel != "damping" && channel != "qbm") throw DomainError("channel must be damping or qbm");
  if (families.empty()) throw DomainError("families must not be empty");
  parse_method(method);
  bounds.validate();
  if (starts == 0) throw DomainError("starts must be >= 1");
  const bool qbm_figure = experiment == "fig2" || experiment == "fig3" || experiment == "fig4" ||
                          experiment == "fig5" || (experiment == "custom" && channel == "qbm");
  if (qbm_figure && temperatures.empty()) throw DomainError(experiment + " needs at least one temperature");
  const bool squeezed_figure = experiment == "fig1" || experiment == "fig4" || experiment == "fig5";
  if (squeezed_figure && phis.empty()) throw DomainError(experiment + " needs at least one phi");
}

ExperimentConfig parse_config(std::istream& in, ExperimentConfig base) {
  ExperimentConfig c = std::move(base);
  bool schema_seen = false;
  std::size_t line_no = 0;
  for (std::string raw; std::getline(in, raw);) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw DomainError("config line " + std::to_string(line_no) + ": expected key=value");
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));

    if (!schema_seen) {
      if (key != "schema") throw DomainError("config must start with schema=1");
      if (value != "1") throw DomainError("unsupported config schema '" + std::string(value) + "'");
      schema_seen = true;
      continue;
    }

    if (key == "experiment") {
      if (!is_figure(value)) throw DomainError("unknown experiment '" + std::string(value) + "'");
      c.experiment = std::string(value);
    } else if (key == "alpha_min") {
      c.alpha_min = parse_number(key, value);
    } else if (key == "alpha_max") {
      c.alpha_max = parse_number(key, value);
    } else if (key == "alpha_points") {
      c.alpha_points = parse_count(key, value);
    } else if (key == "alphas") {
      c.alphas = parse_numbers(key, value);
    } else if (key == "phis") {
      c.phis = parse_numbers(key, value);
    } else if (key == "temperatures") {
      c.temperatures = parse_numbers(key, value);
    } else if (key == "temperature_unit") {
      c.temperature_unit = std::string(value);
    } else if (key == "omega0s") {
      c.omega0s = parse_numbers(key, value);
    } else if (key == "omega_c") {
      c.omega_c = parse_number(key, value);
    } else if (key == "t_end") {
      c.t_end = parse_number(key, value);
    } else if (key == "fig2_t_end") {
      c.fig2_t_end = parse_number(key, value);
    } else if (key == "n_steps") {
      c.n_steps = parse_count(key, value);
    } else if (key == "rate") {
      if (value == "example") {
        c.rate.kind = DampingRateSpec::Kind::paper_example;
      } else if (value == "constant") {
        c.rate.kind = DampingRateSpec::Kind::constant;
      } else if (value == "table") {
        c.rate.kind = DampingRateSpec::Kind::user_table;
      } else {
        throw DomainError("rate must be example, constant or table");
      }
    } else if (key == "gamma0") {
      c.rate.gamma0 = parse_number(key, value);
    } else if (key == "rate_times") {
      c.rate.table_times = parse_numbers(key, value);
    } else if (key == "rate_values") {
      c.rate.table_rates = parse_numbers(key, value);
    } else if (key == "channel") {
      c.channel = std::string(value);
    } else if (key == "families") {
      c.families = parse_list(value, [](std::string_view f) { return parse_family(f); });
    } else if (key == "method") {
      parse_method(value);
      c.method = std::string(value);
    } else if (key == "equal_squeeze") {
      c.equal_squeeze = parse_bool(key, value);
    } else if (key == "amplitude_max") {
      c.bounds.amplitude_max = parse_number(key, value);
    } else if (key == "squeeze_max") {
      c.bounds.squeeze_max = parse_number(key, value);
    } else if (key == "thermal_max") {
      c.bounds.thermal_max = parse_number(key, value);
    } else if (key == "grid_points") {
      c.grid_points = parse_count(key, value);
    } else if (key == "starts") {
      c.starts = parse_count(key, value);
    } else if (key == "noise") {
      if (value == "coth") {
        c.noise = NoiseConvention::coth;
      } else if (value == "printed") {
        c.noise = NoiseConvention::printed;
      } else {
        throw DomainError("noise must be coth or printed");
      }
    } else if (key == "threads") {
      c.threads = parse_count(key, value);
    } else if (key == "schema") {
      throw DomainError("schema given twice");
    } else {
      throw DomainError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }
  if (!schema_seen) throw DomainError("config must start with schema=1");
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path.string());
  return parse_config(in, std::move(base));
}

std::string format_config(const ExperimentConfig& c) {
  std::ostringstream out;
  std::string families;
  for (std::size_t i = 0; i < c.families.size(); ++i) families += (i ? "," : "") + to_string(c.families[i]);
  out << "schema=1\n"
      << "experiment=" << c.experiment << '\n'
      << "alpha_min=" << csv::number(c.alpha_min) << '\n'
      << "alpha_max=" << csv::number(c.alpha_max) << '\n'
      << "alpha_points=" << c.alpha_points << '\n'
      << "alphas=" << join(c.alphas) << '\n'
      << "phis=" << join(c.phis) << '\n'
      << "temperatures=" << join(c.temperatures) << '\n'
      << "temperature_unit=" << c.temperature_unit << '\n'
      << "omega0s=" << join(c.omega0s) << '\n'
      << "omega_c=" << csv::number(c.omega_c) << '\n'
      << "t_end=" << csv::number(c.t_end) << '\n'
      << "fig2_t_end=" << csv::number(c.fig2_t_end) << '\n'
      << "n_steps=" << c.n_steps << '\n'
      << "rate=" << rate_kind_name(c.rate.kind) << '\n'
      << "gamma0=" << csv::number(c.rate.gamma0) << '\n'
      << "rate_times=" << join(c.rate.table_times) << '\n'
      << "rate_values=" << join(c.rate.table_rates) << '\n'
      << "channel=" << c.channel << '\n'
      << "families=" << families << '\n'
      << "method=" << c.method << '\n'
      << "equal_squeeze=" << (c.equal_squeeze ? "true" : "false") << '\n'
      << "amplitude_max=" << csv::number(c.bounds.amplitude_max) << '\n'
      << "squeeze_max=" << csv::number(c.bounds.squeeze_max) << '\n'
      << "thermal_max=" << csv::number(c.bounds.thermal_max) << '\n'
      << "grid_points=" << c.grid_points << '\n'
      << "starts=" << c.starts << '\n'
      << "noise=" << noise_name(c.noise) << '\n'
      << "threads=" << c.threads << '\n';
  return out.str();
}

// ---------------------------------------------------------------------------
// Tables

std::size_t Table::column(std::string_view col) const {
  const auto it = std::find(header.begin(), header.end(), col);
  if (it == header.end()) throw DomainError("table " + name + " has no column '" + std::string(col) + "'");
  return static_cast<std::size_t>(it - header.begin());
}

double Table::number(std::size_t row, std::string_view col) const {
  const std::string& cell = rows.at(row).at(column(col));
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw DomainError("table " + name + " cell '" + cell + "' is not a number");
  }
  return v;
}

void write_table(std::ostream& out, const Table& table) {
  csv::write_row(out, table.header);
  for (const auto& row : table.rows) csv::write_row(out, row);
}

std::vector<std::filesystem::path> write_outputs(const ExperimentOutput& output, const std::string& experiment,
                                                 const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw IoError("cannot create output directory " + dir.string() + (ec ? ": " + ec.message() : ""));
  }
  std::vector<std::filesystem::path> written;
  auto write_file = [&](const std::filesystem::path& path, const std::function<void(std::ostream&)>& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    body(out);
    out.flush();
    if (!out) throw IoError("failed while writing " + path.string());
    written.push_back(path);
  };
  for (const Table& t : output.tables) {
    write_file(dir / (t.name + ".csv"), [&](std::ostream& out) { write_table(out, t); });
  }
  write_file(dir / (experiment + "_summary.json"), [&](std::ostream& out) { out << output.summary_json << '\n'; });
  return written;
}

// ---------------------------------------------------------------------------
// Figures

ExperimentOutput run_fig1(const ExperimentConfig& cfg) {
  cfg.validate();
  json summary = summary_header(cfg);
  const DampingRateSpec rate = cfg.rate;
  const double t_end = cfg.t_end;
  const std::size_t steps = cfg.n_steps;
  const SearchBounds bounds = cfg.bounds;
  auto damping = [=](double alpha) { return DampingChannel(rate, alpha, t_end, steps); };

  std::vector<Curve> curves;
  const OptimizerConfig plain = optimizer_for(cfg);
  curves.push_back({"coherent_exact", [=](double a) {
                      return compute_measure(Family::coherent, damping(a), MeasureMethod::numeric_opt, bounds, plain);
                    }});
  curves.push_back({"coherent_first_order", [=](double a) {
                      return compute_measure(Family::coherent, damping(a), MeasureMethod::first_order, bounds, plain);
                    }});
  for (double phi : cfg.phis) {
    const OptimizerConfig opt = optimizer_for(cfg, phi);
    curves.push_back({"squeezed_exact_" + phi_label(phi), [=](double a) {
                        return compute_measure(Family::squeezed, damping(a), MeasureMethod::numeric_opt, bounds, opt);
                      }});
  }
  for (double phi : cfg.phis) {
    const OptimizerConfig opt = optimizer_for(cfg, phi);
    curves.push_back({"squeezed_first_order_" + phi_label(phi), [=](double a) {
                        return compute_measure(Family::squeezed, damping(a), MeasureMethod::first_order, bounds, opt);
                      }});
  }
  Table table = sweep("fig1", curves, cfg, summary);

  const DampingChannel probe = damping(cfg.alpha_grid().front());
  summary["channel"] = {{"rate", rate_kind_name(rate.kind)},
                        {"t_end", probe.t_end()},
                        {"negative_intervals", intervals_json(probe.backflow_intervals())},
                        {"negative_integral", probe.negative_integral()}};
  // cross-check of the coherent optimum against the single-window closed form
  try {
    double worst = 0.0;
    const std::size_t col = table.column("coherent_exact");
    const auto alphas = cfg.alpha_grid();
    for (std::size_t i = 0; i < alphas.size(); ++i) {
      const double closed = closed_form_coherent_damping(alphas[i], rate, t_end).value;
      worst = std::max(worst, std::abs(closed - table.number(i, table.header[col])));
    }
    summary["closed_form_max_abs_gap"] = worst;
  } catch (const UnsupportedShapeError& e) {
    summary["closed_form_max_abs_gap"] = nullptr;
    summary["closed_form_note"] = e.what();
  }
  return {{std::move(table)}, summary.dump(2)};
}

ExperimentOutput run_fig2(const ExperimentConfig& cfg) {
  cfg.validate();
  json summary = summary_header(cfg);
  struct Key {
    double omega0;
    double temperature;
  };
  std::vector<Key> keys;
  for (double w0 : cfg.omega0s) {
    for (double t : cfg.temperatures) keys.push_back({w0, t});
  }
  const auto tables = parallel_map(
      keys.size(),
      [&](std::size_t i) {
        EnvironmentSpec env{keys[i].omega0, cfg.omega_c, cfg.absolute_temperature(keys[i].temperature, keys[i].omega0)};
        env.validate();
        return build_coefficients(env, 1.0, cfg.fig2_t_end, cfg.n_steps);
      },
      workers(cfg));

  Table table;
  table.name = "fig2";
  table.header.push_back("t");
  json curves = json::array();
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const std::string name = "delta_omega0_" + csv::number(keys[i].omega0) + "_" + t_label(keys[i].temperature);
    table.header.push_back(name);
    curves.push_back({{"column", name},
                      {"omega0", keys[i].omega0},
                      {"temperature", keys[i].temperature},
                      {"quadrature_error", tables[i].quadrature_error},
                      {"negative_intervals", intervals_json(negative_intervals(tables[i].times, tables[i].delta))},
                      {"negative_integral", negative_part_integral(tables[i].times, tables[i].delta)}});
  }
  const std::vector<double>& times = tables.front().times;
  for (std::size_t k = 0; k < times.size(); ++k) {
    std::vector<std::string> row{csv::number(times[k])};
    for (const ChannelCoefficients& t : tables) row.push_back(csv::number(t.delta[k]));
    table.rows.push_back(std::move(row));
  }
  summary["curves"] = curves;
  return {{std::move(table)}, summary.dump(2)};
}

ExperimentOutput run_fig3(const ExperimentConfig& cfg) {
  cfg.validate();
  json summary = summary_header(cfg);
  const auto setups = qbm_setups(cfg);
  std::vector<Curve> curves;
  json channels = json::array();
  for (const QbmSetup& s : setups) {
    auto shared = std::make_shared<const QbmSetup>(s);
    const std::string suffix = omega_label(cfg, s.env.omega0) + "_" + t_label(s.temperature_label);
    curves.push_back(qbm_curve("coherent_exact" + suffix, shared, cfg, Family::coherent, MeasureMethod::numeric_opt));
    curves.push_back(qbm_curve("coherent_closed" + suffix, shared, cfg, Family::coherent, MeasureMethod::closed_form));
    curves.push_back(
        qbm_curve("coherent_first_order" + suffix, shared, cfg, Family::coherent, MeasureMethod::first_order));
    channels.push_back(qbm_json(s, cfg.noise));
  }
  summary["channels"] = channels;
  Table table = sweep("fig3", curves, cfg, summary);
  return {{std::move(table)}, summary.dump(2)};
}

ExperimentOutput run_fig4(const ExperimentConfig& cfg) {
  cfg.validate();
  json summary = summary_header(cfg);
  const auto setups = qbm_setups(cfg);
  std::vector<Curve> curves;
  json channels = json::array();
  for (const QbmSetup& s : setups) {
    auto shared = std::make_shared<const QbmSetup>(s);
    const std::string suffix = omega_label(cfg, s.env.omega0) + "_" + t_label(s.temperature_label);
    curves.push_back(qbm_curve("coherent_exact" + suffix, shared, cfg, Family::coherent, MeasureMethod::numeric_opt));
    curves.push_back(
        qbm_curve("coherent_first_order" + suffix, shared, cfg, Family::coherent, MeasureMethod::first_order));
    for (double phi : cfg.phis) {
      curves.push_back(qbm_curve("squeezed_exact_" + phi_label(phi) + suffix, shared, cfg, Family::squeezed,
                                 MeasureMethod::numeric_opt, phi));
    }
    for (double phi : cfg.phis) {
      curves.push_back(qbm_curve("squeezed_first_order_" + phi_label(phi) + suffix, shared, cfg, Family::squeezed,
                                 MeasureMethod::first_order, phi));
    }
    channels.push_back(qbm_json(s, cfg.noise));
  }
  summary["channels"] = channels;
  Table table = sweep("fig4", curves, cfg, summary);
  return {{std::move(table)}, summary.dump(2)};
}

ExperimentOutput run_fig5(const ExperimentConfig& cfg) {
  cfg.validate();
  json summary = summary_header(cfg);
  const auto setups = qbm_setups(cfg);
  std::vector<Curve> curves;
  json channels = json::array();
  for (double phi : cfg.phis) {
    const std::string angle = cfg.phis.size() > 1 ? "_" + phi_label(phi) : std::string();
    for (const QbmSetup& s : setups) {
      auto shared = std::make_shared<const QbmSetup>(s);
      const std::string suffix = angle + omega_label(cfg, s.env.omega0) + "_" + t_label(s.temperature_label);
      curves.push_back(
          qbm_curve("squeezed_exact" + suffix, shared, cfg, Family::squeezed, MeasureMethod::numeric_opt, phi));
    }
    for (const QbmSetup& s : setups) {
      auto shared = std::make_shared<const QbmSetup>(s);
      const std::string suffix = angle + omega_label(cfg, s.env.omega0) + "_" + t_label(s.temperature_label);
      curves.push_back(
          qbm_curve("squeezed_first_order" + suffix, shared, cfg, Family::squeezed, MeasureMethod::first_order, phi));
    }
  }
  for (const QbmSetup& s : setups) channels.push_back(qbm_json(s, cfg.noise));
  summary["channels"] = channels;
  Table table = sweep("fig5", curves, cfg, summary);

  // plateau per curve: spread of the last three alpha samples
  json plateaus = json::object();
  for (std::size_t c = 1; c < table.header.size(); ++c) {
    const auto col = column(table, c);
    if (col.size() < 3) break;
    double lo = 1e300;
    double hi = -1e300;
    for (std::size_t i = col.size() - 3; i < col.size(); ++i) {
      const double v = table.number(i, table.header[c]);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    plateaus[table.header[c]] = {{"last_three_min", lo},
                                 {"last_three_max", hi},
                                 {"relative_spread", hi > 0.0 ? (hi - lo) / hi : 0.0}};
  }
  summary["plateaus"] = plateaus;
  return {{std::move(table)}, summary.dump(2)};
}

ExperimentOutput run_custom(const ExperimentConfig& cfg) {
  cfg.validate();
  json summary = summary_header(cfg);
  const MeasureMethod method = parse_method(cfg.method);
  const std::vector<double> alphas = cfg.alpha_grid();

  struct Job {
    std::shared_ptr<const QbmSetup> setup;  // null for damping
    double alpha;
    Family family;
    double phi;
  };
  std::vector<Job> jobs;
  std::vector<std::shared_ptr<const QbmSetup>> setups;
  if (cfg.channel == "qbm") {
    json channels = json::array();
    for (const QbmSetup& s : qbm_setups(cfg)) {
      setups.push_back(std::make_shared<const QbmSetup>(s));
      channels.push_back(qbm_json(s, cfg.noise));
    }
    summary["channels"] = channels;
  } else {
    setups.push_back(nullptr);
  }
  const std::vector<double> phis = cfg.phis.empty() ? std::vector<double>{0.1} : cfg.phis;
  for (const auto& s : setups) {
    for (Family f : cfg.families) {
      for (double a : alphas) {
        if (f == Family::squeezed) {
          for (double phi : phis) jobs.push_back({s, a, f, phi});
        } else {
          jobs.push_back({s, a, f, 0.1});
        }
      }
    }
  }

  const auto results = parallel_map(
      jobs.size(),
      [&](std::size_t i) {
        const Job& j = jobs[i];
        const OptimizerConfig opt = optimizer_for(cfg, j.phi);
        if (j.setup) {
          const QbmChannel ch(j.setup->base.with_alpha(j.alpha), cfg.noise);
          return compute_measure(j.family, ch, method, cfg.bounds, opt);
        }
        const DampingChannel ch(cfg.rate, j.alpha, cfg.t_end, cfg.n_steps);
        return compute_measure(j.family, ch, method, cfg.bounds, opt);
      },
      workers(cfg));

  Table table;
  table.name = "custom";
  table.header = measure_record_header();
  json diag = json::array();
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    RecordContext ctx;
    ctx.alpha = jobs[i].alpha;
    if (jobs[i].setup) {
      ctx.temperature = jobs[i].setup->temperature_label;
      ctx.omega0 = jobs[i].setup->env.omega0;
      ctx.omega_c = jobs[i].setup->env.omega_c;
    }
    table.rows.push_back(measure_record(results[i], ctx));
    const MeasureDiagnostics& d = results[i].diagnostics;
    diag.push_back({{"row", i},
                    {"evaluations", d.evaluations},
                    {"iterations", d.iterations},
                    {"restarts", d.restarts},
                    {"converged", d.converged},
                    {"stagnated", d.stagnated},
                    {"note", d.note}});
  }
  summary["optimizer"] = diag;
  return {{std::move(table)}, summary.dump(2)};
}

ExperimentOutput run_experiment(const ExperimentConfig& cfg) {
  if (cfg.experiment == "fig1") return run_fig1(cfg);
  if (cfg.experiment == "fig2") return run_fig2(cfg);
  if (cfg.experiment == "fig3") return run_fig3(cfg);
  if (cfg.experiment == "fig4") return run_fig4(cfg);
  if (cfg.experiment == "fig5") return run_fig5(cfg);
  if (cfg.experiment == "custom") return run_custom(cfg);
  throw DomainError("unknown experiment '" + cfg.experiment + "'");
}

}  // namespace gaussnm
