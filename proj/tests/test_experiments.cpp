#include "gaussnm/errors.hpp"
#include "gaussnm/experiments.hpp"
#include "gaussnm/spectral.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace gaussnm;
using doctest::Approx;

namespace {

ExperimentConfig parse(const std::string& text, const ExperimentConfig& base = {}) {
  std::istringstream in(text);
  return parse_config(in, base);
}

ExperimentConfig small(std::string_view name) {
  ExperimentConfig c = ExperimentConfig::defaults(name);
  c.alphas = {0.05, 0.1};
  c.threads = 1;
  return c;
}

std::filesystem::path scratch_dir(const std::string& leaf) {
  auto dir = std::filesystem::temp_directory_path() / ("gaussnm_test_" + leaf);
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST_SUITE("experiments") {
  TEST_CASE("alpha grid") {
    ExperimentConfig c;
    const auto grid = c.alpha_grid();
    REQUIRE(grid.size() == 30);
    CHECK(grid.front() == Approx(0.005));
    CHECK(grid.back() == Approx(0.15));
    for (double a : {0.01, 0.05, 0.1}) {
      bool found = false;
      for (double g : grid) found = found || std::abs(g - a) < 1e-12;
      CHECK(found);
    }
    c.alphas = {0.2, 0.3};
    CHECK(c.alpha_grid() == std::vector<double>{0.2, 0.3});
  }

  TEST_CASE("temperature units") {
    ExperimentConfig c;
    c.omega_c = 0.5;
    c.temperature_unit = "omega0";
    CHECK(c.absolute_temperature(0.2, 3.0) == Approx(0.6));
    c.temperature_unit = "omega_c";
    CHECK(c.absolute_temperature(0.2, 3.0) == Approx(0.1));
    c.temperature_unit = "absolute";
    CHECK(c.absolute_temperature(0.2, 3.0) == Approx(0.2));
  }

  TEST_CASE("defaults per experiment validate") {
    for (const char* name : {"fig1", "fig2", "fig3", "fig4", "fig5", "custom"}) {
      CHECK_NOTHROW(ExperimentConfig::defaults(name).validate());
    }
    CHECK(ExperimentConfig::defaults("fig2").omega0s == std::vector<double>{4.0, 6.0});
    CHECK_THROWS_AS(ExperimentConfig::defaults("fig9"), DomainError);
  }

  TEST_CASE("config parsing") {
    const auto c = parse("schema=1\n# comment\nexperiment = fig3\n\nalpha_points=5\nphis=0.1, 0.2\nnoise=printed\n"
                         "equal_squeeze=false\nrate=constant\ngamma0=0.25\nfamilies=coherent,squeezed\n",
                         ExperimentConfig::defaults("fig3"));
    CHECK(c.experiment == "fig3");
    CHECK(c.alpha_points == 5);
    CHECK(c.phis == std::vector<double>{0.1, 0.2});
    CHECK(c.noise == NoiseConvention::printed);
    CHECK_FALSE(c.equal_squeeze);
    CHECK(c.rate.kind == DampingRateSpec::Kind::constant);
    CHECK(c.rate.gamma0 == 0.25);
    CHECK(c.families.size() == 2);
  }

  TEST_CASE("config errors are reported") {
    CHECK_THROWS_AS(parse("alpha_points=5\n"), DomainError);
    CHECK_THROWS_AS(parse("schema=2\n"), DomainError);
    CHECK_THROWS_AS(parse(""), DomainError);
    CHECK_THROWS_AS(parse("schema=1\nbogus=1\n"), DomainError);
    CHECK_THROWS_AS(parse("schema=1\nalpha_min=abc\n"), DomainError);
    CHECK_THROWS_AS(parse("schema=1\nalpha_points=-3\n"), DomainError);
    CHECK_THROWS_AS(parse("schema=1\nequal_squeeze=maybe\n"), DomainError);
    CHECK_THROWS_AS(parse("schema=1\nexperiment=fig7\n"), DomainError);
    CHECK_THROWS_AS(parse("schema=1\nnoise=loud\n"), DomainError);
    CHECK_THROWS_AS(parse("schema=1\nno equals sign\n"), DomainError);
    CHECK_THROWS_AS(parse("schema=1\nschema=1\n"), DomainError);
    try {
      parse("schema=1\nalpha_max=nan\n");
      FAIL("expected DomainError");
    } catch (const DomainError& e) {
      CHECK(std::string(e.what()).find("alpha_max") != std::string::npos);
    }
    CHECK_THROWS_AS(load_config("/nonexistent/dir/config.txt", {}), IoError);
  }

  TEST_CASE("validation rejects out-of-range values") {
    ExperimentConfig c;
    c.alphas = {0.6};
    CHECK_THROWS_AS(c.validate(), DomainError);
    c = ExperimentConfig::defaults("fig1");
    c.phis = {0.0};
    CHECK_THROWS_AS(c.validate(), DomainError);
    c = ExperimentConfig::defaults("fig3");
    c.temperatures = {};
    CHECK_THROWS_AS(c.validate(), DomainError);
    c = ExperimentConfig::defaults("fig3");
    c.omega_c = -1.0;
    CHECK_THROWS_AS(c.validate(), DomainError);
  }

  TEST_CASE("format and parse round trip") {
    ExperimentConfig c = ExperimentConfig::defaults("fig5");
    c.alphas = {0.01, 0.02};
    c.rate = DampingRateSpec::table({0.0, 1.0, 2.0}, {0.1, -0.2, 0.3});
    c.noise = NoiseConvention::printed;
    c.families = {Family::squeezed, Family::coherent_thermal};
    c.bounds.squeeze_max = 2.5;
    const std::string text = format_config(c);
    const ExperimentConfig back = parse(text);
    CHECK(format_config(back) == text);
    CHECK(back.rate.table_rates == c.rate.table_rates);
  }

  TEST_CASE("fig1 table schema and values") {
    const auto out = run_fig1(small("fig1"));
    REQUIRE(out.tables.size() == 1);
    const Table& t = out.tables[0];
    CHECK(t.name == "fig1");
    CHECK(t.header == std::vector<std::string>{"alpha", "coherent_exact", "coherent_first_order",
                                               "squeezed_exact_phi0.1", "squeezed_exact_phi0.2",
                                               "squeezed_first_order_phi0.1", "squeezed_first_order_phi0.2"});
    REQUIRE(t.rows.size() == 2);
    CHECK(t.number(1, "coherent_exact") == Approx(0.0460055719765).epsilon(1e-7));
    CHECK(t.number(1, "squeezed_exact_phi0.1") > t.number(1, "squeezed_exact_phi0.2"));
    CHECK(t.number(1, "squeezed_exact_phi0.2") > t.number(1, "coherent_exact"));
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      CHECK(t.number(i, "coherent_first_order") == Approx(t.number(i, "coherent_exact")).epsilon(0.02));
    }
    CHECK_THROWS_AS(t.column("nope"), DomainError);
    const auto summary = nlohmann::json::parse(out.summary_json);
    CHECK(summary["closed_form_max_abs_gap"].get<double>() < 1e-6);
    CHECK(summary.contains("optimizer"));
  }

  TEST_CASE("fig2 columns and negativity summary") {
    ExperimentConfig c = small("fig2");
    c.n_steps = 300;
    const auto out = run_fig2(c);
    const Table& t = out.tables[0];
    CHECK(t.header.size() == 9);
    CHECK(t.header[0] == "t");
    CHECK(t.header[1] == "delta_omega0_4_T0");
    CHECK(t.rows.size() == 301);
    const auto summary = nlohmann::json::parse(out.summary_json);
    CHECK(summary["curves"].size() == 8);
    for (const auto& curve : summary["curves"]) CHECK(curve["quadrature_error"].get<double>() < 1e-6);
    auto negative = [&](const std::string& column) {
      for (const auto& curve : summary["curves"]) {
        if (curve["column"] == column) return curve["negative_intervals"].size();
      }
      FAIL("missing curve " << column);
      return std::size_t{0};
    };
    // near resonance the low-temperature negativity disappears
    CHECK(negative("delta_omega0_6_T0.2") > 0);
    CHECK(negative("delta_omega0_4_T0.2") == 0);
    const EnvironmentSpec cold{4.0, 1.0, 0.0};
    const std::size_t row = 150;
    CHECK(t.number(row, "delta_omega0_4_T0") ==
          Approx(delta_zero_coefficient(t.number(row, "t"), cold)).epsilon(1e-9));
  }

  TEST_CASE("fig3 and fig4 schemas") {
    const auto f3 = run_fig3(small("fig3"));
    const Table& t3 = f3.tables[0];
    CHECK(t3.column("coherent_exact_T0.2") > 0);
    CHECK(t3.column("coherent_closed_T0.5") > 0);
    CHECK(t3.column("coherent_first_order_T0.5") > 0);
    for (std::size_t i = 0; i < t3.rows.size(); ++i) {
      CHECK(t3.number(i, "coherent_exact_T0.2") == Approx(t3.number(i, "coherent_closed_T0.2")).epsilon(1e-4));
    }
    for (std::size_t i = 0; i < t3.rows.size(); ++i) {
      CHECK(t3.number(i, "coherent_first_order_T0.2") == Approx(t3.number(i, "coherent_exact_T0.2")).epsilon(0.03));
    }
    const auto f4 = run_fig4(small("fig4"));
    const Table& t4 = f4.tables[0];
    CHECK(t4.column("squeezed_exact_phi0.05_T0.2") > 0);
    CHECK(t4.column("squeezed_first_order_phi0.1_T0.2") > 0);
    CHECK(t4.column("coherent_exact_T0.2") > 0);
  }

  TEST_CASE("fig4 squeezed curves saturate earlier for smaller angles") {
    ExperimentConfig c = small("fig4");
    c.alphas = {0.075, 0.145};
    const Table t = run_fig4(c).tables[0];
    const double growth_small = t.number(1, "squeezed_exact_phi0.05_T0.2") / t.number(0, "squeezed_exact_phi0.05_T0.2");
    const double growth_large = t.number(1, "squeezed_exact_phi0.1_T0.2") / t.number(0, "squeezed_exact_phi0.1_T0.2");
    CHECK(growth_small < growth_large);
    CHECK(growth_small < 145.0 / 75.0);
  }

  TEST_CASE("fig5 plateau summary") {
    ExperimentConfig c = small("fig5");
    c.alphas = {0.05, 0.1, 0.15};
    c.temperatures = {0.3};
    const auto out = run_fig5(c);
    const auto summary = nlohmann::json::parse(out.summary_json);
    CHECK(summary["plateaus"].contains("squeezed_exact_T0.3"));
  }

  TEST_CASE("custom experiment writes measure records") {
    ExperimentConfig c = small("custom");
    c.families = {Family::coherent};
    c.method = "closed";
    const auto out = run_experiment(c);
    const Table& t = out.tables[0];
    CHECK(t.header == measure_record_header());
    CHECK(t.rows.size() == 2);
    CHECK(t.number(1, "value") == Approx(0.0460055719765).epsilon(1e-9));
  }

  TEST_CASE("runs are deterministic across thread counts") {
    ExperimentConfig c = small("fig4");
    const auto one = run_fig4(c);
    c.threads = 3;
    const auto three = run_fig4(c);
    CHECK(one.tables[0].rows == three.tables[0].rows);
  }

  TEST_CASE("outputs are written, and unwritable targets raise IoError") {
    const auto dir = scratch_dir("outputs");
    const auto out = run_experiment(small("custom"));
    const auto files = write_outputs(out, "custom", dir);
    REQUIRE(files.size() == 2);
    CHECK(std::filesystem::exists(dir / "custom.csv"));
    std::ifstream json_in(dir / "custom_summary.json");
    CHECK(nlohmann::json::parse(json_in)["config"].is_object());
    std::filesystem::remove_all(dir);

    const auto blocker = scratch_dir("blocker");
    std::ofstream(blocker) << "file, not directory";
    CHECK_THROWS_AS(write_outputs(out, "custom", blocker / "sub"), IoError);
    std::filesystem::remove(blocker);
  }
}
