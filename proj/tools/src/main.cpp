// latres: command-line driver. Each subcommand reads a structure config,
// runs one library operation and writes CSV or JSON. Failures are reported
// as one JSON object on stderr with a nonzero exit code.

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "commands.hpp"

namespace {

using namespace latres::cli;

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("latres");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  const char* env = std::getenv("LATRES_LOG");
  spdlog::set_level(env ? spdlog::level::from_str(env) : spdlog::level::warn);
}

void report(const std::string& sub, const std::string& code, const std::string& message) {
  const nlohmann::json doc = {{"error", code}, {"message", message}, {"subcommand", sub}};
  std::cerr << doc.dump() << '\n';
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "Structure JSON")->required();
  sub->add_option("--out", c.out, "Output path ('-' for stdout)");
  sub->add_option("--threads", c.threads, "Worker threads (0 = all cores)");
  sub->add_option("--seed", c.seed, "Seed for randomized inputs");
}

void add_grid(CLI::App* sub, Grid2& g) {
  sub->add_option("--kappa-range", g.kappa, "kappa_min,kappa_max")->delimiter(',')->expected(2);
  sub->add_option("--omega-range", g.omega, "omega_min,omega_max")->delimiter(',')->expected(2);
  sub->add_option("--kappa-samples", g.kappa_samples);
  sub->add_option("--omega-samples", g.omega_samples);
}

void add_mode(CLI::App* sub, ModeSelect& m) {
  sub->add_option("--mode-index", m.index, "Index into the sorted guided-mode list");
  sub->add_option("--mode-seed", m.seed, "kappa,omega seed refined instead of a search")
      ->delimiter(',')
      ->expected(2);
  sub->add_flag("--fixed-kappa", m.fixed_kappa, "Refine omega only at the seed kappa");
  sub->add_option("--window", m.window, "kappa_min,kappa_max,omega_min,omega_max")
      ->delimiter(',')
      ->expected(4);
  sub->add_option("--samples", m.samples, "Search grid samples per axis");
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Scattering, guided modes and resonance on a lattice with an embedded waveguide"};
  app.require_subcommand(1);

  Common common;
  Grid2 grid;
  long band_samples = 201;
  ScatterArgs scatter;
  bool random_incidence = false;
  ModeSelect guided;
  DispersionArgs dispersion;
  AnomalyArgs anomaly;
  BifurcateArgs bifurcate;
  EnhanceArgs enhance;
  EvolveArgs evolve;
  long validate_points = 200;

  auto* regions = app.add_subcommand("regions", "Count propagating orders on a (kappa, omega) grid");
  add_common(regions, common);
  add_grid(regions, grid);

  auto* bands = app.add_subcommand("bands", "Waveguide Floquet bands");
  add_common(bands, common);
  bands->add_option("--kappa-samples", band_samples);

  auto* sc = app.add_subcommand("scatter", "Solve one scattering problem");
  add_common(sc, common);
  sc->add_option("--kappa", scatter.kappa)->required();
  sc->add_option("--omega", scatter.omega)->required();
  sc->add_option("--order", scatter.order, "Incident order (-1 = first propagating)");
  sc->add_option("--side", scatter.side)->check(CLI::IsMember({"left", "right"}));
  sc->add_option("--method", scatter.method)->check(CLI::IsMember({"fourier", "dtn"}));
  sc->add_option("--M", scatter.M, "DtN truncation (0 = decay rule)");

  auto* scan = app.add_subcommand("scan", "Transmission over a (kappa, omega) grid");
  add_common(scan, common);
  add_grid(scan, grid);
  scan->add_flag("--random-incidence", random_incidence, "Seeded random incident amplitudes");

  auto* gd = app.add_subcommand("guided", "Embedded guided modes in a window");
  add_common(gd, common);
  add_mode(gd, guided);

  auto* disp = app.add_subcommand("dispersion", "Dispersion relation near a guided mode");
  add_common(disp, common);
  add_mode(disp, dispersion.mode);
  disp->add_option("--radius", dispersion.radius);
  disp->add_option("--half", dispersion.half, "Samples per side");
  disp->add_option("--summary", dispersion.summary, "JSON path for the fitted coefficients");

  auto* an = app.add_subcommand("anomaly", "Transmission anomaly fit near a guided mode");
  add_common(an, common);
  add_mode(an, anomaly.mode);
  an->add_option("--radius", anomaly.radius, "Peak/dip sampling radius in kappa");
  an->add_option("--half", anomaly.half);
  an->add_option("--K", anomaly.window, "Half-width of the comparison window");
  an->add_option("--window-samples", anomaly.window_samples);
  an->add_option("--csv", anomaly.csv, "CSV of direct versus approximate transmission");

  auto* bf = app.add_subcommand("bifurcate", "Critical coupling and the emerging mode pair");
  add_common(bf, common);
  bf->add_option("--gamma0-min", bifurcate.gamma_min)->required();
  bf->add_option("--gamma0-max", bifurcate.gamma_max)->required();
  bf->add_option("--gamma-index", bifurcate.gamma_index);
  bf->add_option("--points", bifurcate.points);
  bf->add_option("--first-offset", bifurcate.first_offset);
  bf->add_option("--summary", bifurcate.summary, "JSON summary path");

  auto* en = app.add_subcommand("enhance", "Waveguide amplitude at optimal detuning");
  add_common(en, common);
  add_mode(en, enhance.mode);
  en->add_option("--kt-min", enhance.kt_min);
  en->add_option("--kt-max", enhance.kt_max);
  en->add_option("--points", enhance.points);
  en->add_option("--dispersion-radius", enhance.dispersion_radius);
  en->add_option("--summary", enhance.summary, "JSON summary path");

  auto* ev = app.add_subcommand("evolve", "RK4 time evolution on a truncated strip");
  add_common(ev, common);
  ev->add_option("--kappa", evolve.kappa);
  ev->add_option("--dt", evolve.dt);
  ev->add_option("--steps", evolve.steps);
  ev->add_option("--init", evolve.init)
      ->check(CLI::IsMember({"symmetric", "antisymmetric", "random", "file"}));
  ev->add_option("--init-file", evolve.init_file);
  ev->add_option("--width", evolve.width);
  ev->add_option("--radius", evolve.radius);
  ev->add_option("--Mx", evolve.Mx);
  ev->add_option("--record-every", evolve.record_every);

  auto* va = app.add_subcommand("validate", "Cross-oracle and conservation checks");
  add_common(va, common);
  va->add_option("--points", validate_points);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  CLI::App* chosen = app.get_subcommands().front();
  const std::string name = chosen->get_name();
  try {
    if (chosen == regions) return run_regions(common, grid);
    if (chosen == bands) return run_bands(common, band_samples);
    if (chosen == sc) return run_scatter(common, scatter);
    if (chosen == scan) return run_scan(common, grid, random_incidence);
    if (chosen == gd) return run_guided(common, guided);
    if (chosen == disp) return run_dispersion(common, dispersion);
    if (chosen == an) return run_anomaly(common, anomaly);
    if (chosen == bf) return run_bifurcate(common, bifurcate);
    if (chosen == en) return run_enhance(common, enhance);
    if (chosen == ev) return run_evolve(common, evolve);
    if (chosen == va) return run_validate(common, validate_points);
  } catch (const latres::Error& e) {
    report(name, latres::to_string(e.code()), e.what());
    return 1;
  } catch (const std::exception& e) {
    report(name, "internal", e.what());
    return 1;
  }
  return 2;
}
