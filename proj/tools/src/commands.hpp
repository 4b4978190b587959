#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "latres/guided_modes.hpp"

namespace latres::cli {

struct Common {
  std::string config;
  std::string out = "-";
  unsigned threads = 0;  // 0 = all cores
  std::uint64_t seed = 20240601;
};

// A mode is either the i-th entry of a guided-mode search or a refined seed.
struct ModeSelect {
  int index = 0;
  std::vector<double> seed;  // {kappa, omega}
  bool fixed_kappa = false;  // refine omega only (standing modes)
  std::vector<double> window{-0.5, 0.5, 0.0, 8.0};
  long samples = 400;
};

struct Grid2 {
  std::vector<double> kappa{-0.5, 0.5};
  std::vector<double> omega{0.0, 8.0};
  long kappa_samples = 101;
  long omega_samples = 161;
};

// A config is either a structure document or {"structure": <document or path>};
// a relative path is resolved against the config's directory.
StructureParams load_config(const std::string& path);

int run_regions(const Common& c, const Grid2& g);
int run_bands(const Common& c, long kappa_samples);

struct ScatterArgs {
  double kappa = 0.0;
  double omega = 1.0;
  int order = -1;
  std::string side = "left";
  std::string method = "fourier";
  long M = 0;
};
int run_scatter(const Common& c, const ScatterArgs& a);

int run_scan(const Common& c, const Grid2& g, bool random_incidence);

int run_guided(const Common& c, const ModeSelect& m);

struct DispersionArgs {
  ModeSelect mode;
  double radius = 0.01;
  int half = 8;
  std::string summary;  // optional JSON with the fitted coefficients
};
int run_dispersion(const Common& c, const DispersionArgs& a);

struct AnomalyArgs {
  ModeSelect mode;
  double radius = 0.004;
  int half = 5;
  double window = 0.01;  // half-width K of the comparison window
  int window_samples = 41;
  std::string csv;
};
int run_anomaly(const Common& c, const AnomalyArgs& a);

struct BifurcateArgs {
  double gamma_min = 0.0;
  double gamma_max = 0.0;
  int gamma_index = 0;
  int points = 8;
  double first_offset = 1e-4;
  std::string summary;
};
int run_bifurcate(const Common& c, const BifurcateArgs& a);

struct EnhanceArgs {
  ModeSelect mode;
  double dispersion_radius = 0.01;
  double kt_min = 1e-4;
  double kt_max = 1e-2;
  int points = 9;
  std::string summary;
};
int run_enhance(const Common& c, const EnhanceArgs& a);

struct EvolveArgs {
  double kappa = 0.0;
  double dt = 0.002;
  long steps = 1000;
  std::string init = "symmetric";
  std::string init_file;
  double width = 3.0;
  long radius = 10;
  long Mx = 0;  // 0 = light-cone margin
  long record_every = 1;
};
int run_evolve(const Common& c, const EvolveArgs& a);

int run_validate(const Common& c, long points);

}  // namespace latres::cli
