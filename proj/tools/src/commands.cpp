#include "commands.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <spdlog/spdlog.h>

#include "latres/dtn.hpp"
#include "latres/resonance.hpp"
#include "latres/structure_io.hpp"
#include "latres/timedomain.hpp"
#include "output.hpp"

namespace latres::cli {

using nlohmann::json;

namespace {

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::invalid_argument, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void need(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::invalid_argument, what);
}

std::vector<double> grid(const std::vector<double>& range, long samples, const char* name) {
  need(range.size() == 2 && range[0] <= range[1], std::string(name) + ": range must be lo,hi");
  need(samples >= 1, std::string(name) + ": samples must be >= 1");
  return linspace(range[0], range[1], static_cast<std::size_t>(samples));
}

GuidedSearchOptions search_options(const Common& c, const ModeSelect& m) {
  GuidedSearchOptions o;
  o.kappa_samples = m.samples;
  o.omega_samples = m.samples;
  o.threads = c.threads;
  return o;
}

SearchWindow window_of(const ModeSelect& m) {
  need(m.window.size() == 4, "--window expects kappa_min,kappa_max,omega_min,omega_max");
  return {m.window[0], m.window[1], m.window[2], m.window[3]};
}

GuidedMode select_mode(const StructureParams& p, const Common& c, const ModeSelect& m) {
  const auto opts = search_options(c, m);
  if (!m.seed.empty()) {
    need(m.seed.size() == 2, "--mode-seed expects kappa,omega");
    return m.fixed_kappa ? refine_at_kappa(p, m.seed[0], m.seed[1], opts)
                         : refine_guided_mode(p, m.seed[0], m.seed[1], opts);
  }
  const auto modes = find_guided_modes(p, window_of(m), opts);
  spdlog::info("guided search found {} mode(s)", modes.size());
  if (m.index < 0 || static_cast<std::size_t>(m.index) >= modes.size()) {
    throw Error(ErrorCode::no_root, "mode index " + std::to_string(m.index) + " out of range (" +
                                        std::to_string(modes.size()) + " modes)");
  }
  return modes[static_cast<std::size_t>(m.index)];
}

json mode_json(const GuidedMode& g) {
  return {{"kappa", g.kappa},
          {"omega", g.omega},
          {"sigma_min", g.sigma_min},
          {"num_propagating", g.region_id},
          {"criteria_residual", g.criteria_residual}};
}

json dispersion_json(const DispersionFit& d) {
  json samples = json::array();
  for (const auto& s : d.samples) {
    samples.push_back({{"kappa_tilde", s.kappa_tilde}, {"omega", to_json(s.omega)}});
  }
  json higher = json::array();
  for (cplx h : d.higher) higher.push_back(to_json(h));
  return {{"kappa0", d.kappa0},
          {"omega0", d.omega0},
          {"ell1", d.ell1},
          {"ell2", to_json(d.ell2)},
          {"ell1_imag", d.ell1_imag},
          {"higher", higher},
          {"fit_radius", d.fit_radius},
          {"fit_residual", d.fit_residual},
          {"max_imag_omega", d.max_imag_omega},
          {"samples", samples}};
}

std::string csv_real(double x) { return format_real(x); }

DispersionFit dispersion_for(const StructureParams& p, const GuidedMode& mode, double radius,
                             int half) {
  need(radius > 0.0 && half >= 2, "dispersion: need radius > 0 and half >= 2");
  return continue_and_fit_dispersion(p, mode, symmetric_samples(radius, half));
}

LatticeState read_state(const std::string& path, int N) {
  const json doc = json::parse(slurp(path));
  const long Mx = doc.at("Mx").get<long>();
  auto s = LatticeState::zeros(N, Mx, doc.at("kappa").get<double>());
  auto cval = [](const json& j) { return cplx(j.at(0).get<double>(), j.at(1).get<double>()); };
  const auto& z = doc.at("z");
  need(static_cast<long>(z.size()) == N, "state: z must have N entries");
  for (long n = 0; n < N; ++n) s.z(n) = cval(z.at(static_cast<std::size_t>(n)));
  const auto& u = doc.at("u");
  need(static_cast<long>(u.size()) == 2 * Mx + 1, "state: u must have 2 Mx + 1 rows");
  for (long r = 0; r < 2 * Mx + 1; ++r) {
    const auto& row = u.at(static_cast<std::size_t>(r));
    need(static_cast<long>(row.size()) == N, "state: every u row must have N entries");
    for (long n = 0; n < N; ++n) s.u(r, n) = cval(row.at(static_cast<std::size_t>(n)));
  }
  return s;
}

}  // namespace

StructureParams load_config(const std::string& path) {
  if (path.empty()) throw Error(ErrorCode::invalid_argument, "--config is required");
  const std::string text = slurp(path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::invalid_argument, std::string("config: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("structure")) return parse_structure(text);
  const json& s = doc.at("structure");
  if (s.is_string()) {
    const auto rel = std::filesystem::path(path).parent_path() / s.get<std::string>();
    return load_structure(rel);
  }
  return parse_structure(s.dump());
}

int run_regions(const Common& c, const Grid2& g) {
  const auto p = load_config(c.config);
  const auto diagram = region_diagram(p, grid(g.kappa, g.kappa_samples, "kappa"),
                                      grid(g.omega, g.omega_samples, "omega"), c.threads);
  Output out(c.out);
  write_region_csv(out.stream(), diagram);
  return 0;
}

int run_bands(const Common& c, long kappa_samples) {
  const auto p = load_config(c.config);
  Output out(c.out);
  auto& os = out.stream();
  os << "kappa";
  for (int j = 0; j < p.N; ++j) os << ",band_" << j;
  os << '\n';
  for (double k : grid({-0.5, 0.5}, kappa_samples, "kappa")) {
    os << csv_real(k);
    for (double b : waveguide_bands(p, k)) os << ',' << csv_real(b);
    os << '\n';
  }
  return 0;
}

int run_scatter(const Common& c, const ScatterArgs& a) {
  const auto p = load_config(c.config);
  need(a.side == "left" || a.side == "right", "--side must be left or right");
  need(a.method == "fourier" || a.method == "dtn", "--method must be fourier or dtn");
  const auto point = BlochPoint::real(a.kappa, a.omega);
  const auto hs = classify_harmonics(p, point);
  require_off_threshold(hs);
  const auto inc = a.side == "left" ? IncidentField::unit_left(hs, a.order)
                                    : IncidentField::unit_right(hs, a.order);
  json doc = {{"kappa", a.kappa},    {"omega", a.omega}, {"method", a.method},
              {"side", a.side},      {"propagating", hs.propagating}};
  if (a.method == "fourier") {
    const auto sol = solve_scattering(p, point, inc);
    doc["T"] = sol.T;
    doc["R"] = sol.R;
    doc["energy_residual"] = sol.energy_residual;
    doc["condition"] = sol.condition;
    doc["near_singular"] = sol.near_singular;
    doc["a_minus"] = to_json(sol.a_minus);
    doc["b_plus"] = to_json(sol.b_plus);
    doc["c"] = to_json(sol.c);
  } else {
    const long M = a.M > 0 ? a.M : default_truncation(hs);
    const auto sol = solve_truncated(p, point, inc, M);
    const auto ff = far_field(sol);
    const auto cv = cross_validate(p, point, inc, M);
    doc["M"] = M;
    doc["T"] = ff.T;
    doc["R"] = ff.R;
    doc["condition"] = sol.condition;
    doc["near_singular"] = sol.near_singular;
    doc["relative_residual"] = sol.relative_residual;
    doc["a_minus"] = to_json(ff.a_minus);
    doc["b_plus"] = to_json(ff.b_plus);
    doc["z"] = to_json(sol.z);
    doc["fourier_discrepancy"] = cv.discrepancy;
  }
  write_json(c.out, doc);
  return 0;
}

int run_scan(const Common& c, const Grid2& g, bool random_incidence) {
  const auto p = load_config(c.config);
  IncidentFactory factory;
  if (random_incidence) {
    // Amplitudes are a function of (seed, point) so output does not depend
    // on scheduling.
    factory = [seed = c.seed, N = p.N](const HarmonicSet& hs) {
      const Harmonic& h = hs.harmonics.front();
      std::seed_seq key{seed, std::bit_cast<std::uint64_t>(h.phi.real()),
                        std::bit_cast<std::uint64_t>(h.chi.real())};
      std::mt19937_64 rng(key);
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      auto inc = IncidentField::none(N);
      for (int l : hs.propagating) {
        inc.a_inc[static_cast<std::size_t>(l)] = {u(rng), u(rng)};
        inc.b_inc[static_cast<std::size_t>(l)] = {u(rng), u(rng)};
      }
      return inc;
    };
  }
  const auto rows = scan_transmission(p, grid(g.kappa, g.kappa_samples, "kappa"),
                                      grid(g.omega, g.omega_samples, "omega"), factory, c.threads);
  Output out(c.out);
  write_scan_csv(out.stream(), rows);
  return 0;
}

int run_guided(const Common& c, const ModeSelect& m) {
  const auto p = load_config(c.config);
  const auto modes = find_guided_modes(p, window_of(m), search_options(c, m));
  json list = json::array();
  for (const auto& g : modes) list.push_back(mode_json(g));
  write_json(c.out, {{"modes", list}});
  return 0;
}

int run_dispersion(const Common& c, const DispersionArgs& a) {
  const auto p = load_config(c.config);
  const auto mode = select_mode(p, c, a.mode);
  const auto fit = dispersion_for(p, mode, a.radius, a.half);
  {
    Output out(c.out);
    auto& os = out.stream();
    os << "kappa,re_omega,im_omega\n";
    for (const auto& s : fit.samples) {
      os << csv_real(fit.kappa0 + s.kappa_tilde) << ',' << csv_real(s.omega.real()) << ','
         << csv_real(s.omega.imag()) << '\n';
    }
  }
  if (!a.summary.empty()) {
    write_json(a.summary, {{"mode", mode_json(mode)}, {"dispersion", dispersion_json(fit)}});
  }
  return 0;
}

int run_anomaly(const Common& c, const AnomalyArgs& a) {
  const auto p = load_config(c.config);
  const auto mode = select_mode(p, c, a.mode);
  const auto disp = dispersion_for(p, mode, 2.5 * a.radius, 8);
  std::vector<double> kts;
  for (double kt : symmetric_samples(a.radius, a.half)) {
    if (kt != 0.0) kts.push_back(kt);
  }
  const auto curves = peak_dip_curves(p, disp, kts, {}, c.threads);
  const auto fit = fit_anomaly(p, disp, curves);
  const auto err = approximation_error(p, fit, a.window, ApproxVariant::one_sided,
                                       a.window_samples, c.threads);
  const auto err_half = approximation_error(p, fit, 0.5 * a.window, ApproxVariant::one_sided,
                                            a.window_samples, c.threads);
  json curve_rows = json::array();
  for (const auto& r : curves) {
    curve_rows.push_back({{"kappa_tilde", r.kappa_tilde},
                          {"omega_a", r.omega_a},
                          {"omega_b", r.omega_b},
                          {"T_at_a", r.T_at_a},
                          {"T_at_b", r.T_at_b}});
  }
  json doc = {{"mode", mode_json(mode)},
              {"kappa0", fit.kappa0},
              {"omega0", fit.omega0},
              {"ell1", fit.ell1},
              {"ell2", to_json(fit.ell2)},
              {"r2", fit.r2},
              {"t2", fit.t2},
              {"t0", fit.t0},
              {"r0", fit.r0},
              {"zeta1", fit.zeta1},
              {"eta", fit.eta},
              {"diagnostics",
               {{"ell1_peak", fit.ell1_peak},
                {"ell1_dip", fit.ell1_dip},
                {"omega0_peak", fit.omega0_peak},
                {"omega0_dip", fit.omega0_dip},
                {"unitarity", fit.unitarity},
                {"curve_fit_residual", fit.curve_fit_residual},
                {"background_fit_residual", fit.background_fit_residual},
                {"window", a.window},
                {"sup_error", err.sup_error},
                {"sup_error_half_window", err_half.sup_error},
                {"max_approx", err.max_approx}}},
              {"curves", curve_rows}};
  write_json(c.out, doc);

  if (!a.csv.empty()) {
    const auto ks = linspace(-a.window, a.window, static_cast<std::size_t>(a.window_samples));
    const auto ss = linspace(-1.0, 1.0, static_cast<std::size_t>(a.window_samples));
    const double spread = 4.0 * std::abs(fit.ell2) * a.window * a.window;
    std::vector<double> direct(ks.size() * ss.size());
    parallel_for(direct.size(), c.threads, [&](std::size_t i) {
      const double kt = ks[i / ss.size()];
      const double w = -fit.ell1 * kt - fit.ell2.real() * kt * kt + ss[i % ss.size()] * spread;
      try {
        direct[i] = solve_unit_left(p, BlochPoint::real(fit.kappa0 + kt, fit.omega0 + w)).T;
      } catch (const Error&) {
        direct[i] = std::nan("");
      }
    });
    Output out(a.csv);
    auto& os = out.stream();
    os << "kappa_tilde,omega_tilde,T_direct,T_approx,T_approx_two_sided\n";
    for (std::size_t i = 0; i < direct.size(); ++i) {
      const double kt = ks[i / ss.size()];
      const double w = -fit.ell1 * kt - fit.ell2.real() * kt * kt + ss[i % ss.size()] * spread;
      os << csv_real(kt) << ',' << csv_real(w) << ',' << csv_real(direct[i]) << ','
         << csv_real(approx_transmission(fit, kt, w)) << ','
         << csv_real(approx_transmission_two_sided(fit, kt, w)) << '\n';
    }
  }
  return 0;
}

int run_bifurcate(const Common& c, const BifurcateArgs& a) {
  const auto p = load_config(c.config);
  BifurcationOptions opts;
  opts.gamma_index = a.gamma_index;
  const auto point = find_bifurcation(p, a.gamma_min, a.gamma_max, opts);
  spdlog::info("critical coupling {:.15g} at omega {:.15g}", point.gamma_star, point.omega_star);
  // An empty trace returns the curvature, which fixes the mode-supporting side.
  const auto probe = trace_branch(p, point, {}, opts);
  std::vector<double> gammas;
  double offset = a.first_offset;
  for (int i = 0; i < a.points; ++i, offset *= 2.0) {
    const double g = point.gamma_star + probe.g_curvature_sign * offset;
    if (g < a.gamma_min || g > a.gamma_max) break;
    gammas.push_back(g);
  }
  need(!gammas.empty(), "bifurcate: no branch sample fits inside the gamma bracket");
  const auto branch = trace_branch(p, point, gammas, opts);
  Output out(c.out);
  auto& os = out.stream();
  os << "gamma0,kappa0,omega0\n";
  for (const auto& s : branch.samples) {
    os << csv_real(s.gamma0) << ',' << csv_real(s.kappa0) << ',' << csv_real(s.omega0) << '\n';
  }
  if (!a.summary.empty()) {
    json samples = json::array();
    for (const auto& s : branch.samples) {
      samples.push_back({{"gamma0", s.gamma0},
                         {"kappa0", s.kappa0},
                         {"omega0", s.omega0},
                         {"sigma_min", s.sigma_min},
                         {"mirror_residual", s.mirror_residual}});
    }
    write_json(a.summary, {{"gamma_star", point.gamma_star},
                           {"omega_star", point.omega_star},
                           {"residual", point.residual},
                           {"determinant", point.determinant},
                           {"g_curvature", branch.g_curvature},
                           {"g_curvature_sign", branch.g_curvature_sign},
                           {"sqrt_slope", branch.sqrt_slope},
                           {"samples", samples}});
  }
  return 0;
}

int run_enhance(const Common& c, const EnhanceArgs& a) {
  const auto p = load_config(c.config);
  need(a.kt_min > 0.0 && a.kt_max > a.kt_min && a.points >= 2, "enhance: bad kappa_tilde range");
  const auto mode = select_mode(p, c, a.mode);
  const auto disp = dispersion_for(p, mode, a.dispersion_radius, 8);
  const auto rows = enhancement_scan(
      p, disp, logspace(std::log10(a.kt_min), std::log10(a.kt_max), static_cast<std::size_t>(a.points)),
      c.threads);
  Output out(c.out);
  auto& os = out.stream();
  os << "kappa_tilde,omega_opt,amplitude\n";
  for (const auto& r : rows) {
    os << csv_real(r.kappa_tilde) << ',' << csv_real(r.omega_opt) << ',' << csv_real(r.amplitude)
       << '\n';
    if (r.near_singular) spdlog::warn("kappa_tilde {:.6g}: system near singular, amplitude unresolved", r.kappa_tilde);
  }
  if (!a.summary.empty()) {
    const auto f = fit_enhancement(rows);
    write_json(a.summary, {{"mode", mode_json(mode)},
                           {"ell1", disp.ell1},
                           {"ell2", to_json(disp.ell2)},
                           {"slope", f.slope},
                           {"d1", f.d1},
                           {"d2", f.d2},
                           {"rows_used", f.rows_used}});
  }
  return 0;
}

int run_evolve(const Common& c, const EvolveArgs& a) {
  const auto p = load_config(c.config);
  const double horizon = a.dt * double(a.steps);
  LatticeState s;
  if (a.init == "file") {
    need(!a.init_file.empty(), "--init file needs --init-file");
    s = read_state(a.init_file, p.N);
  } else {
    const long support = a.init == "random" ? a.radius : static_cast<long>(std::ceil(6.0 * a.width));
    const long Mx =
        a.Mx > 0 ? a.Mx : support + light_cone_margin(omega_norm_bound(p), horizon);
    if (a.init == "symmetric") {
      s = symmetric_pulse(p.N, Mx, a.kappa, a.width);
    } else if (a.init == "antisymmetric") {
      s = antisymmetric_pulse(p.N, Mx, a.kappa, a.width);
    } else if (a.init == "random") {
      s = random_localized(p.N, Mx, a.kappa, a.radius, c.seed);
    } else {
      throw Error(ErrorCode::invalid_argument, "--init must be symmetric, antisymmetric, random or file");
    }
  }
  spdlog::info("evolving on |m| <= {} for {} steps", s.Mx, a.steps);
  EvolveOptions opts;
  opts.record_every = a.record_every;
  const auto res = evolve(p, s, a.dt, a.steps, opts);
  Output out(c.out);
  auto& os = out.stream();
  os << "t,norm,waveguide_energy\n";
  for (std::size_t i = 0; i < res.t.size(); ++i) {
    os << csv_real(res.t[i]) << ',' << csv_real(res.norm[i]) << ','
       << csv_real(res.waveguide_energy[i]) << '\n';
  }
  spdlog::info("norm drift {:.3e}, max |z| {:.3e}", res.drift, res.max_z);
  return 0;
}

}  // namespace latres::cli
