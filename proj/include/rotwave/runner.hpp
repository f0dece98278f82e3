#pragma once

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "rotwave/io.hpp"

namespace rotwave {

/// Exit codes of a run: 0 success, 2 validation failure, 3 numerical failure
/// (divergence / blow-up alternative), 4 verification FAIL.
enum ExitCode : int {
  kOk = 0,
  kValidationFailure = 2,
  kNumericalFailure = 3,
  kVerificationFailure = 4
};

struct ValidationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct DynamicsConfig {
  double T = 1.0;
  double dt = 1e-3;
  std::string method = "rotating_frame";
  double delta = 1e-2;
  std::uint64_t seed = 1;
  int seeds = 1;
  int samples = 50;
};

struct VerifyConfig {
  int num_fields = 200;
  std::uint64_t seed = 7;
  double omega_fraction = 0.5;       // sandwich checked at Omega = fraction * gamma
  double tol_inequality = 1e-8;      // allowed negative slack in the inequality battery
  double tol_diamagnetic = 1e-8;     // factor on max |grad f|
  double tol_strict = 0.0;           // required positive slack for strict inequalities
};

struct SweepConfig {
  std::vector<double> c_values;
  std::optional<double> m;
};

struct NonexistenceConfig {
  std::vector<double> lambdas{2.0, 4.0, 8.0};
};

struct RunConfig {
  std::string experiment;
  ModelParams model;
  std::optional<GridSpec> grid;
  int grid_points = 128;  // used when grid is absent
  MinimizeSpec minimize;
  DynamicsConfig dynamics;
  VerifyConfig verify;
  SweepConfig sweep;
  NonexistenceConfig nonexistence;
  std::filesystem::path output_dir = "out";
  std::string tag;
  int threads = 1;

  GridSpec resolved_grid() const {
    return grid ? *grid : default_grid_spec(model, grid_points);
  }
};

namespace runner_detail {

using nlohmann::json;

template <typename T>
T get_or(const json& j, const std::string& key, T fallback, const std::string& path) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const std::exception&) {
    throw ValidationError(path + "." + key + ": wrong type");
  }
}

inline InitKind parse_init_kind(const std::string& s) {
  if (s == "gaussian_product") return InitKind::GaussianProduct;
  if (s == "vortex_seeded") return InitKind::VortexSeeded;
  if (s == "concentration") return InitKind::Concentration;
  if (s == "dilation") return InitKind::Dilation;
  throw ValidationError("minimize.init.kind: unknown kind '" + s + "'");
}

inline const char* init_kind_name(InitKind k) {
  switch (k) {
    case InitKind::GaussianProduct: return "gaussian_product";
    case InitKind::VortexSeeded: return "vortex_seeded";
    case InitKind::Concentration: return "concentration";
    case InitKind::Dilation: return "dilation";
  }
  return "?";
}

}  // namespace runner_detail

inline RunConfig parse_config(const nlohmann::json& j) {
  using runner_detail::get_or;
  using nlohmann::json;
  RunConfig cfg;
  if (!j.contains("experiment")) throw ValidationError("experiment: required");
  cfg.experiment = j.at("experiment").get<std::string>();

  const json jm = j.value("model", json::object());
  cfg.model.dim = get_or<int>(jm, "dim", 2, "model");
  cfg.model.p = get_or<double>(jm, "p", 2.0, "model");
  cfg.model.gamma = get_or<std::vector<double>>(jm, "gamma",
                                                std::vector<double>(cfg.model.dim, 1.0), "model");
  cfg.model.omega = get_or<double>(jm, "omega",
                                   cfg.model.gamma.empty() ? 1.0 : cfg.model.gamma[0], "model");
  cfg.model.interaction_on = get_or<bool>(jm, "interaction_on", true, "model");
  try {
    cfg.model.validate();
  } catch (const std::invalid_argument& e) {
    throw ValidationError(e.what());
  }

  if (j.contains("grid")) {
    const json jg = j.at("grid");
    GridSpec gs;
    gs.dim = get_or<int>(jg, "dim", cfg.model.dim, "grid");
    gs.half_widths = get_or<std::vector<double>>(
        jg, "half_widths", default_grid_spec(cfg.model, 128).half_widths, "grid");
    gs.points = get_or<std::vector<int>>(jg, "points", std::vector<int>(gs.dim, 128), "grid");
    try {
      gs.validate();
    } catch (const std::invalid_argument& e) {
      throw ValidationError(std::string("grid: ") + e.what());
    }
    if (gs.dim != cfg.model.dim) throw ValidationError("grid.dim: must match model.dim");
    cfg.grid = gs;
  }
  cfg.grid_points = get_or<int>(j, "grid_points", 128, "");

  const json jmin = j.value("minimize", json::object());
  cfg.minimize.c = get_or<double>(jmin, "c", 1.0, "minimize");
  if (jmin.contains("m")) cfg.minimize.m = jmin.at("m").get<double>();
  cfg.minimize.step = get_or<double>(jmin, "step", 1e-2, "minimize");
  cfg.minimize.max_iters = get_or<int>(jmin, "max_iters", 100000, "minimize");
  cfg.minimize.tol_residual = get_or<double>(jmin, "tol_residual", 1e-8, "minimize");
  cfg.minimize.tol_energy = get_or<double>(jmin, "tol_energy", 1e-13, "minimize");
  const json jinit = jmin.value("init", json::object());
  cfg.minimize.init.kind = runner_detail::parse_init_kind(
      get_or<std::string>(jinit, "kind", "gaussian_product", "minimize.init"));
  cfg.minimize.init.lambda = get_or<double>(jinit, "lambda", 1.0, "minimize.init");
  cfg.minimize.init.base = get_or<std::string>(jinit, "base", "gaussian", "minimize.init");
  try {
    cfg.minimize.validate();
  } catch (const std::invalid_argument& e) {
    throw ValidationError(e.what());
  }

  const json jd = j.value("dynamics", json::object());
  cfg.dynamics.T = get_or<double>(jd, "T", 1.0, "dynamics");
  cfg.dynamics.dt = get_or<double>(jd, "dt", 1e-3, "dynamics");
  cfg.dynamics.method = get_or<std::string>(jd, "method", "rotating_frame", "dynamics");
  cfg.dynamics.delta = get_or<double>(jd, "delta", 1e-2, "dynamics");
  cfg.dynamics.seed = get_or<std::uint64_t>(jd, "seed", 1, "dynamics");
  cfg.dynamics.seeds = get_or<int>(jd, "seeds", 1, "dynamics");
  cfg.dynamics.samples = get_or<int>(jd, "samples", 50, "dynamics");
  if (cfg.dynamics.method != "rotating_frame" && cfg.dynamics.method != "direct_split")
    throw ValidationError("dynamics.method: must be rotating_frame or direct_split");
  if (!(cfg.dynamics.dt > 0.0)) throw ValidationError("dynamics.dt: must be > 0");

  const json jv = j.value("verify", json::object());
  cfg.verify.num_fields = get_or<int>(jv, "num_fields", 200, "verify");
  cfg.verify.seed = get_or<std::uint64_t>(jv, "seed", 7, "verify");
  cfg.verify.omega_fraction = get_or<double>(jv, "omega_fraction", 0.5, "verify");
  cfg.verify.tol_inequality = get_or<double>(jv, "tol_inequality", 1e-8, "verify");
  cfg.verify.tol_diamagnetic = get_or<double>(jv, "tol_diamagnetic", 1e-8, "verify");
  cfg.verify.tol_strict = get_or<double>(jv, "tol_strict", 0.0, "verify");
  if (!(cfg.verify.omega_fraction > 0.0 && cfg.verify.omega_fraction < 1.0))
    throw ValidationError("verify.omega_fraction: must lie in (0, 1)");

  const json js = j.value("sweep", json::object());
  cfg.sweep.c_values = get_or<std::vector<double>>(js, "c_values", {}, "sweep");
  if (js.contains("m")) cfg.sweep.m = js.at("m").get<double>();

  const json jn = j.value("nonexistence", json::object());
  cfg.nonexistence.lambdas =
      get_or<std::vector<double>>(jn, "lambdas", {2.0, 4.0, 8.0}, "nonexistence");

  cfg.output_dir = get_or<std::string>(j, "output_dir", "out", "");
  cfg.tag = get_or<std::string>(j, "tag", "", "");
  cfg.threads = get_or<int>(j, "threads", 1, "");
  if (cfg.threads < 1) throw ValidationError("threads: must be >= 1");

  static const std::vector<std::string> known{"ground",    "local_ground", "q",
                                              "verify",    "evolve",       "stability",
                                              "sweep",     "nonexistence"};
  if (std::find(known.begin(), known.end(), cfg.experiment) == known.end())
    throw ValidationError("experiment: unknown experiment '" + cfg.experiment + "'");
  return cfg;
}

inline nlohmann::json resolved_config_json(const RunConfig& cfg) {
  using nlohmann::json;
  const GridSpec gs = cfg.resolved_grid();
  json j;
  j["experiment"] = cfg.experiment;
  j["model"] = {{"dim", cfg.model.dim},
                {"p", cfg.model.p},
                {"omega", cfg.model.omega},
                {"gamma", cfg.model.gamma},
                {"interaction_on", cfg.model.interaction_on}};
  j["grid"] = {{"dim", gs.dim}, {"half_widths", gs.half_widths}, {"points", gs.points}};
  json jm = {{"c", cfg.minimize.c},
             {"step", cfg.minimize.step},
             {"max_iters", cfg.minimize.max_iters},
             {"tol_residual", cfg.minimize.tol_residual},
             {"tol_energy", cfg.minimize.tol_energy},
             {"init",
              {{"kind", runner_detail::init_kind_name(cfg.minimize.init.kind)},
               {"lambda", cfg.minimize.init.lambda},
               {"base", cfg.minimize.init.base}}}};
  if (cfg.minimize.m) jm["m"] = *cfg.minimize.m;
  j["minimize"] = jm;
  j["dynamics"] = {{"T", cfg.dynamics.T},       {"dt", cfg.dynamics.dt},
                   {"method", cfg.dynamics.method}, {"delta", cfg.dynamics.delta},
                   {"seed", cfg.dynamics.seed},  {"seeds", cfg.dynamics.seeds},
                   {"samples", cfg.dynamics.samples}};
  j["verify"] = {{"num_fields", cfg.verify.num_fields},
                 {"seed", cfg.verify.seed},
                 {"omega_fraction", cfg.verify.omega_fraction},
                 {"tol_inequality", cfg.verify.tol_inequality},
                 {"tol_diamagnetic", cfg.verify.tol_diamagnetic},
                 {"tol_strict", cfg.verify.tol_strict}};
  json jsweep = {{"c_values", cfg.sweep.c_values}};
  if (cfg.sweep.m) jsweep["m"] = *cfg.sweep.m;
  j["sweep"] = jsweep;
  j["nonexistence"] = {{"lambdas", cfg.nonexistence.lambdas}};
  j["output_dir"] = cfg.output_dir.string();
  j["tag"] = cfg.tag;
  j["threads"] = cfg.threads;
  return j;
}

struct RunResult {
  int exit_code = kOk;
  std::filesystem::path manifest_path;
  std::vector<std::string> log;
};

namespace runner_detail {

struct Artifacts {
  std::filesystem::path dir;
  std::vector<std::filesystem::path> files;

  std::filesystem::path path(const std::string& name) {
    files.push_back(dir / name);
    return files.back();
  }
};

inline void write_json(const std::filesystem::path& p, const nlohmann::json& j) {
  std::ofstream os(p);
  if (!os) throw std::runtime_error("cannot open " + p.string());
  os << j.dump(2) << "\n";
}

inline PropagationMethod parse_method(const std::string& s) {
  return s == "direct_split" ? PropagationMethod::DirectSplit
                             : PropagationMethod::RotatingFrame;
}

struct VerifyCheck {
  std::string name;
  bool pass = false;
  double worst = 0.0;
  std::string note;
};

/// The inequality battery: equivalent norms, Sigma == Sigma_A, magnetic
/// Gagliardo-Nirenberg with the sharp constant, the 2 gamma bound, the
/// harmonic ground-eigenvalue bound, and the pointwise diamagnetic check,
/// each over num_fields sampled random smooth fields.
inline std::vector<VerifyCheck> run_verify_battery(const RunConfig& cfg,
                                                   std::shared_ptr<const Grid> grid) {
  const ModelParams& mp = cfg.model;
  const VerifyConfig& vc = cfg.verify;
  const Grid& g = *grid;

  ModelParams sub = mp;  // subcritical-rotation model for the sandwich
  sub.omega = vc.omega_fraction * mp.gamma[0];
  const auto consts = norm_equivalence_constants(sub);

  const double cr = sharp_gn_constant(mp.dim, mp.p + 1.0);
  const double alpha = mp.dim * (mp.p - 1.0) / 2.0;
  const double beta = (2.0 * (mp.p + 1.0) - mp.dim * (mp.p - 1.0)) / 2.0;

  VerifyCheck sandwich{"L2.1_norm_sandwich (C1=" + std::to_string(consts.c1) +
                           ", C2=" + std::to_string(consts.c2) + ")",
                       true, 0.0, ""};
  VerifyCheck sigma_equiv{"L2.2_sigma_equivalence", true, 0.0, ""};
  VerifyCheck gn{"L2.3_magnetic_gn (C_r=" + std::to_string(cr) + ")", true, 1e300, ""};
  VerifyCheck diamag{"L2.3_diamagnetic", true, 0.0, ""};
  VerifyCheck two_gamma{"L2.4_two_gamma_bound", true, 0.0, ""};
  VerifyCheck omega0{"L2.5_omega0_bound", true, 0.0, ""};

  for (int k = 0; k < vc.num_fields; ++k) {
    ComplexField f = random_unit_mass_field(grid, vc.seed + static_cast<std::uint64_t>(k));
    const EnergyBreakdown b = evaluate(f, sub);

    // ||x f||^2 and planar pieces
    KahanSum xf2;
    for (std::size_t i = 0; i < f.size(); ++i) {
      double x2 = 0.0;
      for (int j = 0; j < g.dim(); ++j) {
        const double x = g.coords(j)[g.axis_index(i, j)];
        x2 += x * x;
      }
      xf2.add(x2 * std::norm(f[i]));
    }
    const double xf_sq = xf2.value() * g.cell_volume();
    const double grad_sq = 2.0 * b.kinetic;
    const double mid = grad_sq + 2.0 * b.potential_full - 2.0 * b.angular;
    const double base = grad_sq + xf_sq;

    sandwich.worst = std::min({consts.c1 * base - mid, mid - consts.c2 * base,
                               sandwich.pass ? 1e300 : sandwich.worst});
    if (consts.c1 * base - mid < -vc.tol_inequality * base ||
        mid - consts.c2 * base < -vc.tol_inequality * base)
      sandwich.pass = false;

    const double mag_sq = 2.0 * b.magnetic_kinetic;
    const double s1 = 6.0 * (grad_sq + xf_sq) - mag_sq;
    const double s2 = 2.0 * (mag_sq + xf_sq) - grad_sq;
    sigma_equiv.worst = std::min({s1, s2, sigma_equiv.worst});
    if (s1 < -vc.tol_inequality * base || s2 < -vc.tol_inequality * base)
      sigma_equiv.pass = false;

    const double lhs = lp_integral(f, mp.p + 1.0);
    const double rhs = cr * std::pow(std::sqrt(mag_sq), alpha) * std::pow(1.0, beta);
    const double slack = rhs - lhs;
    gn.worst = std::min(gn.worst, slack);
    if (!(slack > vc.tol_strict)) gn.pass = false;

    const auto dia = check_diamagnetic(f, sub, vc.tol_diamagnetic);
    diamag.worst = std::max(diamag.worst, dia.max_excess);
    if (!dia.pass) diamag.pass = false;

    // planar magnetic kinetic only
    ModelParams crit = mp;
    crit.omega = mp.gamma[0];
    const EnergyBreakdown bc = evaluate(f, crit);
    double planar = 2.0 * bc.magnetic_kinetic;
    for (int j = 2; j < g.dim(); ++j) {
      // subtract the transverse plain-derivative part
      const ComplexField dj = fourier_derivative(f, j);
      planar -= integrate_abs2(dj);
    }
    const double tg = planar - 2.0 * mp.gamma[0] * bc.mass;
    two_gamma.worst = std::min(two_gamma.worst, tg);
    if (tg < -vc.tol_inequality) two_gamma.pass = false;

    const double om = bc.magnetic_kinetic + bc.potential_partial - crit.omega0() * bc.mass;
    omega0.worst = std::min(omega0.worst, om);
    if (om < -vc.tol_inequality) omega0.pass = false;
  }

  // equality cases
  {
    ModelParams crit = mp;
    crit.omega = mp.gamma[0];
    InitSpec init;
    ComplexField gp = make_initial(init, 1.0, crit, grid);
    const EnergyBreakdown bg = evaluate(gp, crit);
    double planar = 2.0 * bg.magnetic_kinetic;
    for (int j = 2; j < g.dim(); ++j) planar -= integrate_abs2(fourier_derivative(gp, j));
    const double err = std::abs(planar - 2.0 * crit.gamma[0] * bg.mass);
    two_gamma.note = "gaussian equality err=" + std::to_string(err);
    if (err > vc.tol_inequality) two_gamma.pass = false;
  }
  return {sandwich, sigma_equiv, gn, diamag, two_gamma, omega0};
}

}  // namespace runner_detail

inline RunResult run_config(const RunConfig& cfg) {
  using nlohmann::json;
  using runner_detail::Artifacts;
  using runner_detail::write_json;

  RunResult out;
  Artifacts art;
  art.dir = cfg.output_dir;
  std::filesystem::create_directories(art.dir);
  write_json(art.dir / "resolved_config.json", resolved_config_json(cfg));
  art.files.push_back(art.dir / "resolved_config.json");

  auto log = [&](const std::string& s) {
    out.log.push_back(s);
    std::cout << s << "\n";
  };

  try {
    auto grid = build_grid(cfg.resolved_grid());

    if (cfg.experiment == "q") {
      const RadialProfile prof = solve_ground_profile(cfg.model.dim, cfg.model.p + 1.0);
      io::profile_to_csv(art.path("q_profile.csv"), prof);
      json cert = io::certificate_to_json(prof);
      cert["sharp_gn_constant"] = sharp_gn_constant(cfg.model.dim, cfg.model.p + 1.0);
      if (cfg.model.mass_critical()) cert["critical_mass"] = critical_mass(cfg.model.dim);
      write_json(art.path("q_certificate.json"), cert);
      log("q: W(0)=" + std::to_string(prof.w0) + " mass=" + std::to_string(prof.mass));
    } else if (cfg.experiment == "ground" || cfg.experiment == "local_ground") {
      MinimizerResult res;
      if (cfg.experiment == "ground") {
        res = minimize_global(cfg.minimize, cfg.model, grid);
      } else {
        if (!cfg.minimize.m) throw ValidationError("minimize.m: required for local_ground");
        res = minimize_local_ball(cfg.minimize, cfg.model, grid);
        write_json(art.path("bounds.json"),
                   io::bounds_to_json(analytic_bounds(cfg.minimize.c, *cfg.minimize.m, cfg.model)));
      }
      write_json(art.path("result.json"), io::result_to_json(res));
      if (res.status == MinimizeStatus::Converged) {
        io::write_rwf(art.path("field.rwf"), res.field, cfg.model);
        art.files.push_back(art.dir / "field.rwf.bin");
        write_json(art.path("breakdown.json"),
                   io::breakdown_to_json(evaluate(res.field, cfg.model)));
      }
      log("minimize: status=" + std::string(to_string(res.status)) +
          " energy=" + std::to_string(res.energy) + " residual=" + std::to_string(res.residual));
      if (res.status == MinimizeStatus::NoMinimizerEvidence) out.exit_code = kNumericalFailure;
      if (res.status == MinimizeStatus::BoundaryAttached ||
          res.status == MinimizeStatus::IterationLimit)
        out.exit_code = kNumericalFailure;
    } else if (cfg.experiment == "verify") {
      const auto checks = runner_detail::run_verify_battery(cfg, grid);
      json jout = json::array();
      bool all = true;
      for (const auto& c : checks) {
        log(std::string(c.pass ? "[PASS] " : "[FAIL] ") + c.name +
            " worst=" + std::to_string(c.worst) + (c.note.empty() ? "" : " " + c.note));
        jout.push_back({{"name", c.name}, {"pass", c.pass}, {"worst", c.worst}, {"note", c.note}});
        all = all && c.pass;
      }
      write_json(art.path("verify.json"), jout);
      if (!all) out.exit_code = kVerificationFailure;
    } else if (cfg.experiment == "evolve") {
      ComplexField u0 = make_initial(cfg.minimize.init, cfg.minimize.c, cfg.model, grid);
      PropagateOptions opts;
      opts.T = cfg.dynamics.T;
      opts.dt = cfg.dynamics.dt;
      opts.method = runner_detail::parse_method(cfg.dynamics.method);
      opts.samples = cfg.dynamics.samples;
      const EvolutionTrace trace = propagate(u0, cfg.model, opts);
      io::trace_to_csv(art.path("trace.csv"), trace);
      const ConservationSummary cs = conservation_report(trace, cfg.model);
      json jout{{"mass_drift", cs.mass_drift},
                {"energy_drift", cs.energy_drift},
                {"angular_drift", cs.angular_drift},
                {"max_identity_residual", cs.max_identity_residual},
                {"blew_up", trace.blew_up}};
      const auto monitor = global_existence_monitor(trace, cfg.model);
      if (monitor.status != MonitorStatus::Skipped) {
        jout["global_existence"] = {{"pass", monitor.status == MonitorStatus::Pass},
                                    {"a", monitor.a},
                                    {"b", monitor.b},
                                    {"b0", monitor.b0},
                                    {"max_h_gamma", monitor.max_h_gamma}};
      }
      write_json(art.path("conservation.json"), jout);
      log("evolve: mass_drift=" + std::to_string(cs.mass_drift) +
          " energy_drift=" + std::to_string(cs.energy_drift));
      if (trace.blew_up) out.exit_code = kNumericalFailure;
    } else if (cfg.experiment == "stability") {
      MinimizerResult phi = cfg.minimize.m ? minimize_local_ball(cfg.minimize, cfg.model, grid)
                                           : minimize_global(cfg.minimize, cfg.model, grid);
      if (phi.status != MinimizeStatus::Converged)
        throw std::runtime_error("stability: minimizer did not converge: " + phi.message);
      json reports = json::array();
      bool any_growth = false;
      for (int s = 0; s < cfg.dynamics.seeds; ++s) {
        const StabilityReport rep = stability_experiment(
            phi, cfg.dynamics.delta, cfg.dynamics.T, cfg.model,
            cfg.dynamics.seed + static_cast<std::uint64_t>(s), cfg.dynamics.dt,
            cfg.dynamics.samples);
        reports.push_back(io::stability_to_json(rep));
        log("stability seed=" + std::to_string(rep.seed) + " max_distance=" +
            std::to_string(rep.max_distance) + " verdict=" +
            (rep.verdict == StabilityVerdict::StableAtScale ? "STABLE_AT_SCALE"
                                                            : "GROWTH_DETECTED"));
        any_growth = any_growth || rep.verdict == StabilityVerdict::GrowthDetected;
      }
      write_json(art.path("stability.json"), reports);
      if (any_growth) out.exit_code = kNumericalFailure;
    } else if (cfg.experiment == "sweep") {
      if (cfg.sweep.c_values.empty()) throw ValidationError("sweep.c_values: required");
      struct Row {
        double c, m, energy, omega, h_gamma, residual;
        bool boundary;
        std::string status;
      };
      std::vector<Row> rows(cfg.sweep.c_values.size());
      std::atomic<std::size_t> next{0};
      auto worker = [&]() {
        while (true) {
          const std::size_t i = next.fetch_add(1);
          if (i >= cfg.sweep.c_values.size()) break;
          MinimizeSpec ms = cfg.minimize;
          ms.c = cfg.sweep.c_values[i];
          ms.m = cfg.sweep.m;
          char buf[32];
          std::snprintf(buf, sizeof(buf), "job_%03zu", i);
          Artifacts sub;
          sub.dir = art.dir / buf;
          std::filesystem::create_directories(sub.dir);
          MinimizerResult r = ms.m ? minimize_local_ball(ms, cfg.model, grid)
                                   : minimize_global(ms, cfg.model, grid);
          write_json(sub.dir / "result.json", io::result_to_json(r));
          rows[i] = {ms.c,       ms.m.value_or(0.0), r.energy,           r.multiplier,
                     r.h_gamma,  r.residual,         r.boundary_flag,    to_string(r.status)};
        }
      };
      std::vector<std::thread> pool;
      const int nthreads = std::max(1, cfg.threads);
      for (int t = 0; t < nthreads - 1; ++t) pool.emplace_back(worker);
      worker();
      for (auto& th : pool) th.join();
      std::ofstream os(art.path("sweep.csv"));
      os << "c,m,energy,omega,h_gamma,residual,boundary_flag\n";
      os.precision(17);
      for (std::size_t i = 0; i < rows.size(); ++i) {
        os << rows[i].c << "," << rows[i].m << "," << rows[i].energy << "," << rows[i].omega
           << "," << rows[i].h_gamma << "," << rows[i].residual << ","
           << (rows[i].boundary ? 1 : 0) << "\n";
        log("sweep c=" + std::to_string(rows[i].c) + " energy=" + std::to_string(rows[i].energy) +
            " status=" + rows[i].status);
      }
    } else if (cfg.experiment == "nonexistence") {
      const auto pts =
          nonexistence_probe(cfg.minimize.c, cfg.model, cfg.nonexistence.lambdas, grid);
      const double kappa = fit_lambda_sq_coefficient(pts);
      std::ofstream os(art.path("nonexistence.csv"));
      os << "lambda,energy,truncation_warning\n";
      os.precision(17);
      for (const auto& p : pts)
        os << p.lambda << "," << p.energy << "," << (p.truncation_warning ? 1 : 0) << "\n";
      json jout{{"c", cfg.minimize.c}, {"fitted_lambda_sq_coefficient", kappa}};
      write_json(art.path("nonexistence.json"), jout);
      log("nonexistence: kappa=" + std::to_string(kappa));
    }
  } catch (const ValidationError& e) {
    log(std::string("validation error: ") + e.what());
    out.exit_code = kValidationFailure;
  } catch (const std::invalid_argument& e) {
    log(std::string("validation error: ") + e.what());
    out.exit_code = kValidationFailure;
  } catch (const std::exception& e) {
    log(std::string("numerical failure: ") + e.what());
    out.exit_code = kNumericalFailure;
  }

  // Manifest: every produced file with a content hash; identical config+seed
  // reproduces identical hashes at threads = 1.
  json manifest;
  manifest["tag"] = cfg.tag;
  manifest["experiment"] = cfg.experiment;
  manifest["exit_code"] = out.exit_code;
  json files = json::array();
  std::vector<std::filesystem::path> all;
  for (const auto& e : std::filesystem::recursive_directory_iterator(art.dir))
    if (e.is_regular_file() && e.path().filename() != "manifest.json") all.push_back(e.path());
  std::sort(all.begin(), all.end());
  for (const auto& p : all) {
    char hex[32];
    std::snprintf(hex, sizeof(hex), "%016llx",
                  static_cast<unsigned long long>(io::hash_file(p)));
    files.push_back({{"path", std::filesystem::relative(p, art.dir).string()},
                     {"fnv1a64", std::string(hex)}});
  }
  manifest["files"] = files;
  out.manifest_path = art.dir / "manifest.json";
  runner_detail::write_json(out.manifest_path, manifest);
  return out;
}

/// Apply a dotted-path override like "model.p=3" onto a JSON config document.
inline void apply_override(nlohmann::json& j, const std::string& dotted) {
  const auto eq = dotted.find('=');
  if (eq == std::string::npos)
    throw ValidationError("override '" + dotted + "': expected key.path=value");
  std::string path = dotted.substr(0, eq);
  const std::string value = dotted.substr(eq + 1);
  nlohmann::json* cur = &j;
  std::size_t pos = 0;
  while (true) {
    const auto dot = path.find('.', pos);
    const std::string key = path.substr(pos, dot == std::string::npos ? dot : dot - pos);
    if (dot == std::string::npos) {
      nlohmann::json parsed = nlohmann::json::parse(value, nullptr, false);
      (*cur)[key] = parsed.is_discarded() ? nlohmann::json(value) : parsed;
      return;
    }
    cur = &(*cur)[key];
    pos = dot + 1;
  }
}

}  // namespace rotwave
