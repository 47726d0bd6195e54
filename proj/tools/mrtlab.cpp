// mrtlab: spectrum sweeps, eigenmodes, simulations and the invariant suite
// for the damped inviscid magnetic Rayleigh-Taylor problem.
//
// Exit codes: 0 ok, 1 internal error, 2 config error, 3 physics abort,
// 4 verification failure.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "mrt/config.hpp"
#include "mrt/experiment.hpp"
#include "mrt/io.hpp"
#include "mrt/verify.hpp"

namespace fs = std::filesystem;
using namespace mrt;

namespace {

struct Common {
  std::string config;
  std::string out = "out";
  std::vector<std::string> overrides;
  long long seed = -1;
};

RunConfig load(const Common& c) {
  if (c.config.empty()) throw ConfigError("--config is required");
  std::vector<std::string> ov = c.overrides;
  if (c.seed >= 0) ov.push_back("seeding.seed=" + std::to_string(c.seed));
  return load_config(c.config, ov);
}

fs::path outdir(const Common& c) {
  fs::path p(c.out);
  fs::create_directories(p);
  return p;
}

std::string list(const std::vector<int>& v) {
  std::ostringstream os;
  os << '{';
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  os << '}';
  return os.str();
}

int cmd_spectrum(const Common& c) {
  RunConfig cfg = load(c);
  SpectrumSetup s = setup_spectrum(cfg);
  fs::path dir = outdir(c);
  write_text((dir / "spectrum.json").string(), spectrum_json(s.spectrum, s.profile, s.phys).dump(2) + "\n");
  std::ofstream csv(dir / "spectrum.csv");
  write_spectrum_csv(csv, s.spectrum);
  std::cout << std::setprecision(10) << "m_C      = " << s.m_C << "\n"
            << "m        = " << s.phys.m << "\n"
            << "Lambda   = " << s.spectrum.Lambda << "\n"
            << "xi*      = " << s.spectrum.xi_star << "\n"
            << "F        = " << list(s.spectrum.F) << "\n";
  for (const auto& w : s.spectrum.warnings) std::cout << "warning: " << w << "\n";
  return 0;
}

int cmd_critical(const Common& c) {
  RunConfig cfg = load(c);
  Profile p = cfg.profile();
  double mC = critical_field(p, cfg.phys.g, cfg.phys.lambda, cfg.mode_grid(), cfg.dense_limit);
  double ub = critical_field_upper_bound(p, cfg.phys.g, cfg.phys.lambda);
  RtCondition rt = rt_condition(p);
  Json j{{"m_C", mC},
         {"upper_bound", ub},
         {"rt_condition", rt.holds},
         {"rt_witness_y2", rt.y_witness},
         {"grid", {{"n", cfg.mode_n}, {"backend", to_string(cfg.backend)}}}};
  write_text((outdir(c) / "critical_field.json").string(), j.dump(2) + "\n");
  std::cout << std::setprecision(10) << "m_C         = " << mC << "\nupper bound = " << ub
            << "\nRT condition " << (rt.holds ? "holds" : "fails") << "\n";
  return 0;
}

int cmd_mode(const Common& c) {
  RunConfig cfg = load(c);
  SpectrumSetup s = setup_spectrum(cfg);
  Grid2D g(cfg.n1, cfg.n2, cfg.h);
  RunConfig mc = cfg;
  mc.seed_kind = "mode";
  if (mc.delta == 0) mc.delta = 1e-6;
  MrtSimulator sim(g, s.profile, s.phys, cfg.neumann(), cfg.step());
  Seed sd = make_seed(mc, s, sim);
  const Eigenmode2D& m = *sd.mode;
  ModeResidual r = mode_residual(m, s.profile, s.phys, g);
  Json j = mode_json(m, &*sd.thresholds);
  j["residual"] = {{"momentum", r.momentum}, {"divergence", r.divergence}, {"wall_normal", r.wall_normal}};
  j["grid"] = {{"n1", g.n1()}, {"n2", g.n2()}, {"h", g.h()}};
  fs::path dir = outdir(c);
  write_text((dir / "mode.json").string(), j.dump(2) + "\n");
  write_field_dump((dir / "mode_fields.csv").string(), mode_dump(g, m));
  std::cout << std::setprecision(10) << "xi0 = " << m.xi0 << "\nUpsilon = " << m.Upsilon
            << "\nmomentum residual = " << r.momentum << "\nm0 = " << sd.thresholds->m0 << "\n";
  return 0;
}

int cmd_simulate(const Common& c) {
  RunConfig cfg = load(c);
  SpectrumSetup s = setup_spectrum(cfg);
  Grid2D g(cfg.n1, cfg.n2, cfg.h);
  MrtSimulator sim(g, s.profile, s.phys, cfg.neumann(), cfg.step());
  fs::path dir = outdir(c);

  std::string inputs = cfg.canonical;
  if (cfg.seed_kind == "file") {
    fs::path p(cfg.seed_file);
    if (p.is_relative()) p = fs::path(cfg.source_dir) / p;
    inputs += read_text(p.string());
  }
  Json manifest{{"config", cfg.canonical}, {"input_hash", git_blob_sha1(inputs)}, {"m_C", s.m_C}, {"m", s.phys.m},
                {"Lambda", s.spectrum.Lambda}, {"xi_star", s.spectrum.xi_star}};

  Seed sd;
  try {
    sd = make_seed(cfg, s, sim);
  } catch (const GeometryError& e) {
    manifest["aborted"] = true;
    manifest["abort_reason"] = std::string("initial data: ") + e.what();
    write_text((dir / "manifest.json").string(), manifest.dump(2) + "\n");
    std::cerr << "physics abort: " << e.what() << "\n";
    return 3;
  }
  double eps = cfg.escape_epsilon;
  if (eps == 0 && sd.thresholds) eps = sd.thresholds->m0 * sd.thresholds->epsilon0 / 2;
  if (sd.thresholds)
    manifest["thresholds"] = {{"m0", sd.thresholds->m0}, {"epsilon0", sd.thresholds->epsilon0},
                              {"escape_epsilon", eps},
                              {"T_delta", sd.thresholds->m0 * cfg.delta < 2 * eps
                                              ? escape_time(s.spectrum.Lambda, eps, sd.thresholds->m0, cfg.delta)
                                              : 0.0}};

  Recorder rec(sim, cfg.k_max);
  long outputs = 0;
  Observer obs = [&](const FlowState& st, const StageEval& ev) {
    rec(st, ev);
    if (cfg.snapshot_every > 0 && outputs % cfg.snapshot_every == 0) {
      std::ostringstream name;
      name << "snap_" << std::setw(6) << std::setfill('0') << outputs << ".csv";
      write_field_dump((dir / name.str()).string(), state_dump(g, st));
    }
    ++outputs;
  };
  RunResult res = run(sim, sd.state, cfg.run(), obs);

  std::ofstream csv(dir / "report.csv");
  write_report_csv(csv, rec.report());
  ReportSummary sum = summarize(rec.report(), &rec.eta1_fields(), &g, eps);
  Json sj = summary_json(rec.report(), sum);
  write_text((dir / "summary.json").string(), sj.dump(2) + "\n");
  write_field_dump((dir / (res.aborted ? "abort_state.csv" : "final_state.csv")).string(), state_dump(g, res.final));

  manifest["steps"] = res.steps;
  manifest["dt"] = res.dt;
  manifest["aborted"] = res.aborted;
  if (res.aborted) manifest["abort_reason"] = res.abort_reason;
  write_text((dir / "manifest.json").string(), manifest.dump(2) + "\n");

  std::cout << std::setprecision(8) << "steps " << res.steps << ", dt " << res.dt << ", t " << res.final.t << "\n";
  if (sum.u_rate.ok) std::cout << "fitted |u| rate " << sum.u_rate.rate << " (r2 " << sum.u_rate.r2 << ")\n";
  if (sum.total_p_rate.ok)
    std::cout << "fitted E_p proxy rate " << sum.total_p_rate.rate << " (r2 " << sum.total_p_rate.r2 << ")\n";
  if (sum.have_escape)
    std::cout << "escape (eps " << eps << "): " << (sum.escape.escaped ? "t = " + std::to_string(sum.escape.time) : "no")
              << "\n";
  if (res.aborted) {
    std::cerr << "physics abort: " << res.abort_reason << "\n";
    return 3;
  }
  return 0;
}

int cmd_verify(const Common& c, bool mutate, const std::string& only) {
  VerifyOptions o;
  o.inject_sign_error = mutate;
  o.only = only;
  if (c.seed >= 0) o.seed = std::uint64_t(c.seed);
  auto r = run_verify(o);
  Json j = verify_json(r, o);
  write_text((outdir(c) / "verify.json").string(), j.dump(2) + "\n");
  for (const auto& k : r) {
    std::cout << (k.pass ? "PASS " : "FAIL ") << std::left << std::setw(38) << k.name << " measured "
              << std::setprecision(6) << k.measured << " " << k.relation << " " << k.threshold;
    if (k.relation == "in") std::cout << ".." << k.threshold_hi;
    std::cout << "\n";
  }
  return j["all_pass"].get<bool>() ? 0 : 4;
}

int cmd_report(const Common& c, const std::string& run_dir, double eps) {
  fs::path dir(run_dir);
  EnergyReport r = read_report_csv((dir / "report.csv").string());
  ReportSummary s = summarize(r, nullptr, nullptr, eps);
  Json j = summary_json(r, s);
  fs::path od = outdir(c);
  write_text((od / "report_summary.json").string(), j.dump(2) + "\n");
  std::ofstream tidy(od / "report_tidy.csv");
  write_report_tidy(tidy, r);
  std::cout << j.dump(2) << "\n";
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"mrtlab: magnetic Rayleigh-Taylor stability toolkit"};
  app.require_subcommand(1);
  Common com;
  auto add_common = [&](CLI::App* sc, bool need_config) {
    auto* o = sc->add_option("-c,--config", com.config, "YAML run configuration");
    if (need_config) o->required()->check(CLI::ExistingFile);
    sc->add_option("-o,--out", com.out, "output directory")->capture_default_str();
    sc->add_option("--override", com.overrides, "section.key=value (repeatable)");
    sc->add_option("--seed", com.seed, "random seed (overrides seeding.seed)");
  };
  auto* sp = app.add_subcommand("spectrum", "growth-rate spectrum, m_C, Lambda, xi*");
  auto* cf = app.add_subcommand("critical-field", "critical field strength and its analytic upper bound");
  auto* md = app.add_subcommand("mode", "fastest (or seeding.xi) eigenmode on the 2D grid");
  auto* sm = app.add_subcommand("simulate", "nonlinear run with energy report");
  auto* vf = app.add_subcommand("verify", "invariant suite; JSON pass/fail table");
  auto* rp = app.add_subcommand("report", "summarize an existing run directory");
  for (auto* sc : {sp, cf, md, sm}) add_common(sc, true);
  add_common(vf, false);
  add_common(rp, false);
  bool mutate = false;
  std::string only, run_dir;
  double eps = 0;
  vf->add_flag("--inject-sign-error", mutate, "flip the buoyancy sign in the spectral forms");
  vf->add_option("--only", only, "run checks whose full name (group.check) contains this string");
  rp->add_option("--run", run_dir, "directory with report.csv")->required()->check(CLI::ExistingDirectory);
  rp->add_option("--escape-epsilon", eps, "escape threshold for the L1 norms of u (0: off)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  try {
    if (*sp) return cmd_spectrum(com);
    if (*cf) return cmd_critical(com);
    if (*md) return cmd_mode(com);
    if (*sm) return cmd_simulate(com);
    if (*vf) return cmd_verify(com, mutate, only);
    if (*rp) return cmd_report(com, run_dir, eps);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const PhysicsAbort& e) {
    std::cerr << "physics abort: " << e.what() << "\n";
    return 3;
  } catch (const GeometryError& e) {
    std::cerr << "physics abort: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
