#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mrt/config.hpp"
#include "mrt/experiment.hpp"
#include "mrt/io.hpp"

using namespace mrt;

namespace {

const char* kBase = R"(profile:
  kind: linear
  params: {rho0: 1.0, slope: 1.0}
physics: {g: 1.0, a: 0.1, m_ratio: 0.5}
grid: {n1: 16, n2: 9, mode_n: 63, xi_max: 6}
run: {t_end: 0.2}
seeding: {kind: random, delta: 1.0e-4, seed: 3}
)";

std::string error_of(const std::string& text, const std::vector<std::string>& ov = {}) {
  try {
    parse_config(text, ov);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

} // namespace

TEST_CASE("configuration parses with defaults") {
  RunConfig c = parse_config(kBase);
  CHECK(c.profile_kind == ProfileKind::linear);
  CHECK(c.m_is_ratio);
  CHECK(c.m_ratio == 0.5);
  CHECK(c.n1 == 16);
  CHECK(c.k_max == 2);
  CHECK(c.det_tol == 1e-4);
  CHECK(c.seed == 3);
  CHECK(c.profile().rho(0.5) == doctest::Approx(1.5));
}

TEST_CASE("unknown and malformed keys are hard errors") {
  std::string e = error_of(std::string(kBase) + "extra: 1\n");
  CHECK(e.find("unknown key") != std::string::npos);
  CHECK(e.find("line 8") != std::string::npos);

  e = error_of("profile:\n  kind: linear\n  colour: red\n");
  CHECK(e.find("profile.colour") != std::string::npos);
  CHECK(e.find("line 3") != std::string::npos);

  CHECK(error_of("physics: {g: 1}\n").find("profile.kind") != std::string::npos);
  CHECK(error_of("profile: {kind: linear}\nphysics: {m: 0.1, m_ratio: 0.5}\n").find("mutually exclusive") !=
        std::string::npos);
  CHECK(!error_of("profile: {kind: linear}\ngrid: {n1: 7}\n").empty());
  CHECK(!error_of("profile: {kind: linear}\nphysics: {g: abc}\n").empty());
  CHECK(!error_of("profile: {kind: linear}\nseeding: {kind: file}\n").empty());
  CHECK(!error_of("profile: {kind: linear, params: {beta: 1}}\n").empty());
  CHECK(!error_of("profile: [1, 2]\n").empty());
}

TEST_CASE("overrides") {
  RunConfig c = parse_config(kBase, {"run.t_end=3.5", "profile.params.slope=0.5", "grid.n1=32"});
  CHECK(c.t_end == 3.5);
  CHECK(c.profile_params.at("slope") == 0.5);
  CHECK(c.n1 == 32);
  CHECK(error_of(kBase, {"run.nope=1"}).find("run.nope") != std::string::npos);
  CHECK(!error_of(kBase, {"run.t_end"}).empty());
  CHECK(!error_of(kBase, {"run.t_end=-1"}).empty());
}

TEST_CASE("canonical form is a fixed point") {
  RunConfig c = parse_config(kBase);
  RunConfig d = parse_config(c.canonical);
  CHECK(c.canonical == d.canonical);
  CHECK(parse_config(kBase, {"run.cfl=0.3"}).canonical != c.canonical);
}

TEST_CASE("field strength resolution") {
  RunConfig c = parse_config(kBase);
  resolve_field_strength(c, 0.3);
  CHECK(c.phys.m == doctest::Approx(0.15));
}

TEST_CASE("git blob hash") {
  // `printf 'hello\n' | git hash-object --stdin`
  CHECK(git_blob_sha1("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
  CHECK(git_blob_sha1("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
}

TEST_CASE("field dump round trip") {
  Grid2D g(8, 9, 1.5);
  FlowState s = FlowState::zero(g);
  s.eta.c1 = g.sample([](double y1, double y2) { return std::sin(y1) * y2 / 3; });
  s.u.c2 = g.sample([](double y1, double y2) { return std::cos(y1) * y2 * (1.5 - y2); });
  s.t = 0.1;
  auto path = (std::filesystem::temp_directory_path() / "mrt_dump_test.csv").string();
  write_field_dump(path, state_dump(g, s));
  FieldDump d = read_field_dump(path);
  CHECK(d.n1 == 8);
  CHECK(d.n2 == 9);
  CHECK(d.h == 1.5);
  CHECK(d.time == 0.1);
  CHECK((d.get("eta1") == s.eta.c1).all()); // %.17g is exact
  CHECK((d.get("u2") == s.u.c2).all());
  CHECK_THROWS_AS(d.get("rho"), ConfigError);
  write_text(path, "i,j\n1,2\n");
  CHECK_THROWS(read_field_dump(path));
  std::filesystem::remove(path);
}

TEST_CASE("file seeding reads a dump on the same grid") {
  RunConfig c = parse_config(kBase);
  SpectrumSetup s = setup_spectrum(c);
  Grid2D g(c.n1, c.n2, c.h);
  MrtSimulator sim(g, s.profile, s.phys);
  Seed r = make_seed(c, s, sim);
  auto dir = std::filesystem::temp_directory_path();
  write_field_dump((dir / "mrt_seed.csv").string(), state_dump(g, r.state));
  RunConfig f = parse_config(kBase, {"seeding.kind=file", "seeding.file=mrt_seed.csv"}, dir.string());
  Seed back = make_seed(f, s, sim);
  CHECK(g.norm(back.state.eta - r.state.eta) < 1e-12 * g.norm(r.state.eta));
  CHECK(back.div_residual < 1e-9 * g.norm(back.state.u));

  RunConfig wrong = parse_config(kBase, {"seeding.kind=file", "seeding.file=mrt_seed.csv", "grid.n1=32"}, dir.string());
  Grid2D g2(32, 9, 1);
  MrtSimulator sim2(g2, s.profile, s.phys);
  CHECK_THROWS_AS(make_seed(wrong, s, sim2), ConfigError);
  std::filesystem::remove(dir / "mrt_seed.csv");
}

TEST_CASE("spectrum JSON and CSV") {
  RunConfig c = parse_config(kBase);
  SpectrumSetup s = setup_spectrum(c);
  Json j = spectrum_json(s.spectrum, s.profile, s.phys);
  CHECK(j["modes"].size() == 6);
  CHECK(j["m_C"].get<double>() == s.m_C);
  CHECK(j["xi_star"].get<int>() == s.spectrum.xi_star);
  std::ostringstream os;
  write_spectrum_csv(os, s.spectrum);
  CHECK(os.str().rfind("xi,alpha0,gamma,unstable,residual\n", 0) == 0);
}

TEST_CASE("report CSV round trip and tidy export") {
  RunConfig c = parse_config(kBase);
  SpectrumSetup s = setup_spectrum(c);
  Grid2D g(c.n1, c.n2, c.h);
  MrtSimulator sim(g, s.profile, s.phys);
  Seed sd = make_seed(c, s, sim);
  Recorder rec(sim, c.k_max);
  run(sim, sd.state, c.run(), std::ref(rec));
  auto path = (std::filesystem::temp_directory_path() / "mrt_report.csv").string();
  {
    std::ofstream f(path);
    write_report_csv(f, rec.report());
  }
  EnergyReport r = read_report_csv(path);
  REQUIRE(r.rows.size() == rec.report().rows.size());
  CHECK(r.k_max == 2);
  CHECK(r.rows.back().total_p == rec.report().rows.back().total_p);
  CHECK(r.rows[1].l1_u[5] == rec.report().rows[1].l1_u[5]);
  std::ostringstream tidy;
  write_report_tidy(tidy, r);
  CHECK(tidy.str().rfind("t,quantity,value\n", 0) == 0);
  Json sj = summary_json(r, summarize(r, nullptr, nullptr, 0));
  CHECK(sj["rates"].contains("u_norm"));
  std::filesystem::remove(path);
}
