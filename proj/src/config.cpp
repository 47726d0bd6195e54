#include "mrt/config.hpp"

#include <cstdio>
#include <filesystem>
#include <set>
#include <sstream>

#include <openssl/evp.h>
#include <yaml-cpp/yaml.h>

#include "mrt/io.hpp"

namespace mrt {

namespace {

std::string where(const YAML::Node& n) {
  if (n.Mark().line < 0) return "";
  return " (line " + std::to_string(n.Mark().line + 1) + ")";
}

template <class T>
T get(const YAML::Node& sec, const std::string& section, const std::string& key, T fallback) {
  YAML::Node n = sec[key];
  if (!n) return fallback;
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(section + "." + key + ": cannot read value '" + (n.IsScalar() ? n.Scalar() : "<non-scalar>") +
                      "'" + where(n));
  }
}

void check_keys(const YAML::Node& sec, const std::string& section, const std::set<std::string>& known) {
  if (!sec) return;
  if (!sec.IsMap()) throw ConfigError("section '" + section + "' must be a mapping" + where(sec));
  for (const auto& kv : sec) {
    std::string k = kv.first.as<std::string>();
    if (!known.count(k)) throw ConfigError("unknown key " + section + "." + k + where(kv.first));
  }
}

void apply_override(YAML::Node& root, const std::string& ov) {
  auto eq = ov.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + ov + "' is not of the form section.key=value");
  std::string path = ov.substr(0, eq), value = ov.substr(eq + 1);
  std::vector<std::string> parts;
  std::stringstream ss(path);
  for (std::string p; std::getline(ss, p, '.');) parts.push_back(p);
  if (parts.size() < 2 || parts.size() > 3) throw ConfigError("override key '" + path + "' must be section.key");
  YAML::Node v;
  try {
    v = YAML::Load(value);
  } catch (const YAML::Exception& e) {
    throw ConfigError("override '" + ov + "': " + e.what());
  }
  if (parts.size() == 2) {
    YAML::Node sec = root[parts[0]];
    sec[parts[1]] = v;
  } else {
    YAML::Node sec = root[parts[0]][parts[1]];
    sec[parts[2]] = v;
  }
}

void positive(double v, const char* key) {
  if (!(v > 0) || !std::isfinite(v)) throw ConfigError(std::string(key) + " must be positive");
}

} // namespace

RunConfig parse_config(const std::string& text, const std::vector<std::string>& overrides,
                       const std::string& source_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(std::string("config is not valid YAML: ") + e.what());
  }
  if (!root || root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  if (!root.IsMap()) throw ConfigError("config must be a mapping of sections");
  for (const auto& o : overrides) apply_override(root, o);
  check_keys(root, "<top>", {"profile", "physics", "grid", "run", "seeding", "tolerances"});

  RunConfig c;
  c.source_dir = source_dir;
  const YAML::Node pr = root["profile"];
  check_keys(pr, "profile", {"kind", "h", "params"});
  if (!pr || !pr["kind"]) throw ConfigError("missing key profile.kind");
  c.profile_kind = profile_kind_from_string(get<std::string>(pr, "profile", "kind", ""));
  c.h = get(pr, "profile", "h", 1.0);
  if (const YAML::Node pm = pr["params"]) {
    if (!pm.IsMap()) throw ConfigError("profile.params must be a mapping" + where(pm));
    for (const auto& kv : pm) {
      std::string k = kv.first.as<std::string>();
      c.profile_params[k] = get(pm, "profile.params", k, 0.0);
    }
  }

  const YAML::Node ph = root["physics"];
  check_keys(ph, "physics", {"g", "a", "lambda", "m", "m_ratio"});
  c.phys.g = get(ph, "physics", "g", 1.0);
  c.phys.a = get(ph, "physics", "a", 0.0);
  c.phys.lambda = get(ph, "physics", "lambda", 1.0);
  c.phys.m = get(ph, "physics", "m", 0.0);
  if (ph && ph["m_ratio"]) {
    if (ph["m"]) throw ConfigError("physics.m and physics.m_ratio are mutually exclusive" + where(ph["m_ratio"]));
    c.m_is_ratio = true;
    c.m_ratio = get(ph, "physics", "m_ratio", 0.0);
    if (!(c.m_ratio >= 0)) throw ConfigError("physics.m_ratio must be non-negative");
  }

  const YAML::Node gr = root["grid"];
  check_keys(gr, "grid", {"n1", "n2", "mode_n", "backend", "xi_max", "dense_limit"});
  c.n1 = get(gr, "grid", "n1", c.n1);
  c.n2 = get(gr, "grid", "n2", c.n2);
  c.mode_n = get(gr, "grid", "mode_n", c.mode_n);
  c.backend = mode_backend_from_string(get<std::string>(gr, "grid", "backend", "finite_difference"));
  c.xi_max = get(gr, "grid", "xi_max", c.xi_max);
  c.dense_limit = get(gr, "grid", "dense_limit", c.dense_limit);
  if (c.n1 < 4 || (c.n1 & (c.n1 - 1))) throw ConfigError("grid.n1 must be a power of two >= 4");
  if (c.n2 < 8) throw ConfigError("grid.n2 must be at least 8");
  if (c.mode_n < 4) throw ConfigError("grid.mode_n must be at least 4");
  if (c.xi_max < 1) throw ConfigError("grid.xi_max must be at least 1");

  const YAML::Node rn = root["run"];
  check_keys(rn, "run", {"t_end", "dt", "cfl", "output_every", "reproject_every", "k_max", "snapshot_every",
                         "escape_epsilon", "epsilon0"});
  c.t_end = get(rn, "run", "t_end", c.t_end);
  c.dt = get(rn, "run", "dt", c.dt);
  c.cfl = get(rn, "run", "cfl", c.cfl);
  c.output_every = get(rn, "run", "output_every", c.output_every);
  c.reproject_every = get(rn, "run", "reproject_every", c.reproject_every);
  c.k_max = get(rn, "run", "k_max", c.k_max);
  c.snapshot_every = get(rn, "run", "snapshot_every", c.snapshot_every);
  c.escape_epsilon = get(rn, "run", "escape_epsilon", c.escape_epsilon);
  c.epsilon0 = get(rn, "run", "epsilon0", c.epsilon0);
  positive(c.t_end, "run.t_end");
  if (c.dt < 0) throw ConfigError("run.dt must be positive (or 0 for the CFL step)");
  positive(c.cfl, "run.cfl");
  if (c.output_every < 1) throw ConfigError("run.output_every must be at least 1");
  if (c.reproject_every < 0) throw ConfigError("run.reproject_every must be non-negative");
  if (c.k_max < 1) throw ConfigError("run.k_max must be at least 1");
  if (c.snapshot_every < 0) throw ConfigError("run.snapshot_every must be non-negative");
  if (c.escape_epsilon < 0) throw ConfigError("run.escape_epsilon must be non-negative");
  if (c.epsilon0 < 0 || c.epsilon0 > 1) throw ConfigError("run.epsilon0 must lie in [0, 1]");

  const YAML::Node sd = root["seeding"];
  check_keys(sd, "seeding", {"kind", "delta", "xi", "seed", "file"});
  c.seed_kind = get<std::string>(sd, "seeding", "kind", "none");
  static const std::set<std::string> kinds{"none", "mode", "parity", "random", "file"};
  if (!kinds.count(c.seed_kind))
    throw ConfigError("seeding.kind '" + c.seed_kind + "' is not one of none, mode, parity, random, file");
  c.delta = get(sd, "seeding", "delta", c.delta);
  c.seed_xi = get(sd, "seeding", "xi", c.seed_xi);
  c.seed = get<std::uint64_t>(sd, "seeding", "seed", c.seed);
  c.seed_file = get<std::string>(sd, "seeding", "file", "");
  if (!(c.delta >= 0) || !std::isfinite(c.delta)) throw ConfigError("seeding.delta must be non-negative");
  if (c.seed_kind == "file" && c.seed_file.empty()) throw ConfigError("seeding.file is required for kind file");

  const YAML::Node tl = root["tolerances"];
  check_keys(tl, "tolerances", {"det_tol", "proj_tol", "rtol", "ctol", "max_iter"});
  c.det_tol = get(tl, "tolerances", "det_tol", c.det_tol);
  c.proj_tol = get(tl, "tolerances", "proj_tol", c.proj_tol);
  c.rtol = get(tl, "tolerances", "rtol", c.rtol);
  c.ctol = get(tl, "tolerances", "ctol", c.ctol);
  c.max_iter = get(tl, "tolerances", "max_iter", c.max_iter);
  positive(c.det_tol, "tolerances.det_tol");
  positive(c.proj_tol, "tolerances.proj_tol");
  positive(c.rtol, "tolerances.rtol");
  positive(c.ctol, "tolerances.ctol");
  if (c.max_iter < 1) throw ConfigError("tolerances.max_iter must be at least 1");

  c.phys.validate();
  (void)c.profile(); // validates the profile parameters

  YAML::Emitter e;
  e << YAML::BeginMap;
  e << YAML::Key << "profile" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "kind" << YAML::Value << to_string(c.profile_kind);
  e << YAML::Key << "h" << YAML::Value << fmt17(c.h);
  e << YAML::Key << "params" << YAML::Value << YAML::BeginMap;
  for (const auto& [k, v] : c.profile_params) e << YAML::Key << k << YAML::Value << fmt17(v);
  e << YAML::EndMap << YAML::EndMap;
  e << YAML::Key << "physics" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "g" << YAML::Value << fmt17(c.phys.g);
  e << YAML::Key << "a" << YAML::Value << fmt17(c.phys.a);
  e << YAML::Key << "lambda" << YAML::Value << fmt17(c.phys.lambda);
  if (c.m_is_ratio)
    e << YAML::Key << "m_ratio" << YAML::Value << fmt17(c.m_ratio);
  else
    e << YAML::Key << "m" << YAML::Value << fmt17(c.phys.m);
  e << YAML::EndMap;
  e << YAML::Key << "grid" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "n1" << YAML::Value << c.n1 << YAML::Key << "n2" << YAML::Value << c.n2;
  e << YAML::Key << "mode_n" << YAML::Value << c.mode_n;
  e << YAML::Key << "backend" << YAML::Value << to_string(c.backend);
  e << YAML::Key << "xi_max" << YAML::Value << c.xi_max << YAML::Key << "dense_limit" << YAML::Value
    << c.dense_limit;
  e << YAML::EndMap;
  e << YAML::Key << "run" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "t_end" << YAML::Value << fmt17(c.t_end) << YAML::Key << "dt" << YAML::Value << fmt17(c.dt);
  e << YAML::Key << "cfl" << YAML::Value << fmt17(c.cfl);
  e << YAML::Key << "output_every" << YAML::Value << c.output_every;
  e << YAML::Key << "reproject_every" << YAML::Value << c.reproject_every;
  e << YAML::Key << "k_max" << YAML::Value << c.k_max;
  e << YAML::Key << "snapshot_every" << YAML::Value << c.snapshot_every;
  e << YAML::Key << "escape_epsilon" << YAML::Value << fmt17(c.escape_epsilon);
  e << YAML::Key << "epsilon0" << YAML::Value << fmt17(c.epsilon0);
  e << YAML::EndMap;
  e << YAML::Key << "seeding" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "kind" << YAML::Value << c.seed_kind << YAML::Key << "delta" << YAML::Value << fmt17(c.delta);
  e << YAML::Key << "xi" << YAML::Value << c.seed_xi << YAML::Key << "seed" << YAML::Value << c.seed;
  e << YAML::Key << "file" << YAML::Value << c.seed_file;
  e << YAML::EndMap;
  e << YAML::Key << "tolerances" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "det_tol" << YAML::Value << fmt17(c.det_tol);
  e << YAML::Key << "proj_tol" << YAML::Value << fmt17(c.proj_tol);
  e << YAML::Key << "rtol" << YAML::Value << fmt17(c.rtol);
  e << YAML::Key << "ctol" << YAML::Value << fmt17(c.ctol);
  e << YAML::Key << "max_iter" << YAML::Value << c.max_iter;
  e << YAML::EndMap << YAML::EndMap;
  c.canonical = std::string(e.c_str()) + "\n";
  return c;
}

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::string text = read_text(path);
  auto dir = std::filesystem::path(path).parent_path().string();
  try {
    return parse_config(text, overrides, dir.empty() ? "." : dir);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void resolve_field_strength(RunConfig& c, double m_C) {
  if (c.m_is_ratio) c.phys.m = c.m_ratio * m_C;
}

Profile RunConfig::profile() const { return Profile::make(profile_kind, profile_params, h); }

ModeGrid RunConfig::mode_grid() const { return ModeGrid::make(backend, mode_n, h); }

NeumannOptions RunConfig::neumann() const {
  NeumannOptions o;
  o.rtol = rtol;
  o.ctol = ctol;
  o.max_iter = max_iter;
  return o;
}

StepOptions RunConfig::step() const {
  StepOptions s;
  s.det_tol = det_tol;
  s.proj_tol = proj_tol;
  s.reproject_every = reproject_every;
  return s;
}

RunOptions RunConfig::run() const {
  RunOptions r;
  r.t_end = t_end;
  r.dt = dt;
  r.cfl = cfl;
  r.output_every = output_every;
  return r;
}

std::string git_blob_sha1(const std::string& content) {
  std::string obj = "blob " + std::to_string(content.size());
  obj.push_back('\0');
  obj += content;
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(obj.data(), obj.size(), md, &len, EVP_sha1(), nullptr)) throw std::runtime_error("sha1 failed");
  std::string hex;
  char b[3];
  for (unsigned i = 0; i < len; ++i) {
    std::snprintf(b, sizeof b, "%02x", md[i]);
    hex += b;
  }
  return hex;
}

} // namespace mrt
