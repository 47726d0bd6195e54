#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mrt/discrete_field.hpp"
#include "mrt/mode_spectrum.hpp"
#include "mrt/simulator.hpp"

namespace mrt {

/// Run configuration, one YAML file with the sections below. Every key is
/// optional except profile.kind; unknown keys are errors.
///
/// profile:    kind (constant | linear | exponential | tanh_layer), h [1],
///             params: {rho0, slope, beta, jump, y0, width} as the kind allows
/// physics:    g [1], a [0], lambda [1], and either m [0] or m_ratio (m = m_ratio * m_C)
/// grid:       n1 [128], n2 [65], mode_n [255] (1D interior nodes), backend
///             [finite_difference | chebyshev], xi_max [16], dense_limit [512]
/// run:        t_end [1], dt [0 = from cfl], cfl [0.4], output_every [10],
///             reproject_every [16], k_max [2], snapshot_every [0 = none, else every
///             n-th output], escape_epsilon [0 = off], epsilon0 [0 = 0.1 m_C clamped to (0, 1]]
/// seeding:    kind [none | mode | parity | random | file], delta [1e-6],
///             xi [0 = fastest], seed [1], file (field dump with eta1, eta2, u1, u2)
/// tolerances: det_tol [1e-4], proj_tol [1e-9], rtol [1e-9], ctol [1e-10], max_iter [500]
struct RunConfig {
  ProfileKind profile_kind = ProfileKind::linear;
  double h = 1;
  std::map<std::string, double> profile_params;

  PhysParams phys;
  bool m_is_ratio = false;
  double m_ratio = 0;

  int n1 = 128, n2 = 65, mode_n = 255;
  ModeBackend backend = ModeBackend::finite_difference;
  int xi_max = 16, dense_limit = 512;

  double t_end = 1, dt = 0, cfl = 0.4;
  int output_every = 10, reproject_every = 16, k_max = 2, snapshot_every = 0;
  double escape_epsilon = 0, epsilon0 = 0;

  std::string seed_kind = "none";
  double delta = 1e-6;
  int seed_xi = 0;
  std::uint64_t seed = 1;
  std::string seed_file;

  double det_tol = 1e-4, proj_tol = 1e-9, rtol = 1e-9, ctol = 1e-10;
  int max_iter = 500;

  std::string canonical; // normalized YAML of the effective configuration
  std::string source_dir;

  Profile profile() const;
  ModeGrid mode_grid() const;
  NeumannOptions neumann() const;
  StepOptions step() const;
  RunOptions run() const;
};

/// Parse `text` (YAML). Overrides have the form section.key=value (or
/// profile.params.key=value) and are applied before validation.
/// Throws ConfigError naming the key and line.
RunConfig parse_config(const std::string& text, const std::vector<std::string>& overrides = {},
                       const std::string& source_dir = ".");
RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});

/// Resolve m_ratio into m (needs m_C from the 1D spectrum grid).
void resolve_field_strength(RunConfig& c, double m_C);

/// git-style object id: sha1("blob <len>\0" + content), hex.
std::string git_blob_sha1(const std::string& content);

} // namespace mrt
