#pragma once

#include <optional>

#include "mrt/config.hpp"
#include "mrt/eigenmode.hpp"

namespace mrt {

/// m_C on the configured 1D grid, then the spectrum at the resolved m.
struct SpectrumSetup {
  Profile profile;
  PhysParams phys; // m resolved
  double m_C = 0;
  GrowthSpectrum spectrum;
};

SpectrumSetup setup_spectrum(RunConfig& c, const SpectrumOptions& opts = {});

/// Divergence-free field from a random stream function
///   psi = sum c_kl sin(l pi y2 / h) sin(k y1 + theta_kl),  k <= kmax, l <= lmax,
/// so v = (d2 psi, -d1 psi) has v2 = 0 on the walls. With parity = true all
/// phases are zero, which makes v1 odd and v2 even in y1. Normalized to unit L2 norm.
Vec2 random_solenoidal(const Grid2D& g, std::uint64_t seed, bool parity, int kmax = 3, int lmax = 3);

struct Seed {
  FlowState state;
  std::optional<Eigenmode2D> mode;
  std::optional<InstabilityThresholds> thresholds;
  double div_residual = 0;
};

/// Initial data from the seeding section. Throws ConfigError on bad seeding
/// requests (mode seeding without an unstable frequency, mismatched file grid).
Seed make_seed(const RunConfig& c, const SpectrumSetup& s, const MrtSimulator& sim);

} // namespace mrt
