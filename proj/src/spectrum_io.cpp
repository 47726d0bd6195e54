#include <ostream>

#include "mrt/io.hpp"

namespace mrt {

Json spectrum_json(const GrowthSpectrum& s, const Profile& p, const PhysParams& pp) {
  Json j;
  j["profile"] = to_string(p.kind());
  Json prm = Json::object();
  for (const auto& [k, v] : p.params()) prm[k] = v;
  prm["h"] = p.h();
  j["params"] = {{"profile", prm}, {"g", pp.g}, {"a", pp.a}, {"lambda", pp.lambda}, {"m", pp.m}};
  j["xi_max"] = s.modes.size();
  Json modes = Json::array();
  for (const auto& m : s.modes)
    modes.push_back({{"xi", m.xi}, {"alpha0", m.alpha0}, {"gamma", m.gamma}, {"residual", m.residual}});
  j["modes"] = modes;
  j["F"] = s.F;
  j["Lambda"] = s.Lambda;
  j["xi_star"] = s.xi_star;
  j["m_C"] = s.m_C;
  j["grid"] = {{"n", s.n}, {"backend", to_string(s.backend)}};
  j["tail_decreasing"] = s.tail_decreasing;
  j["warnings"] = s.warnings;
  return j;
}

void write_spectrum_csv(std::ostream& os, const GrowthSpectrum& s) {
  os << "xi,alpha0,gamma,unstable,residual\n";
  for (const auto& m : s.modes)
    os << m.xi << ',' << fmt17(m.alpha0) << ',' << fmt17(m.gamma) << ',' << (m.unstable ? 1 : 0) << ','
       << fmt17(m.residual) << '\n';
}

Json mode_json(const Eigenmode2D& m, const InstabilityThresholds* th) {
  Json j{{"xi0", m.xi0}, {"Upsilon", m.Upsilon}};
  if (th) j["thresholds"] = {{"m0", th->m0}, {"epsilon0", th->epsilon0}, {"Lambda", th->Lambda}};
  j["layout"] = "field dump: i,j,y1,y2,w1,w2,beta; row-major, y1 fastest";
  return j;
}

FieldDump mode_dump(const Grid2D& g, const Eigenmode2D& m) {
  FieldDump d;
  d.n1 = g.n1();
  d.n2 = g.n2();
  d.h = g.h();
  d.fields = {{"w1", m.w1}, {"w2", m.w2}, {"beta", m.beta}};
  return d;
}

} // namespace mrt
