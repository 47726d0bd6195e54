#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "mrt/diagnostics.hpp"
#include "mrt/eigenmode.hpp"
#include "mrt/mode_spectrum.hpp"

namespace mrt {

using Json = nlohmann::ordered_json;

/// %.17g
std::string fmt17(double x);

/// Field dump: comment header with n1, n2, h, time, then a CSV table with
/// one row per node in row-major order (y1 fastest):
///   i,j,y1,y2,<name>...
struct FieldDump {
  int n1 = 0, n2 = 0;
  double h = 1, time = 0;
  std::vector<std::pair<std::string, Field>> fields;

  const Field& get(const std::string& name) const; // throws ConfigError
};

void write_field_dump(std::ostream& os, const FieldDump& d);
void write_field_dump(const std::string& path, const FieldDump& d);
FieldDump read_field_dump(const std::string& path);

FieldDump state_dump(const Grid2D& g, const FlowState& s);

Json spectrum_json(const GrowthSpectrum& s, const Profile& p, const PhysParams& pp);
void write_spectrum_csv(std::ostream& os, const GrowthSpectrum& s);

/// JSON header {xi0, Upsilon, ...}; fields go to a separate dump.
Json mode_json(const Eigenmode2D& m, const InstabilityThresholds* th = nullptr);
FieldDump mode_dump(const Grid2D& g, const Eigenmode2D& m);

/// One row per snapshot; the first line is the column header.
void write_report_csv(std::ostream& os, const EnergyReport& r);

/// Inverse of write_report_csv.
EnergyReport read_report_csv(const std::string& path);
/// Long format t,quantity,value for plotting tools.
void write_report_tidy(std::ostream& os, const EnergyReport& r);

struct ReportSummary {
  FitResult u_rate, total_p_rate, eta2_rate;
  EscapeResult escape;
  bool have_escape = false;
  double escape_epsilon = 0;
  bool have_eta1 = false;
  double eta1_variance = 0;
  FitResult eta1_decay;
};

/// Rates use fit windows trimmed by 5% at both ends. Nonpositive series
/// (e.g. an equilibrium run) give a fit with ok = false.
ReportSummary summarize(const EnergyReport& r, const std::vector<Field>* eta1, const Grid2D* g,
                        double escape_epsilon);
Json summary_json(const EnergyReport& r, const ReportSummary& s);

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

} // namespace mrt
