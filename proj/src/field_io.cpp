#include <cstdio>
#include <fstream>
#include <sstream>

#include "mrt/io.hpp"

namespace mrt {

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

const Field& FieldDump::get(const std::string& name) const {
  for (const auto& [n, f] : fields)
    if (n == name) return f;
  throw ConfigError("field dump has no column '" + name + "'");
}

void write_field_dump(std::ostream& os, const FieldDump& d) {
  os << "# mrt field dump\n# n1 = " << d.n1 << "\n# n2 = " << d.n2 << "\n# h = " << fmt17(d.h)
     << "\n# time = " << fmt17(d.time) << "\n# rows: node (i, j) in row-major order, i (y1) fastest\n";
  os << "i,j,y1,y2";
  for (const auto& f : d.fields) os << ',' << f.first;
  os << '\n';
  const double dy1 = 2 * M_PI / d.n1, dy2 = d.h / (d.n2 - 1);
  for (int j = 0; j < d.n2; ++j)
    for (int i = 0; i < d.n1; ++i) {
      os << i << ',' << j << ',' << fmt17(i * dy1) << ',' << fmt17(j * dy2);
      for (const auto& f : d.fields) os << ',' << fmt17(f.second[Eigen::Index(j) * d.n1 + i]);
      os << '\n';
    }
}

void write_field_dump(const std::string& path, const FieldDump& d) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  write_field_dump(os, d);
}

FieldDump read_field_dump(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open field dump " + path);
  FieldDump d;
  std::string line;
  int have = 0;
  while (std::getline(is, line) && !line.empty() && line[0] == '#') {
    std::istringstream ls(line.substr(1));
    std::string key, eq;
    double v;
    if (ls >> key >> eq >> v && eq == "=") {
      if (key == "n1") d.n1 = int(v), have |= 1;
      else if (key == "n2") d.n2 = int(v), have |= 2;
      else if (key == "h") d.h = v, have |= 4;
      else if (key == "time") d.time = v;
    }
  }
  if (have != 7) throw ConfigError(path + ": header must give n1, n2 and h");
  std::vector<std::string> cols;
  {
    std::istringstream hs(line);
    std::string c;
    while (std::getline(hs, c, ',')) cols.push_back(c);
  }
  if (cols.size() < 4 || cols[0] != "i" || cols[1] != "j") throw ConfigError(path + ": bad column header");
  const Eigen::Index N = Eigen::Index(d.n1) * d.n2;
  for (std::size_t c = 4; c < cols.size(); ++c) d.fields.push_back({cols[c], Field::Zero(N)});
  Eigen::Index row = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ls, cell, ',')) vals.push_back(std::stod(cell));
    if (vals.size() != cols.size()) throw ConfigError(path + ": ragged row " + std::to_string(row));
    Eigen::Index k = Eigen::Index(vals[1]) * d.n1 + Eigen::Index(vals[0]);
    if (k < 0 || k >= N) throw ConfigError(path + ": node index out of range");
    for (std::size_t c = 4; c < cols.size(); ++c) d.fields[c - 4].second[k] = vals[c];
    ++row;
  }
  if (row != N) throw ConfigError(path + ": expected " + std::to_string(N) + " rows");
  return d;
}

FieldDump state_dump(const Grid2D& g, const FlowState& s) {
  FieldDump d;
  d.n1 = g.n1();
  d.n2 = g.n2();
  d.h = g.h();
  d.time = s.t;
  d.fields = {{"eta1", s.eta.c1}, {"eta2", s.eta.c2}, {"u1", s.u.c1}, {"u2", s.u.c2}};
  if (s.q.size() == g.size()) d.fields.push_back({"q", s.q});
  return d;
}

void write_report_csv(std::ostream& os, const EnergyReport& r) {
  os << "t";
  for (int k = 0; k <= r.k_max; ++k) os << ",E_d1^" << k;
  os << ",total_proxy,total_p_proxy,diss_proxy,diss_p_proxy,eta2_norm,u_norm,eta_inf,det_dev,div_res,parity";
  const char* nm[6] = {"1", "1_d1", "1_d2", "2", "2_d1", "2_d2"};
  for (const char* x : nm) os << ",l1_eta" << x;
  for (const char* x : nm) os << ",l1_u" << x;
  os << '\n';
  for (const auto& row : r.rows) {
    os << fmt17(row.t);
    for (double e : row.E_k) os << ',' << fmt17(e);
    for (double v : {row.total, row.total_p, row.diss, row.diss_p, row.eta2_norm, row.u_norm, row.eta_inf,
                     row.det_dev, row.div_res, row.parity})
      os << ',' << fmt17(v);
    for (double v : row.l1_eta) os << ',' << fmt17(v);
    for (double v : row.l1_u) os << ',' << fmt17(v);
    os << '\n';
  }
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  for (std::string c; std::getline(ss, c, ',');) out.push_back(c);
  return out;
}

} // namespace

EnergyReport read_report_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open report " + path);
  std::string line;
  if (!std::getline(is, line)) throw ConfigError(path + ": empty report");
  auto cols = split_csv(line);
  EnergyReport r;
  r.k_max = -1;
  for (const auto& c : cols)
    if (c.rfind("E_d1^", 0) == 0) ++r.k_max;
  const std::size_t expected = 1 + (r.k_max + 1) + 10 + 12;
  if (r.k_max < 0 || cols.size() != expected || cols[0] != "t") throw ConfigError(path + ": unexpected report columns");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto cells = split_csv(line);
    if (cells.size() != expected) throw ConfigError(path + ": ragged report row");
    std::vector<double> v;
    for (const auto& c : cells) v.push_back(std::stod(c));
    ReportRow row;
    std::size_t k = 0;
    row.t = v[k++];
    for (int e = 0; e <= r.k_max; ++e) row.E_k.push_back(v[k++]);
    for (double* f : {&row.total, &row.total_p, &row.diss, &row.diss_p, &row.eta2_norm, &row.u_norm, &row.eta_inf,
                      &row.det_dev, &row.div_res, &row.parity})
      *f = v[k++];
    for (double& f : row.l1_eta) f = v[k++];
    for (double& f : row.l1_u) f = v[k++];
    r.rows.push_back(std::move(row));
  }
  return r;
}

void write_report_tidy(std::ostream& os, const EnergyReport& r) {
  std::ostringstream hdr;
  write_report_csv(hdr, EnergyReport{r.k_max, 0, {}, false});
  auto cols = split_csv(hdr.str().substr(0, hdr.str().size() - 1));
  os << "t,quantity,value\n";
  for (const auto& row : r.rows) {
    std::vector<double> v;
    v.insert(v.end(), row.E_k.begin(), row.E_k.end());
    for (double f : {row.total, row.total_p, row.diss, row.diss_p, row.eta2_norm, row.u_norm, row.eta_inf, row.det_dev,
                     row.div_res, row.parity})
      v.push_back(f);
    v.insert(v.end(), std::begin(row.l1_eta), std::end(row.l1_eta));
    v.insert(v.end(), std::begin(row.l1_u), std::end(row.l1_u));
    for (std::size_t k = 0; k < v.size(); ++k) os << fmt17(row.t) << ',' << cols[k + 1] << ',' << fmt17(v[k]) << '\n';
  }
}

namespace {

FitResult safe_fit(const std::vector<double>& t, const std::vector<double>& y) {
  try {
    return fit_rate_trimmed(t, y);
  } catch (const std::domain_error& e) {
    FitResult f;
    f.note = e.what();
    return f;
  }
}

Json fit_json(const FitResult& f) {
  Json j{{"ok", f.ok}, {"rate", f.rate}, {"ci95_halfwidth", 1.96 * f.stderr_rate}, {"r2", f.r2},
         {"window", {f.t0, f.t1}}, {"samples", f.n}};
  if (!f.note.empty()) j["note"] = f.note;
  return j;
}

} // namespace

ReportSummary summarize(const EnergyReport& r, const std::vector<Field>* eta1, const Grid2D* g,
                        double escape_epsilon) {
  ReportSummary s;
  auto t = r.times();
  s.u_rate = safe_fit(t, r.series(&ReportRow::u_norm));
  s.total_p_rate = safe_fit(t, r.series(&ReportRow::total_p));
  s.eta2_rate = safe_fit(t, r.series(&ReportRow::eta2_norm));
  if (escape_epsilon > 0) {
    s.have_escape = true;
    s.escape_epsilon = escape_epsilon;
    s.escape = escape_detect(r.rows, escape_epsilon);
  }
  if (eta1 && g && !eta1->empty()) {
    try {
      Eta1Limit l = eta1_limit(*g, t, *eta1);
      s.have_eta1 = true;
      s.eta1_variance = l.variance_rel;
      s.eta1_decay = l.decay;
    } catch (const std::exception& e) {
      s.eta1_decay.note = e.what();
    }
  }
  return s;
}

Json summary_json(const EnergyReport& r, const ReportSummary& s) {
  Json j;
  j["k_max"] = r.k_max;
  j["proxy_note"] = "Sobolev orders k_max and k_max-1 stand in for 4 and 3";
  j["I0"] = r.I0;
  j["snapshots"] = r.rows.size();
  j["rates"] = {{"u_norm", fit_json(s.u_rate)}, {"total_p", fit_json(s.total_p_rate)},
                {"eta2_norm", fit_json(s.eta2_rate)}};
  if (s.have_escape)
    j["escape"] = {{"epsilon", s.escape_epsilon}, {"escaped", s.escape.escaped}, {"time", s.escape.time}};
  else
    j["escape"] = nullptr;
  if (s.have_eta1)
    j["eta1_limit"] = {{"variance_rel", s.eta1_variance}, {"decay", fit_json(s.eta1_decay)}};
  else
    j["eta1_limit"] = nullptr;
  return j;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << text;
}

std::string read_text(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

} // namespace mrt
