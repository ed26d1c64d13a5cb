#include <cmath>
#include <cstdio>
#include <istream>
#include <sstream>

#include "opo/io.hpp"

namespace opo::io {

std::string format_report_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

Report::Report(std::string title) : title_(std::move(title)) {}

void Report::add(const std::string& key, const std::string& value) { entries_.emplace_back(key, value); }
void Report::add(const std::string& key, double value) { add(key, format_report_number(value)); }
void Report::add(const std::string& key, bool value) { add(key, std::string(value ? "true" : "false")); }
void Report::add(const std::string& key, std::size_t value) { add(key, std::to_string(value)); }

std::string Report::str() const {
  std::string s = "# " + title_ + "\n";
  for (const auto& [k, v] : entries_) s += k + " = " + v + "\n";
  return s;
}

Report fit_report(const std::string& title, const FitResult& fit) {
  Report r(title);
  r.add("converged", fit.converged);
  r.add("iterations", static_cast<std::size_t>(fit.iterations));
  r.add("residual_norm", fit.residual_norm);
  for (const auto& [name, value] : fit.parameters) {
    r.add(name, value);
    if (const auto it = fit.standard_errors.find(name); it != fit.standard_errors.end())
      r.add(name + "_stderr", it->second);
  }
  if (!fit.extrapolated_points.empty()) {
    std::string idx;
    for (std::size_t i = 0; i < fit.extrapolated_points.size(); ++i)
      idx += (i ? "," : "") + std::to_string(fit.extrapolated_points[i]);
    r.add("model_extrapolated_points", idx);
  }
  return r;
}

Report design_report(const DesignPoint& p, const DesignConstraints& c) {
  Report r("optimize");
  r.add("gamma1_hz", angular_to_hz(p.gamma1));
  r.add("gamma2_hz", angular_to_hz(p.gamma2));
  r.add("gamma_int_hz", angular_to_hz(c.gamma_int));
  r.add("sideband_frequency_hz", c.sideband_frequency);
  r.add("max_cooperativity", c.max_cooperativity);
  r.add("cooperativity", p.cooperativity);
  r.add("model_extrapolated", p.cooperativity > 1.0);
  r.add("predicted_var_sq", p.predicted_var_sq);
  r.add("predicted_var_sq_db", p.predicted_var_sq_db);
  r.add("predicted_purity", p.predicted_purity);
  r.add("at_range_edge", p.at_range_edge);
  r.add("unbounded", p.unbounded);
  return r;
}

Report extrema_report(const ExtremaResult& e, const PurityEstimate& purity) {
  Report r("fit trace");
  r.add("var_sq_db", e.var_sq_db);
  r.add("var_sq_db_stderr", e.var_sq_db_err);
  r.add("var_asq_db", e.var_asq_db);
  r.add("var_asq_db_stderr", e.var_asq_db_err);
  r.add("n_minima", e.n_minima);
  r.add("n_maxima", e.n_maxima);
  r.add("shot_noise_level_db", e.shot_noise_level_db);
  r.add("purity", purity.purity);
  r.add("purity_stderr", purity.uncertainty);
  return r;
}

std::vector<std::pair<std::string, std::string>> parse_report(std::istream& in) {
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) continue;
    out.emplace_back(line.substr(0, eq), line.substr(eq + 3));
  }
  return out;
}

}  // namespace opo::io
