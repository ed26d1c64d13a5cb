#pragma once

// File formats: CSV datasets, key = value reports, SVG plots.
//
// CSV: header line with exact column names, ',' separator, '.' decimal, LF
// line endings; numbers written in scientific notation with 17 significant
// digits so that a write/read round trip is lossless.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "opo/design.hpp"
#include "opo/estimation.hpp"
#include "opo/homodyne.hpp"

namespace opo::io {

inline const std::vector<std::string> kThresholdColumns{"power_w", "signal_w"};
inline const std::vector<std::string> kTraceColumns{"index", "phase_rad", "variance_db"};
inline const std::vector<std::string> kSpectrumColumns{"freq_hz", "var_sq_db", "var_asq_db", "purity"};
inline const std::vector<std::string> kSqueezingColumns{"pump_ratio", "variance_db"};
inline const std::vector<std::string> kAttenuationColumns{"transmission", "var_sq_db", "var_asq_db"};
inline const std::vector<std::string> kFrontierColumns{"gamma2_hz", "predicted_var_sq_db"};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  // Columns written as plain integers (e.g. trace point index).
  std::vector<std::size_t> integer_columns;
};

/// "%.16e", with "inf" / "-inf" / "nan" for non-finite values.
std::string format_number(double x);

void write_csv(std::ostream& out, const CsvTable& table);
void write_csv_file(const std::filesystem::path& path, const CsvTable& table);

/// Parses a CSV whose header must equal `expected` (any header when empty).
/// Errors are SchemaError with a "source:line:column: message" prefix.
CsvTable read_csv(std::istream& in, const std::vector<std::string>& expected,
                  const std::string& source = "<input>");
CsvTable read_csv_file(const std::filesystem::path& path, const std::vector<std::string>& expected);

CsvTable threshold_table(const DataSeries& data);
DataSeries threshold_series(const CsvTable& table);

CsvTable squeezing_table(const DataSeries& data);
DataSeries squeezing_series(const CsvTable& table);

CsvTable trace_table(const NoiseTrace& trace);
NoiseTrace trace_from_table(const CsvTable& table, TraceKind kind);

struct SpectrumRow {
  double freq_hz = 0.0;
  double var_sq_db = 0.0;
  double var_asq_db = 0.0;
  double purity = 1.0;
};
CsvTable spectrum_table(const std::vector<SpectrumRow>& rows);
CsvTable attenuation_table(const std::vector<AttenuationPoint>& rows);
CsvTable frontier_table(const std::vector<FrontierPoint>& rows);

/// Ordered "key = value" report.
class Report {
public:
  explicit Report(std::string title);

  void add(const std::string& key, const std::string& value);
  void add(const std::string& key, double value);
  void add(const std::string& key, bool value);
  void add(const std::string& key, std::size_t value);

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
  std::string str() const;

private:
  std::string title_;
  std::vector<std::pair<std::string, std::string>> entries_;
};

/// "%.10g" with "inf" / "-inf" / "nan".
std::string format_report_number(double x);

Report fit_report(const std::string& title, const FitResult& fit);
Report design_report(const DesignPoint& point, const DesignConstraints& constraints);
Report extrema_report(const ExtremaResult& extrema, const PurityEstimate& purity);

/// Parses a report back into key/value pairs (comment lines skipped).
std::vector<std::pair<std::string, std::string>> parse_report(std::istream& in);

struct PlotSeries {
  std::string title;
  std::string x_label = "x";
  std::string y_label = "y";
  std::vector<std::pair<double, double>> points;
  bool markers = false;
};

struct PlotOutput {
  std::string svg;
  CsvTable csv;
};

/// Self-contained SVG with a single polyline (optionally point markers) and
/// the same data as CSV. Deterministic. Throws std::invalid_argument on empty
/// or non-finite data.
PlotOutput emit_plot_data(const PlotSeries& series);

void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace opo::io
