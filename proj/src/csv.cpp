#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "opo/errors.hpp"
#include "opo/io.hpp"

namespace opo::io {
namespace {

[[noreturn]] void schema_error(const std::string& source, std::size_t line, std::size_t column,
                               const std::string& message) {
  throw SchemaError(source + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " +
                    message);
}

std::vector<std::pair<std::string, std::size_t>> split_fields(const std::string& line) {
  std::vector<std::pair<std::string, std::size_t>> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    const std::size_t end = comma == std::string::npos ? line.size() : comma;
    fields.emplace_back(line.substr(start, end - start), start + 1);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return fields;
}

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
  return s;
}

std::size_t as_index(double x) {
  if (!(x >= 0.0) || x != std::floor(x)) throw SchemaError("trace index must be a non-negative integer");
  return static_cast<std::size_t>(x);
}

}  // namespace

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", x);
  return buf;
}

void write_csv(std::ostream& out, const CsvTable& table) {
  out << join(table.header) << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out << ',';
      const bool integer = std::find(table.integer_columns.begin(), table.integer_columns.end(), j) !=
                           table.integer_columns.end();
      if (integer) {
        out << static_cast<long long>(row[j]);
      } else {
        out << format_number(row[j]);
      }
    }
    out << '\n';
  }
}

void write_csv_file(const std::filesystem::path& path, const CsvTable& table) {
  std::ostringstream text;
  write_csv(text, table);
  write_text_file(path, text.str());
}

CsvTable read_csv(std::istream& in, const std::vector<std::string>& expected,
                  const std::string& source) {
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (!have_header) {
      for (const auto& [name, col] : fields) table.header.push_back(name);
      if (!expected.empty() && table.header != expected)
        schema_error(source, line_no, 1,
                     "expected header '" + join(expected) + "', found '" + line + "'");
      have_header = true;
      continue;
    }
    if (fields.size() != table.header.size())
      schema_error(source, line_no, fields.back().second,
                   "expected " + std::to_string(table.header.size()) + " fields, found " +
                       std::to_string(fields.size()));
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& [text, col] : fields) {
      double value = 0.0;
      const char* first = text.data();
      const char* last = text.data() + text.size();
      const auto [ptr, ec] = std::from_chars(first, last, value);
      if (text.empty() || ec != std::errc() || ptr != last)
        schema_error(source, line_no, col, "cannot parse number '" + text + "'");
      row.push_back(value);
    }
    table.rows.push_back(std::move(row));
  }
  if (!have_header) schema_error(source, std::max<std::size_t>(line_no, 1), 1, "missing header");
  return table;
}

CsvTable read_csv_file(const std::filesystem::path& path, const std::vector<std::string>& expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open " + path.string());
  return read_csv(in, expected, path.string());
}

CsvTable threshold_table(const DataSeries& data) {
  CsvTable t{kThresholdColumns, {}, {}};
  for (const auto& p : data.points()) t.rows.push_back({p.x, p.y});
  return t;
}

DataSeries threshold_series(const CsvTable& table) {
  std::vector<DataPoint> pts;
  for (const auto& r : table.rows) pts.push_back({r.at(0), r.at(1), std::nullopt});
  return DataSeries(std::move(pts));
}

CsvTable squeezing_table(const DataSeries& data) {
  CsvTable t{kSqueezingColumns, {}, {}};
  for (const auto& p : data.points()) t.rows.push_back({p.x, p.y});
  return t;
}

DataSeries squeezing_series(const CsvTable& table) { return threshold_series(table); }

CsvTable trace_table(const NoiseTrace& trace) {
  CsvTable t{kTraceColumns, {}, {0}};
  for (const auto& p : trace.points)
    t.rows.push_back({static_cast<double>(p.index), p.phase, p.variance_db});
  return t;
}

NoiseTrace trace_from_table(const CsvTable& table, TraceKind kind) {
  NoiseTrace trace;
  trace.kind = kind;
  for (const auto& r : table.rows) {
    if (!std::isfinite(r.at(1)) || !std::isfinite(r.at(2)))
      throw SchemaError("trace contains non-finite values");
    trace.points.push_back({as_index(r.at(0)), r.at(1), r.at(2)});
    trace.config.phase_profile.push_back(r.at(1));
  }
  trace.config.n_points = trace.points.size();
  return trace;
}

CsvTable spectrum_table(const std::vector<SpectrumRow>& rows) {
  CsvTable t{kSpectrumColumns, {}, {}};
  for (const auto& r : rows) t.rows.push_back({r.freq_hz, r.var_sq_db, r.var_asq_db, r.purity});
  return t;
}

CsvTable attenuation_table(const std::vector<AttenuationPoint>& rows) {
  CsvTable t{kAttenuationColumns, {}, {}};
  for (const auto& r : rows) t.rows.push_back({r.transmission, r.var_sq_db, r.var_asq_db});
  return t;
}

CsvTable frontier_table(const std::vector<FrontierPoint>& rows) {
  CsvTable t{kFrontierColumns, {}, {}};
  for (const auto& r : rows) t.rows.push_back({angular_to_hz(r.gamma2), r.predicted_var_sq_db});
  return t;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw SchemaError("cannot write " + path.string());
  out << text;
  if (!out) throw SchemaError("write failed for " + path.string());
}

}  // namespace opo::io
