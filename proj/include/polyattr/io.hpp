// Deterministic experiment outputs: CSV tables, key = value summaries,
// modal snapshot text blocks and minimal SVG line charts.
#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "polyattr/spectral.hpp"

namespace polyattr::io {

/// Shortest round-trip formatting of a double ("%.17g" trimmed); NaN maps to
/// an empty cell so optional columns stay machine-readable.
std::string format_double(double v);

/// Rectangular CSV: one header row, no trailing delimiter, rows written in
/// column-major series order.  All columns must have equal length.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;
};

void write_csv(const std::filesystem::path& path, const CsvTable& table);

/// key = value record, one key per line, in insertion order.
struct TextRecord {
  std::vector<std::pair<std::string, std::string>> entries;

  void add(const std::string& key, const std::string& value);
  void add(const std::string& key, double value);
  void add(const std::string& key, std::size_t value);
  void add(const std::string& key, bool value);
};

void write_record(const std::filesystem::path& path, const TextRecord& record);

/// Modal snapshot blocks: "# snapshot t=<time>" then one "<j> <a_j> <b_j>"
/// line per mode, closed by "# end".
void write_snapshots(const std::filesystem::path& path,
                     const std::vector<spectral::State>& states);

/// One named series of (x, y) points.
struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

/// Static SVG line chart; log-scale flags drop non-positive points.
void write_svg_chart(const std::filesystem::path& path, const std::string& title,
                     const std::vector<Series>& series, bool log_x = false,
                     bool log_y = false);

}  // namespace polyattr::io
