#include "polyattr/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace polyattr::io {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  return out;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  // Shortest representation that round-trips.
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    double back = 0.0;
    std::sscanf(buf, "%lf", &back);
    if (back == v) return buf;
  }
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  if (table.header.size() != table.columns.size())
    throw std::invalid_argument("write_csv: header/column count mismatch");
  const std::size_t rows = table.columns.empty() ? 0 : table.columns[0].size();
  for (const auto& col : table.columns)
    if (col.size() != rows)
      throw std::invalid_argument("write_csv: ragged columns");

  auto out = open_out(path);
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (c) out << ',';
    out << table.header[c];
  }
  out << '\n';
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      if (c) out << ',';
      out << format_double(table.columns[c][r]);
    }
    out << '\n';
  }
}

void TextRecord::add(const std::string& key, const std::string& value) {
  entries.emplace_back(key, value);
}
void TextRecord::add(const std::string& key, double value) {
  entries.emplace_back(key, format_double(value));
}
void TextRecord::add(const std::string& key, std::size_t value) {
  entries.emplace_back(key, std::to_string(value));
}
void TextRecord::add(const std::string& key, bool value) {
  entries.emplace_back(key, value ? "true" : "false");
}

void write_record(const std::filesystem::path& path, const TextRecord& record) {
  auto out = open_out(path);
  for (const auto& [key, value] : record.entries)
    out << key << " = " << value << '\n';
}

void write_snapshots(const std::filesystem::path& path,
                     const std::vector<spectral::State>& states) {
  auto out = open_out(path);
  for (const auto& s : states) {
    out << "# snapshot t=" << format_double(s.time) << '\n';
    for (std::size_t j = 0; j < s.a.size(); ++j)
      out << (j + 1) << ' ' << format_double(s.a[j]) << ' '
          << format_double(s.b[j]) << '\n';
    out << "# end\n";
  }
}

namespace {

struct Range {
  double lo = 0.0;
  double hi = 1.0;
  double map(double v, double px_lo, double px_hi) const {
    const double t = hi > lo ? (v - lo) / (hi - lo) : 0.5;
    return px_lo + t * (px_hi - px_lo);
  }
};

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                    "#9467bd", "#ff7f0e", "#8c564b"};

}  // namespace

void write_svg_chart(const std::filesystem::path& path, const std::string& title,
                     const std::vector<Series>& series, bool log_x, bool log_y) {
  const double width = 760, height = 480;
  const double ml = 70, mr = 20, mt = 40, mb = 50;

  // Collect transformed points per series.
  std::vector<std::vector<std::pair<double, double>>> pts(series.size());
  Range rx, ry;
  bool have = false;
  for (std::size_t s = 0; s < series.size(); ++s) {
    for (std::size_t i = 0; i < series[s].x.size(); ++i) {
      double x = series[s].x[i], y = series[s].y[i];
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      if (log_x) {
        if (!(x > 0.0)) continue;
        x = std::log10(x);
      }
      if (log_y) {
        if (!(y > 0.0)) continue;
        y = std::log10(y);
      }
      if (!have) {
        rx = {x, x};
        ry = {y, y};
        have = true;
      } else {
        rx.lo = std::min(rx.lo, x);
        rx.hi = std::max(rx.hi, x);
        ry.lo = std::min(ry.lo, y);
        ry.hi = std::max(ry.hi, y);
      }
      pts[s].emplace_back(x, y);
    }
  }
  if (rx.hi == rx.lo) rx.hi = rx.lo + 1.0;
  if (ry.hi == ry.lo) ry.hi = ry.lo + 1.0;

  auto out = open_out(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << ' '
      << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"16\">"
      << title << "</text>\n";
  out << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\""
      << width - ml - mr << "\" height=\"" << height - mt - mb
      << "\" fill=\"none\" stroke=\"#444\"/>\n";

  // Four ticks per axis.
  for (int i = 0; i <= 4; ++i) {
    const double fx = rx.lo + (rx.hi - rx.lo) * i / 4.0;
    const double px = rx.map(fx, ml, width - mr);
    const double label = log_x ? std::pow(10.0, fx) : fx;
    out << "<line x1=\"" << px << "\" y1=\"" << height - mb << "\" x2=\"" << px
        << "\" y2=\"" << height - mb + 5 << "\" stroke=\"#444\"/>\n";
    out << "<text x=\"" << px << "\" y=\"" << height - mb + 20
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"11\">"
        << format_double(label) << "</text>\n";

    const double fy = ry.lo + (ry.hi - ry.lo) * i / 4.0;
    const double py = height - mb - (fy - ry.lo) / (ry.hi - ry.lo) * (height - mt - mb);
    const double ylabel = log_y ? std::pow(10.0, fy) : fy;
    out << "<line x1=\"" << ml - 5 << "\" y1=\"" << py << "\" x2=\"" << ml
        << "\" y2=\"" << py << "\" stroke=\"#444\"/>\n";
    out << "<text x=\"" << ml - 8 << "\" y=\"" << py + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
        << format_double(ylabel) << "</text>\n";
  }

  for (std::size_t s = 0; s < pts.size(); ++s) {
    const char* color = kPalette[s % std::size(kPalette)];
    out << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : pts[s]) {
      const double px = rx.map(x, ml, width - mr);
      const double py =
          height - mb - (y - ry.lo) / (ry.hi - ry.lo) * (height - mt - mb);
      out << px << ',' << py << ' ';
    }
    out << "\"/>\n";
    out << "<text x=\"" << width - mr - 8 << "\" y=\"" << mt + 18 + 16 * s
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\" "
           "fill=\""
        << color << "\">" << series[s].name << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace polyattr::io
