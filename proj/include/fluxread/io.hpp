#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace fluxread {

/// Shortest representation that parses back to the same double; "nan"/"inf"
/// for non-finite values.
std::string format_double(double v);

/// Writes rows of doubles under a header; the column count must match.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

struct XYData {
  std::vector<double> x;
  std::vector<double> y;
};

/// Reads a two-column numeric CSV. A non-numeric first line is taken as a
/// header; blank lines and lines starting with '#' are skipped. Throws
/// ConfigError when the file is missing and Error on malformed content.
XYData read_xy_csv(const std::filesystem::path& path);

struct SvgSeries {
  std::string label;
  std::string color;
  std::vector<double> x;
  std::vector<double> y;
  bool dashed = false;
  bool markers = false;
};

struct SvgPlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
  std::vector<SvgSeries> series;
};

void write_svg(const std::filesystem::path& path, const SvgPlot& plot);

}  // namespace fluxread
