#include "fluxread/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "fluxread/errors.hpp"

namespace fluxread {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  for (std::size_t c = 0; c < header.size(); ++c) os << (c ? "," : "") << header[c];
  os << '\n';
  for (const auto& row : rows) {
    if (row.size() != header.size()) throw Error("csv row width does not match header");
    for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << format_double(row[c]);
    os << '\n';
  }
  if (!os) throw Error("failed writing " + path.string());
}

namespace {

bool parse_number(std::string s, double& out) {
  s.erase(0, s.find_first_not_of(" \t\r"));
  s.erase(s.find_last_not_of(" \t\r") + 1);
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

XYData read_xy_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read input file " + path.string());
  XYData data;
  std::string line;
  int line_no = 0;
  bool first = true;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#')
      continue;
    const auto comma = line.find(',');
    double x = 0.0, y = 0.0;
    const bool ok = comma != std::string::npos && parse_number(line.substr(0, comma), x) &&
                    parse_number(line.substr(comma + 1), y);
    if (!ok) {
      if (first) {
        first = false;
        continue;
      }
      throw Error(path.string() + ":" + std::to_string(line_no) + ": expected two numbers");
    }
    first = false;
    data.x.push_back(x);
    data.y.push_back(y);
  }
  return data;
}

void write_svg(const std::filesystem::path& path, const SvgPlot& plot) {
  constexpr double width = 720, height = 480, left = 80, right = 160, top = 40, bottom = 60;
  double x_lo = INFINITY, x_hi = -INFINITY, y_lo = INFINITY, y_hi = -INFINITY;
  auto ty = [&](double y) { return plot.log_y ? std::log10(y) : y; };
  for (const auto& s : plot.series) {
    for (std::size_t k = 0; k < s.x.size(); ++k) {
      if (!std::isfinite(s.x[k]) || !std::isfinite(s.y[k]) || (plot.log_y && s.y[k] <= 0.0)) continue;
      x_lo = std::min(x_lo, s.x[k]);
      x_hi = std::max(x_hi, s.x[k]);
      y_lo = std::min(y_lo, ty(s.y[k]));
      y_hi = std::max(y_hi, ty(s.y[k]));
    }
  }
  if (!(x_hi > x_lo)) x_hi = x_lo + 1.0;
  if (!(y_hi > y_lo)) y_hi = y_lo + 1.0;
  if (plot.log_y) {
    y_lo = std::floor(y_lo);
    y_hi = std::ceil(y_hi);
  }
  auto px = [&](double x) { return left + (x - x_lo) / (x_hi - x_lo) * (width - left - right); };
  auto py = [&](double y) { return height - bottom - (ty(y) - y_lo) / (y_hi - y_lo) * (height - top - bottom); };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\">" << plot.title << "</text>\n";
  os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << width - left - right
     << "\" height=\"" << height - top - bottom << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double xv = x_lo + (x_hi - x_lo) * t / 4.0;
    os << "<text x=\"" << px(xv) << "\" y=\"" << height - bottom + 16 << "\" text-anchor=\"middle\">"
       << format_double(std::round(xv * 1e12) / 1e12) << "</text>\n";
  }
  if (plot.log_y) {
    for (int e = static_cast<int>(y_lo); e <= static_cast<int>(y_hi); ++e)
      os << "<text x=\"" << left - 6 << "\" y=\"" << py(std::pow(10.0, e)) + 4
         << "\" text-anchor=\"end\">1e" << e << "</text>\n";
  } else {
    for (int t = 0; t <= 4; ++t) {
      const double yv = y_lo + (y_hi - y_lo) * t / 4.0;
      os << "<text x=\"" << left - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">"
         << format_double(std::round(yv * 1e6) / 1e6) << "</text>\n";
    }
  }
  os << "<text x=\"" << (left + width - right) / 2 << "\" y=\"" << height - 20
     << "\" text-anchor=\"middle\">" << plot.x_label << "</text>\n";
  os << "<text x=\"20\" y=\"" << height / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
     << height / 2 << ")\">" << plot.y_label << "</text>\n";

  int legend = 0;
  for (const auto& s : plot.series) {
    std::ostringstream pts;
    for (std::size_t k = 0; k < s.x.size(); ++k) {
      if (!std::isfinite(s.x[k]) || !std::isfinite(s.y[k]) || (plot.log_y && s.y[k] <= 0.0)) continue;
      pts << px(s.x[k]) << ',' << py(s.y[k]) << ' ';
      if (s.markers)
        os << "<circle cx=\"" << px(s.x[k]) << "\" cy=\"" << py(s.y[k]) << "\" r=\"3\" fill=\"none\" stroke=\""
           << s.color << "\"/>\n";
    }
    if (!s.markers)
      os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\""
         << (s.dashed ? " stroke-dasharray=\"6 4\"" : "") << " points=\"" << pts.str() << "\"/>\n";
    const double ly = top + 16 + 18 * legend++;
    os << "<line x1=\"" << width - right + 10 << "\" y1=\"" << ly << "\" x2=\"" << width - right + 34
       << "\" y2=\"" << ly << "\" stroke=\"" << s.color << "\"" << (s.dashed ? " stroke-dasharray=\"6 4\"" : "")
       << "/>\n<text x=\"" << width - right + 40 << "\" y=\"" << ly + 4 << "\">" << s.label << "</text>\n";
  }
  os << "</svg>\n";

  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error("cannot open " + path.string() + " for writing");
  file << os.str();
}

}  // namespace fluxread
