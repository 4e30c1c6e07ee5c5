#include "ccmap/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace ccmap {

namespace {

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_svg(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                       std::span<const SvgSeries> series) {
  constexpr double W = 640, H = 480, L = 70, R = 20, T = 40, B = 60;
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
  for (const auto& s : series) {
    for (const auto& p : s.points) {
      if (!std::isfinite(p.x) || !std::isfinite(p.y)) continue;
      xmin = std::min(xmin, p.x);
      xmax = std::max(xmax, p.x);
      ymin = std::min(ymin, p.y);
      ymax = std::max(ymax, p.y);
    }
  }
  if (!std::isfinite(xmin)) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  if (xmax - xmin < 1e-12) xmin -= 0.5, xmax += 0.5;
  if (ymax - ymin < 1e-12) ymin -= 0.5, ymax += 0.5;
  const auto px = [&](double x) { return L + (x - xmin) / (xmax - xmin) * (W - L - R); };
  const auto py = [&](double y) { return H - B - (y - ymin) / (ymax - ymin) * (H - T - B); };

  std::ostringstream os;
  os.precision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<metadata>\n";
  os.precision(17);
  for (const auto& s : series) {
    os << "# series: " << escape(s.name) << "\nx,y\n";
    for (const auto& p : s.points) os << p.x << ',' << p.y << '\n';
  }
  os.precision(6);
  os << "</metadata>\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(title) << "</text>\n";
  os << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = xmin + (xmax - xmin) * i / 4.0;
    const double yv = ymin + (ymax - ymin) * i / 4.0;
    os << "<text x=\"" << px(xv) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">" << xv << "</text>\n";
    os << "<text x=\"" << L - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">" << yv << "</text>\n";
  }
  os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 18 << "\" text-anchor=\"middle\">" << escape(xlabel) << "</text>\n";
  os << "<text transform=\"translate(18," << (T + H - B) / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
     << escape(ylabel) << "</text>\n";

  int legend = 0;
  for (const auto& s : series) {
    if (s.line) {
      os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"2\""
         << (s.dashed ? " stroke-dasharray=\"6,4\"" : "") << " points=\"";
      for (const auto& p : s.points) os << px(p.x) << ',' << py(p.y) << ' ';
      os << "\"/>\n";
    } else {
      for (const auto& p : s.points) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) continue;
        os << "<circle cx=\"" << px(p.x) << "\" cy=\"" << py(p.y) << "\" r=\"2.5\" fill=\"" << s.color
           << "\" fill-opacity=\"0.7\"/>\n";
      }
    }
    const double ly = T + 14 + 16 * legend++;
    os << "<rect x=\"" << W - R - 150 << "\" y=\"" << ly - 9 << "\" width=\"10\" height=\"10\" fill=\"" << s.color << "\"/>"
       << "<text x=\"" << W - R - 135 << "\" y=\"" << ly << "\">" << escape(s.name) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace ccmap
