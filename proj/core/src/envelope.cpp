#include "ccmap/envelope.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "ccmap/cci.hpp"
#include "ccmap/error.hpp"

namespace ccmap {

Provenance parse_provenance(std::string_view name) {
  if (name == "classical") return Provenance::classical;
  if (name == "quantum") return Provenance::quantum;
  throw ConfigError("unknown provenance \"" + std::string(name) + "\" (expected classical or quantum)");
}

std::string to_string(Provenance p) { return p == Provenance::classical ? "classical" : "quantum"; }

std::string to_string(EnvelopeKind k) {
  switch (k) {
    case EnvelopeKind::upper: return "upper";
    case EnvelopeKind::lower: return "lower";
    default: return "frontier";
  }
}

MapPoint map_point(const BitDataset& d, const std::string& label, Provenance provenance, std::size_t mc_budget,
                   std::uint64_t seed) {
  MapPoint p;
  p.label = label;
  p.provenance = provenance;
  p.n = d.width();
  p.samples = d.size();
  const auto pmf = empirical_pmf(d);
  if (d.width() <= kExactQcliLimit) {
    p.qcli = qcli_exact(pmf).qcli;
  } else {
    p.qcli = qcli_mc(d, mc_budget, seed).qcli;
    p.qcli_exact = false;
  }
  p.cci = cci(pmf).cci;
  return p;
}

std::string map_csv(std::span<const MapPoint> points) {
  std::ostringstream os;
  os.precision(17);
  os << "label,qcli,cci,provenance,qcli_method,n,samples\n";
  for (const auto& p : points) {
    os << p.label << ',' << p.qcli << ',' << p.cci << ',' << to_string(p.provenance) << ','
       << (p.qcli_exact ? "exact" : "mc") << ',' << p.n << ',' << p.samples << '\n';
  }
  return os.str();
}

double EnvelopeCurve::value_at(double x) const {
  if (smoothed.empty()) throw DataError("empty envelope");
  if (x <= smoothed.front().x) return smoothed.front().y;
  if (x >= smoothed.back().x) return smoothed.back().y;
  const auto it = std::upper_bound(smoothed.begin(), smoothed.end(), x, [](double v, const XY& p) { return v < p.x; });
  const XY& hi = *it;
  const XY& lo = *(it - 1);
  const double a = (x - lo.x) / (hi.x - lo.x);
  return (1.0 - a) * lo.y + a * hi.y;
}

std::vector<double> moving_average(std::span<const double> values, int window) {
  if (window < 1) throw ConfigError("smoothing window must be >= 1");
  const auto n = static_cast<std::ptrdiff_t>(values.size());
  const std::ptrdiff_t half = (window - 1) / 2;
  std::vector<double> out(values.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const std::ptrdiff_t h = std::min({half, i, n - 1 - i});
    double acc = 0.0;
    for (std::ptrdiff_t j = i - h; j <= i + h; ++j) acc += values[static_cast<std::size_t>(j)];
    out[static_cast<std::size_t>(i)] = acc / static_cast<double>(2 * h + 1);
  }
  return out;
}

namespace {

void smooth_into(EnvelopeCurve& c, int window) {
  std::vector<double> ys;
  for (const auto& p : c.anchors) ys.push_back(p.y);
  const auto s = moving_average(ys, window);
  c.smoothed.clear();
  for (std::size_t i = 0; i < s.size(); ++i) c.smoothed.push_back({c.anchors[i].x, s[i]});
}

void check_points(std::span<const XY> points) {
  for (const auto& p : points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw DataError("envelope input contains a non-finite point");
  }
}

}  // namespace

ScatterEnvelopes scatter_envelopes(std::span<const XY> points, double bin_width, std::size_t min_count, int window) {
  if (!(bin_width > 0.0)) throw ConfigError("bin width must be > 0");
  check_points(points);
  std::map<long long, std::vector<XY>> bins;
  for (const auto& p : points) bins[static_cast<long long>(std::floor(p.x / bin_width))].push_back(p);

  ScatterEnvelopes out;
  out.upper.kind = EnvelopeKind::upper;
  out.lower.kind = EnvelopeKind::lower;
  for (const auto& [m, pts] : bins) {
    if (pts.size() < min_count) continue;
    XY hi = pts.front();
    XY lo = pts.front();
    for (const auto& p : pts) {
      if (p.y > hi.y || (p.y == hi.y && p.x < hi.x)) hi = p;
      if (p.y < lo.y || (p.y == lo.y && p.x < lo.x)) lo = p;
    }
    const std::pair<double, double> edges{static_cast<double>(m) * bin_width, static_cast<double>(m + 1) * bin_width};
    out.upper.anchors.push_back(hi);
    out.upper.bins.push_back(edges);
    out.lower.anchors.push_back(lo);
    out.lower.bins.push_back(edges);
  }
  if (out.upper.anchors.size() < 2) throw DataError("envelopes need at least 2 nonempty bins");
  smooth_into(out.upper, window);
  smooth_into(out.lower, window);
  return out;
}

EnvelopeCurve frontier_envelope(std::span<const XY> points, int bin_count, std::size_t min_count, int window) {
  if (bin_count < 1) throw ConfigError("bin count must be >= 1");
  check_points(points);
  if (points.empty()) throw DataError("frontier needs at least one point");
  double xmin = std::numeric_limits<double>::infinity();
  double xmax = -xmin;
  for (const auto& p : points) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
  }
  const double width = (xmax - xmin) / bin_count;
  std::vector<std::size_t> count(static_cast<std::size_t>(bin_count), 0);
  std::vector<double> lowest(static_cast<std::size_t>(bin_count), std::numeric_limits<double>::infinity());
  for (const auto& p : points) {
    std::size_t b = width > 0.0 ? static_cast<std::size_t>(std::floor((p.x - xmin) / width)) : 0;
    b = std::min(b, static_cast<std::size_t>(bin_count - 1));
    ++count[b];
    lowest[b] = std::min(lowest[b], p.y);
  }

  EnvelopeCurve c;
  c.kind = EnvelopeKind::frontier;
  for (int b = 0; b < bin_count; ++b) {
    const auto i = static_cast<std::size_t>(b);
    if (count[i] < min_count) continue;
    const double lo = xmin + b * width;
    c.anchors.push_back({lo + 0.5 * width, lowest[i]});
    c.bins.push_back({lo, lo + width});
  }
  if (c.anchors.empty()) throw DataError("no frontier bin has at least " + std::to_string(min_count) + " points");
  // Piecewise-constant extension to the full x span.
  if (c.anchors.front().x > xmin) {
    c.anchors.insert(c.anchors.begin(), {xmin, c.anchors.front().y});
    c.bins.insert(c.bins.begin(), {xmin, xmin});
  }
  if (c.anchors.back().x < xmax) {
    c.anchors.push_back({xmax, c.anchors.back().y});
    c.bins.push_back({xmax, xmax});
  }
  smooth_into(c, window);
  return c;
}

std::string envelope_csv(const EnvelopeCurve& c) {
  std::ostringstream os;
  os.precision(17);
  os << "kind,x,y,smoothed_y\n";
  for (std::size_t i = 0; i < c.anchors.size(); ++i) {
    os << to_string(c.kind) << ',' << c.anchors[i].x << ',' << c.anchors[i].y << ',' << c.smoothed[i].y << '\n';
  }
  return os.str();
}

}  // namespace ccmap
