#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ccmap/datasets.hpp"
#include "ccmap/spectrum.hpp"
#include "ccmap/svg.hpp"

namespace ccmap {

enum class Provenance { classical, quantum };

Provenance parse_provenance(std::string_view name);
std::string to_string(Provenance p);

struct MapPoint {
  std::string label;
  double qcli = 0.0;
  double cci = 0.0;
  Provenance provenance = Provenance::classical;
  bool qcli_exact = true;
  int n = 0;
  std::size_t samples = 0;
};

/// Largest width at which map_point uses the exact QCLI; wider data uses the Monte-Carlo estimator.
inline constexpr int kExactQcliLimit = 20;

MapPoint map_point(const BitDataset& d, const std::string& label, Provenance provenance,
                   std::size_t mc_budget = kDefaultMcBudget, std::uint64_t seed = 0);

std::string map_csv(std::span<const MapPoint> points);

enum class EnvelopeKind { upper, lower, frontier };

std::string to_string(EnvelopeKind k);

struct EnvelopeCurve {
  EnvelopeKind kind = EnvelopeKind::upper;
  std::vector<XY> anchors;  // x strictly increasing
  std::vector<XY> smoothed;
  std::vector<std::pair<double, double>> bins;  // [lo, hi) of the bin each anchor came from

  /// Linear interpolation of the smoothed curve, constant beyond its ends.
  double value_at(double x) const;
};

/// Centered moving average; the window shrinks symmetrically at the edges.
std::vector<double> moving_average(std::span<const double> values, int window);

struct ScatterEnvelopes {
  EnvelopeCurve upper;
  EnvelopeCurve lower;
};

/// Bins [m*w, (m+1)*w) from 0; per bin with >= min_count points the argmax (upper) and argmin
/// (lower) keep their original x. Ties go to the smaller x. Throws DataError with fewer than 2 bins.
ScatterEnvelopes scatter_envelopes(std::span<const XY> points, double bin_width = 0.09, std::size_t min_count = 1,
                                   int window = 3);

/// Binwise minimum of y over `bin_count` equal bins spanning the x range, keeping bins with
/// >= min_count points at their centers, extended to x_min and x_max, then smoothed.
EnvelopeCurve frontier_envelope(std::span<const XY> points, int bin_count = 20, std::size_t min_count = 3,
                                int window = 3);

std::string envelope_csv(const EnvelopeCurve& c);

}  // namespace ccmap
