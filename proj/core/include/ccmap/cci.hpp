#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "ccmap/datasets.hpp"

namespace ccmap {

/// Symmetric pairwise mutual information in bits; the diagonal is unused (kept at 0).
struct MutualInfoMatrix {
  int n = 0;
  std::vector<double> mi;  // row-major n x n

  double at(int i, int j) const { return mi[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)]; }
  double& at(int i, int j) { return mi[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)]; }
};

struct TreeEdge {
  int i = 0;
  int j = 0;  // i < j
  double weight = 0.0;
};

struct TreeModel {
  int n = 0;
  std::vector<TreeEdge> edges;
  double tree_tc = 0.0;
};

struct CciReport {
  double total_tc = 0.0;
  double tree_tc = 0.0;
  double cci = 0.0;
  std::size_t samples = 0;
  std::size_t support = 0;
  TreeModel tree;
};

/// Plug-in estimates from the pairwise marginals, base 2. Needs at least 2 samples.
MutualInfoMatrix mutual_info_matrix(const BitDataset& d);
MutualInfoMatrix mutual_info_matrix(const EmpiricalPmf& p);

/// Maximum-weight spanning tree; equal weights prefer the lexicographically smallest (i, j).
TreeModel chow_liu_tree(const MutualInfoMatrix& mi);

/// sum_i H(X_i) - H(X) in bits. Throws CapacityError above the dense limit.
double total_correlation(const EmpiricalPmf& p);

/// Below this total correlation the indicator is reported as 0.
inline constexpr double kDegenerateTc = 1e-9;

CciReport cci(const BitDataset& d);
CciReport cci(const EmpiricalPmf& p);

struct TreeKlCheck {
  double kl = 0.0;
  double identity_gap = 0.0;
};

/// Builds p_T explicitly (n <= 16) and compares D_KL(p || p_T) to total_tc - tree_tc.
TreeKlCheck tree_kl_check(const EmpiricalPmf& p, const TreeModel& t);

std::string tree_edges_csv(const TreeModel& t);
std::string cci_report_json(const CciReport& r);

}  // namespace ccmap
