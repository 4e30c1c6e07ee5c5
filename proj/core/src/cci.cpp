#include "ccmap/cci.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "ccmap/error.hpp"

namespace ccmap {

namespace {

double plogp(double p) { return p > 0.0 ? p * std::log2(p) : 0.0; }

bool row_bit(std::span<const std::uint64_t> row, int q) {
  return (row[static_cast<std::size_t>(q / 64)] >> (q % 64)) & 1U;
}

struct Marginals {
  int n = 0;
  std::vector<double> single;                 // P(X_i = 1)
  std::vector<std::array<double, 4>> pair;    // row-major n x n, index 2*a + b
};

Marginals marginals(const EmpiricalPmf& p) {
  Marginals m;
  m.n = p.width();
  const auto n = static_cast<std::size_t>(m.n);
  m.single.assign(n, 0.0);
  m.pair.assign(n * n, {0.0, 0.0, 0.0, 0.0});
  std::vector<int> bits(n);
  p.for_each_atom([&](std::span<const std::uint64_t> row, double w) {
    for (std::size_t i = 0; i < n; ++i) {
      bits[i] = row_bit(row, static_cast<int>(i));
      if (bits[i]) m.single[i] += w;
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) m.pair[i * n + j][static_cast<std::size_t>(2 * bits[i] + bits[j])] += w;
    }
  });
  return m;
}

class UnionFind {
 public:
  explicit UnionFind(int n) : parent_(static_cast<std::size_t>(n)) { std::iota(parent_.begin(), parent_.end(), 0); }
  int find(int x) {
    while (parent_[static_cast<std::size_t>(x)] != x) {
      parent_[static_cast<std::size_t>(x)] = parent_[static_cast<std::size_t>(parent_[static_cast<std::size_t>(x)])];
      x = parent_[static_cast<std::size_t>(x)];
    }
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent_[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
    return true;
  }

 private:
  std::vector<int> parent_;
};

}  // namespace

MutualInfoMatrix mutual_info_matrix(const EmpiricalPmf& p) {
  const Marginals m = marginals(p);
  const auto n = static_cast<std::size_t>(m.n);
  MutualInfoMatrix out{m.n, std::vector<double>(n * n, 0.0)};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto& pij = m.pair[i * n + j];
      const double pi[2] = {1.0 - m.single[i], m.single[i]};
      const double pj[2] = {1.0 - m.single[j], m.single[j]};
      double mi = 0.0;
      for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
          const double joint = pij[static_cast<std::size_t>(2 * a + b)];
          if (joint > 0.0) mi += joint * std::log2(joint / (pi[a] * pj[b]));
        }
      }
      mi = std::max(mi, 0.0);
      out.mi[i * n + j] = mi;
      out.mi[j * n + i] = mi;
    }
  }
  return out;
}

MutualInfoMatrix mutual_info_matrix(const BitDataset& d) {
  if (d.size() < 2) throw DataError("mutual information needs at least 2 samples");
  return mutual_info_matrix(empirical_pmf(d));
}

TreeModel chow_liu_tree(const MutualInfoMatrix& mi) {
  if (mi.n < 2) throw ConfigError("a spanning tree needs at least 2 variables");
  std::vector<TreeEdge> candidates;
  for (int i = 0; i < mi.n; ++i) {
    for (int j = i + 1; j < mi.n; ++j) candidates.push_back({i, j, mi.at(i, j)});
  }
  // Stable sort keeps the lexicographic (i, j) order among equal weights.
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const TreeEdge& a, const TreeEdge& b) { return a.weight > b.weight; });
  TreeModel t;
  t.n = mi.n;
  UnionFind uf(mi.n);
  for (const auto& e : candidates) {
    if (uf.unite(e.i, e.j)) {
      t.edges.push_back(e);
      t.tree_tc += e.weight;
      if (static_cast<int>(t.edges.size()) == mi.n - 1) break;
    }
  }
  return t;
}

double total_correlation(const EmpiricalPmf& p) {
  if (!p.dense()) {
    throw CapacityError("joint entropy needs n <= " + std::to_string(EmpiricalPmf::kDenseLimit));
  }
  double joint = 0.0;
  std::vector<double> ones(static_cast<std::size_t>(p.width()), 0.0);
  p.for_each_atom([&](std::span<const std::uint64_t> row, double w) {
    joint -= plogp(w);
    for (int q = 0; q < p.width(); ++q) {
      if (row_bit(row, q)) ones[static_cast<std::size_t>(q)] += w;
    }
  });
  double marg = 0.0;
  for (double p1 : ones) marg -= plogp(p1) + plogp(1.0 - p1);
  return std::max(marg - joint, 0.0);
}

CciReport cci(const EmpiricalPmf& p) {
  CciReport r;
  r.total_tc = total_correlation(p);
  r.tree = chow_liu_tree(mutual_info_matrix(p));
  r.tree_tc = r.tree.tree_tc;
  r.samples = p.sample_count();
  r.support = p.support_size();
  if (r.total_tc < kDegenerateTc) {
    r.cci = 0.0;
  } else {
    r.cci = std::clamp(1.0 - r.tree_tc / r.total_tc, 0.0, 1.0);
  }
  return r;
}

CciReport cci(const BitDataset& d) {
  if (d.size() < 2) throw DataError("mutual information needs at least 2 samples");
  return cci(empirical_pmf(d));
}

TreeKlCheck tree_kl_check(const EmpiricalPmf& p, const TreeModel& t) {
  const int n = p.width();
  if (n > 16) throw CapacityError("explicit tree distribution needs n <= 16");
  const Marginals m = marginals(p);
  const auto nn = static_cast<std::size_t>(n);
  const auto pi = [&](int q, int v) { return v ? m.single[static_cast<std::size_t>(q)] : 1.0 - m.single[static_cast<std::size_t>(q)]; };

  TreeKlCheck out;
  const auto mass = p.dense_mass();
  for (std::uint64_t x = 0; x < mass.size(); ++x) {
    const double px = mass[x];
    if (px <= 0.0) continue;
    double log_pt = 0.0;
    for (int q = 0; q < n; ++q) log_pt += std::log2(pi(q, static_cast<int>((x >> q) & 1U)));
    for (const auto& e : t.edges) {
      const int a = static_cast<int>((x >> e.i) & 1U);
      const int b = static_cast<int>((x >> e.j) & 1U);
      const double joint = m.pair[static_cast<std::size_t>(e.i) * nn + static_cast<std::size_t>(e.j)][static_cast<std::size_t>(2 * a + b)];
      log_pt += std::log2(joint) - std::log2(pi(e.i, a)) - std::log2(pi(e.j, b));
    }
    out.kl += px * (std::log2(px) - log_pt);
  }
  out.identity_gap = std::abs(out.kl - (total_correlation(p) - t.tree_tc));
  return out;
}

std::string tree_edges_csv(const TreeModel& t) {
  std::ostringstream os;
  os.precision(17);
  os << "i,j,weight\n";
  for (const auto& e : t.edges) os << e.i << ',' << e.j << ',' << e.weight << '\n';
  return os.str();
}

std::string cci_report_json(const CciReport& r) {
  nlohmann::ordered_json j;
  j["total_tc_bits"] = r.total_tc;
  j["tree_tc_bits"] = r.tree_tc;
  j["cci"] = r.cci;
  j["samples"] = r.samples;
  j["support_size"] = r.support;
  j["degenerate"] = r.total_tc < kDegenerateTc;
  auto& edges = j["tree_edges"] = nlohmann::json::array();
  for (const auto& e : r.tree.edges) edges.push_back({{"i", e.i}, {"j", e.j}, {"weight", e.weight}});
  return j.dump(2);
}

}  // namespace ccmap
