// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ccmap/bits.hpp"
#include "ccmap/cci.hpp"
#include "ccmap/codec.hpp"
#include "ccmap/datasets.hpp"
#include "ccmap/eval.hpp"
#include "ccmap/experiments.hpp"
#include "ccmap/iqp.hpp"
#include "ccmap/mmd.hpp"
#include "ccmap/spectrum.hpp"

using namespace ccmap;

namespace {

// Tolerances and limits.
constexpr double kMmdEquivTol = 1e-9;
constexpr double kKlIdentityTol = 1e-9;
constexpr double kCciTol = 1e-9;
constexpr double kMcFidelityTol = 0.02;
constexpr double kQuadRelTol = 0.05;
constexpr double kTvSlack = 1.05;
constexpr double kDenseOracleTol = 1e-10;
constexpr double kNormTol = 1e-9;
constexpr double kGradRelTol = 1e-5;
constexpr int kTemporalMinWins = 7;
constexpr double kCouplingMaxP = 0.01;
constexpr std::size_t kSweepMinPoints = 40;
constexpr double kMetricOracleTol = 1e-9;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string slurp(const std::string& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

BitDataset structured(int n, std::size_t m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::uint64_t> proto{rng() & low_mask(n), rng() & low_mask(n), rng() & low_mask(n)};
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::uint64_t> keys(m);
  for (auto& k : keys) {
    k = proto[rng() % 3];
    for (int q = 0; q < n; ++q)
      if (u(rng) < 0.15) k ^= 1ULL << q;
  }
  return BitDataset::from_keys(n, keys);
}

BitDataset even_parity(int n, std::size_t m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::uint64_t> keys(m);
  for (auto& k : keys) {
    k = rng() & low_mask(n - 1);
    k |= static_cast<std::uint64_t>(std::popcount(k) & 1) << (n - 1);
  }
  return BitDataset::from_keys(n, keys);
}

std::vector<double> random_pmf(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> p(std::size_t{1} << n);
  double s = 0;
  for (auto& x : p) s += (x = u(rng) < 0.2 ? 0.0 : u(rng));
  for (auto& x : p) x /= s;
  return p;
}

// ---------------------------------------------------------------- 1
Outcome mmd_equivalence() {
  double worst = 0;
  for (int t = 0; t < 100; ++t) {
    const int n = 2 + t % 11;
    const auto a = structured(n, 200, 1000 + static_cast<std::uint64_t>(t));
    const auto b = iid_uniform(n, 150, 2000 + static_cast<std::uint64_t>(t));
    const double sigma = default_sigma(n);
    const double raw = mmd_raw(a, b, {sigma, MmdEstimator::biased});
    const double pauli = mmd_pauli(empirical_z_expectations(a), empirical_z_expectations(b), pauli_coefficients(n, sigma));
    worst = std::max(worst, std::abs(pauli - raw));
  }
  return {worst <= kMmdEquivTol, fmt("max |pauli - raw| = %.3e over 100 pairs", worst)};
}

// ---------------------------------------------------------------- 2
Outcome chow_liu_identity() {
  std::mt19937_64 rng(77);
  double worst = 0;
  for (int t = 0; t < 50; ++t) {
    const int n = 2 + t % 9;
    const auto p = EmpiricalPmf::from_dense(n, random_pmf(n, rng));
    const auto r = cci(p);
    worst = std::max(worst, std::abs(tree_kl_check(p, r.tree).kl - (r.total_tc - r.tree_tc)));
  }
  return {worst <= kKlIdentityTol, fmt("max |KL - (TC - TC_tree)| = %.3e over 50 pmfs", worst)};
}

// ---------------------------------------------------------------- 3
Outcome cci_extremes() {
  std::vector<double> parity(8, 0.0), equal(8, 0.0);
  for (std::size_t x = 0; x < 8; ++x)
    if (std::popcount(x) % 2 == 0) parity[x] = 0.25;
  equal[0] = equal[7] = 0.5;
  const double a = cci(EmpiricalPmf::from_dense(3, parity)).cci;
  const double b = cci(EmpiricalPmf::from_dense(3, equal)).cci;
  return {std::abs(a - 1.0) <= kCciTol && std::abs(b) <= kCciTol, fmt("parity %.12f, all-equal %.12f", a, b)};
}

// ---------------------------------------------------------------- 4
Outcome qcli_null() {
  const auto cal = nlohmann::json::parse(slurp(CCMAP_NULL_THRESHOLD_FILE));
  const double threshold = cal.at("threshold").get<double>();
  double acc = 0;
  for (std::uint64_t s = 1; s <= 10; ++s) acc += qcli_exact(iid_uniform(16, 10000, s)).qcli;
  const double null_mean = acc / 10;
  const double parity = qcli_exact(even_parity(16, 10000, 1)).qcli;
  return {null_mean < threshold && null_mean < parity,
          fmt("null mean %.5f, threshold %.5f, even-parity %.5f", null_mean, threshold, parity)};
}

// ---------------------------------------------------------------- 5
Outcome mc_fidelity() {
  std::string detail;
  bool ok = true;
  for (int kind = 0; kind < 2; ++kind) {
    const auto d = kind == 0 ? iid_uniform(14, 10000, 5) : structured(14, 10000, 5);
    const double exact = qcli_exact(d).qcli;
    double acc = 0;
    for (std::uint64_t s = 1; s <= 10; ++s) acc += std::abs(qcli_mc(d, 20000, s).qcli - exact);
    ok = ok && acc / 10 <= kMcFidelityTol;
    detail += fmt("%s mean |mc - exact| = %.4f (exact %.4f)%s", kind == 0 ? "iid" : "structured", acc / 10, exact,
                  kind == 0 ? "; " : "");
  }
  return {ok, detail};
}

// ---------------------------------------------------------------- 6
Outcome second_order() {
  const auto b = binomial_baseline(16);
  const double bmin = *std::min_element(b.m.begin(), b.m.end());
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst_rel = 0, worst_tv = 0;
  for (int t = 0; t < 100; ++t) {
    std::vector<double> d(17);
    for (auto& x : d) x = u(rng);
    const double mean = std::accumulate(d.begin(), d.end(), 0.0) / 17;
    double peak = 0;
    for (auto& x : d) peak = std::max(peak, std::abs(x -= mean));
    OrderSpectrum m = b;
    for (std::size_t k = 0; k < 17; ++k) m.m[k] += d[k] / peak * 0.01 * bmin;
    const double js = js_divergence(m, b, 0.0);
    worst_rel = std::max(worst_rel, std::abs(js - second_order_js(m, b)) / js);
    worst_tv = std::max(worst_tv, tv_distance(m, b) / std::sqrt(2 * std::numbers::ln2 * js));
  }
  return {worst_rel <= kQuadRelTol && worst_tv <= kTvSlack,
          fmt("max relative error %.4f, max tv / sqrt(2 ln2 js) = %.4f", worst_rel, worst_tv)};
}

// ---------------------------------------------------------------- 7
Outcome iqp_simulator() {
  using cplx = std::complex<double>;
  double dense_err = 0;
  for (int n = 1; n <= 4; ++n) {
    for (std::uint64_t s = 1; s <= 5; ++s) {
      const auto c = random_circuit(n, std::min<std::size_t>(available_subsets(n, n), 2 + s), n, s, 1.3);
      const std::size_t dim = std::size_t{1} << n;
      std::vector<std::vector<cplx>> u(dim, std::vector<cplx>(dim, 0.0));
      for (std::size_t i = 0; i < dim; ++i) u[i][i] = 1.0;
      for (const auto& g : c.generators) {
        std::vector<std::vector<cplx>> gm(dim, std::vector<cplx>(dim, 0.0)), next(dim, std::vector<cplx>(dim, 0.0));
        for (std::size_t x = 0; x < dim; ++x) {
          gm[x][x] += std::cos(g.theta);
          gm[x ^ g.mask][x] += cplx(0, std::sin(g.theta));
        }
        for (std::size_t i = 0; i < dim; ++i)
          for (std::size_t k = 0; k < dim; ++k)
            for (std::size_t j = 0; j < dim; ++j) next[i][j] += gm[i][k] * u[k][j];
        u = next;
      }
      const auto p = exact_distribution(c).probs;
      for (std::size_t z = 0; z < dim; ++z) dense_err = std::max(dense_err, std::abs(p[z] - std::norm(u[z][0])));
    }
  }
  double norm_err = 0;
  for (std::uint64_t s = 1; s <= 100; ++s) {
    const int n = 2 + static_cast<int>(s % 11);
    const auto c = random_circuit(n, std::min<std::size_t>(available_subsets(n, 3), 40), 3, s, 2.0);
    const auto p = exact_distribution(c).probs;
    norm_err = std::max(norm_err, std::abs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0));
  }
  double grad_err = 0;
  for (int n : {2, 4, 7, 10}) {
    const auto gates = std::min<std::size_t>(available_subsets(n, 2), 30);
    const auto c = random_circuit(n, gates, 2, 40 + static_cast<std::uint64_t>(n), 0.8);
    const auto target = all_z_expectations(random_circuit(n, gates, 2, 90 + static_cast<std::uint64_t>(n), 0.8));
    const auto coeffs = pauli_coefficients(n, default_sigma(n));
    const auto g = mmd_gradient(c, target, coeffs);
    for (std::size_t i = 0; i < c.size(); ++i) {
      auto plus = c, minus = c;
      plus.generators[i].theta += 1e-5;
      minus.generators[i].theta -= 1e-5;
      const double fd = (mmd_loss(plus, target, coeffs) - mmd_loss(minus, target, coeffs)) / 2e-5;
      grad_err = std::max(grad_err, std::abs(g[i] - fd) / std::max(std::abs(fd), 1e-6));
    }
  }
  return {dense_err <= kDenseOracleTol && norm_err <= kNormTol && grad_err <= kGradRelTol,
          fmt("dense oracle %.2e, normalisation %.2e, gradient rel %.2e", dense_err, norm_err, grad_err)};
}

// ---------------------------------------------------------------- 8
Outcome temporal() {
  auto cfg = TemporalConfig::from_json(slurp(std::string(CCMAP_CONFIG_DIR) + "/temporal-desk.json"));
  if (cfg.anchor_times.size() != 11 || cfg.d_lat != 50 || cfg.n != 10 || cfg.seeds.size() != 10) {
    return {false, "temporal-desk preset does not match the protocol"};
  }
  const auto res = run_temporal_study(cfg);
  int wins = 0, rbm_wins = 0;
  for (const auto& r : res) {
    wins += r.iqp.interp_wins;
    if (r.rbm) rbm_wins += r.rbm->interp_wins;
  }
  return {wins >= kTemporalMinWins, fmt("interpolation beats nearest anchor in %d/10 seeds (rbm %d/10)", wins, rbm_wins)};
}

// ---------------------------------------------------------------- 9
Outcome coupling() {
  const auto cfg = CouplingConfig::from_json(slurp(std::string(CCMAP_CONFIG_DIR) + "/coupling-desk.json"));
  const auto r = run_coupling_study(cfg);
  if (r.spearman.size() != 1) return {false, "expected one system size"};
  const auto c = r.spearman[0].second;
  return {c.rho > 0 && c.p_value < kCouplingMaxP && r.rows.size() >= 2000,
          fmt("n=%d, %zu circuits, rho %.4f, p %.3e", r.spearman[0].first, r.rows.size(), c.rho, c.p_value)};
}

// ---------------------------------------------------------------- 10
Outcome sweep() {
  const auto cfg = SweepConfig::from_json(slurp(std::string(CCMAP_CONFIG_DIR) + "/sweep-desk.json"));
  if (cfg.point_count() < kSweepMinPoints) return {false, "preset has fewer than 40 points"};
  const auto rows = run_mismatch_sweep(cfg);
  for (const auto& r : rows)
    if (r.status != "ok") return {false, "sweep point failed: " + r.status};
  auto t = tercile_summary(rows);
  std::sort(t.begin(), t.end(), [](const auto& a, const auto& b) { return a.learner_gates < b.learner_gates; });
  bool ok = t.size() >= 2;
  std::string detail = fmt("%zu points;", cfg.point_count());
  for (std::size_t i = 0; i < t.size(); ++i) {
    ok = ok && t[i].top_mean <= t[i].bottom_mean;
    if (i > 0) ok = ok && t[i].top_mean <= t[i - 1].top_mean && t[i].bottom_mean <= t[i - 1].bottom_mean;
    detail += fmt(" L%zu bottom %.5f top %.5f;", t[i].learner_gates, t[i].bottom_mean, t[i].top_mean);
  }
  return {ok, detail};
}

// ---------------------------------------------------------------- 11
Outcome codec() {
  const QuantizerSpec spec{6, {{-2.0, 3.0}, {0.0, 1.0}, {10.0, 50.0}}};
  std::mt19937_64 rng(11);
  double worst = 0;
  for (int c = 0; c < 3; ++c) {
    const auto r = spec.ranges[static_cast<std::size_t>(c)];
    std::uniform_real_distribution<double> u(r.lo, r.hi);
    for (int i = 0; i < 100000; ++i) {
      const double v = u(rng);
      worst = std::max(worst, std::abs(decode_bits(encode_value(v, r, 6), r) - v) / (spec.bin_width(c) / 2));
    }
  }
  bool bijective = true;
  for (int c = 0; c < 3; ++c) {
    const auto r = spec.ranges[static_cast<std::size_t>(c)];
    std::vector<std::string> words;
    for (int k = 0; k < 64; ++k) {
      const double center = r.lo + (k + 0.5) * spec.bin_width(c);
      words.push_back(encode_value(center, r, 6));
      bijective = bijective && decode_bits(words.back(), r) == center;
    }
    std::sort(words.begin(), words.end());
    bijective = bijective && std::unique(words.begin(), words.end()) == words.end();
  }
  return {worst <= 1.0 + 1e-12 && bijective, fmt("max error / (bin/2) = %.6f, bijective on centers: %s", worst,
                                                 bijective ? "yes" : "no")};
}

// ---------------------------------------------------------------- 12
Outcome eval_metrics() {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<FieldSnapshot> a, b;
  for (int i = 0; i < 10; ++i) {
    FieldSnapshot fa{16, 16, std::vector<double>(256)}, fb{16, 16, std::vector<double>(256)};
    for (auto& v : fa.grid) v = g(rng);
    for (auto& v : fb.grid) v = 0.5 + 1.2 * g(rng);
    a.push_back(fa);
    b.push_back(fb);
  }
  // pdf oracle
  double lo = 1e300, hi = -1e300;
  for (const auto* s : {&a, &b})
    for (const auto& f : *s)
      for (double v : f.grid) lo = std::min(lo, v), hi = std::max(hi, v);
  auto hist = [&](const std::vector<FieldSnapshot>& s) {
    std::vector<double> h(kDefaultPdfBins, 0.0);
    double n = 0;
    for (const auto& f : s)
      for (double v : f.grid) {
        int k = 0;
        while (k + 1 < kDefaultPdfBins && v >= lo + (k + 1) * (hi - lo) / kDefaultPdfBins) ++k;
        h[static_cast<std::size_t>(k)] += 1;
        n += 1;
      }
    double z = 0;
    for (double& x : h) z += (x = x / n + kHistogramEps);
    for (double& x : h) x /= z;
    return h;
  };
  const auto p = hist(a), q = hist(b);
  double js = 0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double m = (p[k] + q[k]) / 2;
    js += 0.5 * p[k] * std::log2(p[k] / m) + 0.5 * q[k] * std::log2(q[k] / m);
  }
  // feature oracle
  const RandomConvEncoder enc(0);
  std::vector<std::vector<double>> fa, fb, all;
  for (const auto& f : a) fa.push_back(enc.encode(f));
  for (const auto& f : b) fb.push_back(enc.encode(f));
  all = fa;
  all.insert(all.end(), fb.begin(), fb.end());
  auto d2 = [](const std::vector<double>& x, const std::vector<double>& y) {
    double s = 0;
    for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
    return s;
  };
  std::vector<double> dist;
  for (std::size_t i = 0; i < all.size(); ++i)
    for (std::size_t j = i + 1; j < all.size(); ++j) dist.push_back(std::sqrt(d2(all[i], all[j])));
  std::sort(dist.begin(), dist.end());
  const double med = dist.size() % 2 ? dist[dist.size() / 2] : (dist[dist.size() / 2 - 1] + dist[dist.size() / 2]) / 2;
  auto block = [&](const auto& u, const auto& v) {
    double s = 0;
    for (const auto& x : u)
      for (const auto& y : v) s += std::exp(-d2(x, y) / (2 * med * med));
    return s / static_cast<double>(u.size() * v.size());
  };
  const double mmd = block(fa, fa) - 2 * block(fa, fb) + block(fb, fb);

  const double js_err = std::abs(pdf_js(a, b).value - js);
  const double mmd_err = std::abs(feature_mmd(a, b, enc).value - mmd);
  const double js_self = pdf_js(a, a).value;
  const double mmd_self = feature_mmd(a, a, enc).value;
  return {js_err <= kMetricOracleTol && mmd_err <= kMetricOracleTol && js_self == 0.0 && std::abs(mmd_self) <= 1e-15,
          fmt("pdf_js err %.2e, feature_mmd err %.2e, self %.1e / %.1e", js_err, mmd_err, js_self, mmd_self)};
}

struct Criterion {
  const char* name;
  double limit_seconds;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"pauli/raw MMD equivalence", 60, mmd_equivalence},
      {"Chow-Liu KL identity", 60, chow_liu_identity},
      {"CCI extremes", 60, cci_extremes},
      {"QCLI null behavior", 300, qcli_null},
      {"Monte-Carlo QCLI fidelity", 300, mc_fidelity},
      {"second-order JS and TV bound", 60, second_order},
      {"IQP simulator correctness", 300, iqp_simulator},
      {"temporal adaptation benefit", 1200, temporal},
      {"coupling-study sign", 1800, coupling},
      {"mismatch-sweep trend", 3600, sweep},
      {"codec roundtrip", 60, codec},
      {"evaluation metrics", 60, eval_metrics},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto& c = criteria[i];
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > c.limit_seconds) {
      o.pass = false;
      o.detail += fmt(" [runtime %.1fs over %.0fs]", secs, c.limit_seconds);
    }
    failures += !o.pass;
    std::printf("%s %2zu %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", i + 1, c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failures), criteria.size());
  return failures == 0 ? 0 : 1;
}
