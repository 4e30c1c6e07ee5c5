#include "ccmap/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <json.hpp>

#include "ccmap/bits.hpp"
#include "ccmap/cci.hpp"
#include "ccmap/error.hpp"
#include "ccmap/mmd.hpp"
#include "ccmap/parallel.hpp"
#include "ccmap/spectrum.hpp"
#include "ccmap/train.hpp"

namespace ccmap {

namespace {

using json = nlohmann::ordered_json;

json parse_config(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid ") + what + " config: " + e.what());
  }
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const char* what) {
  if (!j.is_object()) throw ConfigError(std::string(what) + " config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "kind" || key == "description") continue;
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }) == allowed.end()) {
      throw ConfigError(std::string("unknown key \"") + key + "\" in " + what + " config");
    }
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for \"") + key + "\": " + e.what());
  }
}

// Fields present in the JSON override the current values.
void read_optimizer(const json& j, const char* key, OptimizerConfig& out) {
  if (!j.contains(key)) return;
  auto merged = json::parse(out.to_json());
  for (const auto& [k, v] : j.at(key).items()) {
    if (!merged.contains(k)) throw ConfigError(std::string("unknown optimizer key \"") + k + "\"");
    merged[k] = v;
  }
  out = OptimizerConfig::from_json(merged.dump());
}

int resolve_threads(int threads) { return threads > 0 ? threads : default_threads(); }

double resolve_sigma(double sigma, int n) { return sigma > 0.0 ? sigma : default_sigma(n); }

}  // namespace

// threads never changes results, so it stays out of the hash
std::string config_hash(const std::string& canonical_json) {
  auto j = nlohmann::json::parse(canonical_json, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return hex64(fnv1a64(canonical_json));
  j.erase("threads");
  return hex64(fnv1a64(j.dump()));
}

std::size_t effective_gate_count(int n, std::size_t requested, int locality) {
  return static_cast<std::size_t>(std::min<std::uint64_t>(requested, available_subsets(n, locality)));
}

// ---------------------------------------------------------------- mismatch sweep

void SweepConfig::validate() const {
  if (n < 2 || n > 16) throw ConfigError("sweep width must be in [2, 16]");
  if (learner_locality >= generator_locality) throw ConfigError("learner locality must be below generator locality");
  if (generator_gate_counts.empty() || learner_gate_counts.empty() || seeds.empty() || boost_steps.empty()) {
    throw ConfigError("sweep lists must be nonempty");
  }
  if (target_samples < 2 || boost_shots < 2) throw ConfigError("sample counts must be >= 2");
  if (qcli_min > qcli_max) throw ConfigError("qcli_min exceeds qcli_max");
  for (int b : boost_steps) {
    if (b < 0) throw ConfigError("boost steps must be >= 0");
  }
  if (sigma < 0.0) throw ConfigError("sigma must be >= 0 (0 selects the default)");
  boost.validate();
  learner.validate();
  if (learner.method != OptimMethod::adam && learner.method != OptimMethod::spsa) throw ConfigError("bad learner method");
}

std::string SweepConfig::to_json() const {
  json j;
  j["kind"] = "sweep";
  j["name"] = name;
  j["n"] = n;
  j["generator_gate_counts"] = generator_gate_counts;
  j["generator_locality"] = generator_locality;
  j["generator_angle_range"] = generator_angle_range;
  j["boost_steps"] = boost_steps;
  j["boost"] = json::parse(boost.to_json());
  j["boost_shots"] = boost_shots;
  j["qcli_min"] = qcli_min;
  j["qcli_max"] = qcli_max;
  j["target_samples"] = target_samples;
  j["learner_gate_counts"] = learner_gate_counts;
  j["learner_locality"] = learner_locality;
  j["learner"] = json::parse(learner.to_json());
  j["sigma"] = sigma;
  j["seeds"] = seeds;
  j["threads"] = threads;
  return j.dump();
}

SweepConfig SweepConfig::from_json(const std::string& text) {
  const json j = parse_config(text, "sweep");
  check_keys(j, {"name", "n", "generator_gate_counts", "generator_locality", "generator_angle_range", "boost_steps",
                 "boost", "boost_shots", "qcli_min", "qcli_max", "target_samples", "learner_gate_counts",
                 "learner_locality", "learner", "sigma", "seeds", "threads"},
             "sweep");
  SweepConfig c;
  read(j, "name", c.name);
  read(j, "n", c.n);
  read(j, "generator_gate_counts", c.generator_gate_counts);
  read(j, "generator_locality", c.generator_locality);
  read(j, "generator_angle_range", c.generator_angle_range);
  read(j, "boost_steps", c.boost_steps);
  read_optimizer(j, "boost", c.boost);
  read(j, "boost_shots", c.boost_shots);
  read(j, "qcli_min", c.qcli_min);
  read(j, "qcli_max", c.qcli_max);
  read(j, "target_samples", c.target_samples);
  read(j, "learner_gate_counts", c.learner_gate_counts);
  read(j, "learner_locality", c.learner_locality);
  read_optimizer(j, "learner", c.learner);
  read(j, "sigma", c.sigma);
  read(j, "seeds", c.seeds);
  read(j, "threads", c.threads);
  c.validate();
  return c;
}

std::size_t SweepConfig::point_count() const {
  return seeds.size() * generator_gate_counts.size() * boost_steps.size();
}

std::string sweep_csv_header() {
  return "point,seed,generator_gates,boost_steps,target_qcli,kept,learner_gates_requested,learner_gates,"
         "initial_mmd,achieved_mmd,status,config_hash\n";
}

std::string sweep_csv_line(const SweepRow& r) {
  std::ostringstream os;
  os.precision(17);
  std::string status = r.status;
  std::replace(status.begin(), status.end(), ',', ';');
  os << r.point << ',' << r.seed << ',' << r.generator_gates << ',' << r.boost_steps << ',' << r.target_qcli << ','
     << (r.kept ? 1 : 0) << ',' << r.learner_gates_requested << ',' << r.learner_gates << ',' << r.initial_mmd << ','
     << r.achieved_mmd << ',' << status << ',' << r.config_hash << '\n';
  return os.str();
}

std::vector<SweepRow> run_sweep_point(const SweepConfig& cfg, std::size_t point) {
  if (point >= cfg.point_count()) throw ConfigError("sweep point " + std::to_string(point) + " out of range");
  const std::size_t nb = cfg.boost_steps.size();
  const std::size_t ng = cfg.generator_gate_counts.size();
  const std::uint64_t seed = cfg.seeds[point / (ng * nb)];
  const std::size_t gates = cfg.generator_gate_counts[(point / nb) % ng];
  const int boost_steps = cfg.boost_steps[point % nb];
  const std::string hash = config_hash(cfg.to_json());
  const std::uint64_t stream = mix_seed(mix_seed(seed, gates), static_cast<std::uint64_t>(boost_steps));

  std::vector<SweepRow> rows;
  for (std::size_t L : cfg.learner_gate_counts) {
    SweepRow r;
    r.point = point;
    r.seed = seed;
    r.generator_gates = effective_gate_count(cfg.n, gates, cfg.generator_locality);
    r.boost_steps = boost_steps;
    r.learner_gates_requested = L;
    r.learner_gates = effective_gate_count(cfg.n, L, cfg.learner_locality);
    r.config_hash = hash;
    rows.push_back(r);
  }
  try {
    // The generator depends on (seed, gate count) only, so boosted and unboosted points share it.
    IqpCircuit gen = random_circuit(cfg.n, rows.front().generator_gates, cfg.generator_locality,
                                    mix_seed(seed, 0x6e0000 + gates), cfg.generator_angle_range);
    if (boost_steps > 0) {
      OptimizerConfig b = cfg.boost;
      b.steps = boost_steps;
      b.seed = mix_seed(stream, 0xb0);
      gen = maximize_qcli(gen, b, cfg.boost_shots).circuit;
    }
    const BitDataset target = sample(gen, cfg.target_samples, mix_seed(stream, 0x7a));
    const double tq = qcli_exact(target).qcli;
    const bool kept = tq >= cfg.qcli_min && tq <= cfg.qcli_max;
    const KernelSpec kernel{resolve_sigma(cfg.sigma, cfg.n)};
    const auto coeffs = pauli_coefficients(cfg.n, kernel.sigma);
    const auto data_exp = empirical_z_expectations(target);
    for (auto& r : rows) {
      r.target_qcli = tq;
      r.kept = kept;
      const IqpCircuit learner = random_circuit(cfg.n, r.learner_gates, cfg.learner_locality,
                                                mix_seed(seed, 0x1ea000 + r.learner_gates_requested));
      if (!kept) {
        r.initial_mmd = r.achieved_mmd = mmd_loss(learner, data_exp, coeffs);
        r.status = "filtered";
        continue;
      }
      OptimizerConfig opt = cfg.learner;
      opt.seed = mix_seed(stream, r.learner_gates_requested);
      const auto res = train_mmd(learner, target, kernel, opt, std::vector<bool>(learner.size(), false));
      r.initial_mmd = res.initial_loss();
      r.achieved_mmd = res.final_loss();
    }
  } catch (const std::exception& e) {
    for (auto& r : rows) r.status = std::string("error: ") + e.what();
  }
  return rows;
}

std::vector<SweepRow> run_mismatch_sweep(const SweepConfig& cfg, const RowSink& sink) {
  cfg.validate();
  const std::size_t count = cfg.point_count();
  std::vector<std::vector<SweepRow>> slots(count);
  std::mutex sink_mutex;
  parallel_for(count, resolve_threads(cfg.threads), [&](std::size_t p) {
    slots[p] = run_sweep_point(cfg, p);
    if (sink) {
      std::lock_guard<std::mutex> lock(sink_mutex);
      for (const auto& r : slots[p]) sink(r);
    }
  });
  std::vector<SweepRow> rows;
  for (auto& s : slots) rows.insert(rows.end(), s.begin(), s.end());
  return rows;
}

std::vector<TercileSummary> tercile_summary(const std::vector<SweepRow>& rows) {
  std::vector<std::size_t> sizes;
  for (const auto& r : rows) {
    if (std::find(sizes.begin(), sizes.end(), r.learner_gates_requested) == sizes.end()) {
      sizes.push_back(r.learner_gates_requested);
    }
  }
  std::vector<TercileSummary> out;
  for (std::size_t L : sizes) {
    std::vector<const SweepRow*> sel;
    for (const auto& r : rows) {
      if (r.learner_gates_requested == L && r.kept && r.status == "ok") sel.push_back(&r);
    }
    std::stable_sort(sel.begin(), sel.end(), [](const SweepRow* a, const SweepRow* b) { return a->target_qcli < b->target_qcli; });
    TercileSummary s;
    s.learner_gates = L;
    const std::size_t third = sel.size() / 3;
    for (std::size_t i = 0; i < third; ++i) {
      s.bottom_mean += sel[i]->achieved_mmd;
      s.top_mean += sel[sel.size() - 1 - i]->achieved_mmd;
    }
    s.bottom_count = s.top_count = third;
    if (third > 0) {
      s.bottom_mean /= static_cast<double>(third);
      s.top_mean /= static_cast<double>(third);
    }
    out.push_back(s);
  }
  return out;
}

// ---------------------------------------------------------------- coupling study

void CouplingConfig::validate() const {
  if (sizes.empty()) throw ConfigError("coupling study needs at least one system size");
  for (int n : sizes) {
    if (n < 2 || n > kIqpDenseLimit) throw ConfigError("coupling sizes must be in [2, 20]");
  }
  if (trajectories < 1) throw ConfigError("trajectories must be >= 1");
  if (shots < 2) throw ConfigError("shots must be >= 2");
  if (spsa.method != OptimMethod::spsa) throw ConfigError("the coupling study optimises with SPSA");
  spsa.validate();
}

std::string CouplingConfig::to_json() const {
  json j;
  j["kind"] = "coupling";
  j["name"] = name;
  j["sizes"] = sizes;
  j["gates"] = gates;
  j["locality"] = locality;
  j["angle_range"] = angle_range;
  j["trajectories"] = trajectories;
  j["spsa"] = json::parse(spsa.to_json());
  j["shots"] = shots;
  j["seed"] = seed;
  j["threads"] = threads;
  return j.dump();
}

CouplingConfig CouplingConfig::from_json(const std::string& text) {
  const json j = parse_config(text, "coupling");
  check_keys(j, {"name", "sizes", "gates", "locality", "angle_range", "trajectories", "spsa", "shots", "seed", "threads"},
             "coupling");
  CouplingConfig c;
  read(j, "name", c.name);
  read(j, "sizes", c.sizes);
  read(j, "gates", c.gates);
  read(j, "locality", c.locality);
  read(j, "angle_range", c.angle_range);
  read(j, "trajectories", c.trajectories);
  read_optimizer(j, "spsa", c.spsa);
  read(j, "shots", c.shots);
  read(j, "seed", c.seed);
  read(j, "threads", c.threads);
  c.validate();
  return c;
}

std::string coupling_csv(const CouplingResult& r) {
  std::ostringstream os;
  os.precision(17);
  os << "n,trajectory,step,seed,gates,qcli,cci,config_hash\n";
  for (const auto& row : r.rows) {
    os << row.n << ',' << row.trajectory << ',' << row.step << ',' << row.seed << ',' << row.gates << ',' << row.qcli
       << ',' << row.cci << ',' << r.config_hash << '\n';
  }
  return os.str();
}

CouplingResult run_coupling_study(const CouplingConfig& cfg) {
  cfg.validate();
  const std::size_t jobs = cfg.sizes.size() * cfg.trajectories;
  std::vector<std::vector<CouplingRow>> slots(jobs);
  parallel_for(jobs, resolve_threads(cfg.threads), [&](std::size_t job) {
    const int n = cfg.sizes[job / cfg.trajectories];
    const std::size_t traj = job % cfg.trajectories;
    const std::uint64_t seed = mix_seed(mix_seed(cfg.seed, static_cast<std::uint64_t>(n)), traj);
    const std::size_t gates = effective_gate_count(n, cfg.gates, cfg.locality);
    const IqpCircuit c = random_circuit(n, gates, cfg.locality, seed, cfg.angle_range);
    OptimizerConfig opt = cfg.spsa;
    opt.seed = seed;
    const auto res = maximize_qcli(c, opt, cfg.shots);
    for (const auto& p : res.trajectory) slots[job].push_back({n, traj, p.step, seed, gates, p.qcli, p.cci});
  });
  CouplingResult out;
  out.config_hash = config_hash(cfg.to_json());
  for (auto& s : slots) out.rows.insert(out.rows.end(), s.begin(), s.end());
  for (int n : cfg.sizes) {
    std::vector<double> q, c;
    for (const auto& r : out.rows) {
      if (r.n != n) continue;
      q.push_back(r.qcli);
      c.push_back(r.cci);
    }
    out.spearman.emplace_back(n, spearman(q, c));
  }
  return out;
}

// ---------------------------------------------------------------- temporal study

DriftingMixture DriftingMixture::from_seed(int n, std::uint64_t seed, double t_first, double t_last) {
  DriftingMixture m;
  m.t_first = t_first;
  m.t_last = t_last;
  std::mt19937_64 rng(mix_seed(seed, 0xd21f));
  std::bernoulli_distribution coin(0.5);
  for (int i = 0; i < n; ++i) {
    const double a = coin(rng) ? 0.2 : 0.8;
    m.a.push_back(a);
    m.b.push_back(1.0 - a);
  }
  return m;
}

double DriftingMixture::weight(double t) const {
  if (!(t_last > t_first)) throw ConfigError("drift needs t_last > t_first");
  return (t - t_first) / (t_last - t_first);
}

OutputDistribution DriftingMixture::distribution(double t) const {
  const int n = static_cast<int>(a.size());
  if (n > kIqpDenseLimit) throw CapacityError("dense mixture needs n <= 20");
  const double w = std::clamp(weight(t), 0.0, 1.0);
  OutputDistribution out{n, std::vector<double>(std::size_t{1} << n)};
  for (std::uint64_t x = 0; x < out.probs.size(); ++x) {
    double pa = 1.0, pb = 1.0;
    for (int i = 0; i < n; ++i) {
      const bool bit = (x >> i) & 1U;
      pa *= bit ? a[static_cast<std::size_t>(i)] : 1.0 - a[static_cast<std::size_t>(i)];
      pb *= bit ? b[static_cast<std::size_t>(i)] : 1.0 - b[static_cast<std::size_t>(i)];
    }
    out.probs[x] = (1.0 - w) * pa + w * pb;
  }
  return out;
}

BitDataset DriftingMixture::sample(double t, std::size_t count, std::uint64_t seed) const {
  const double w = std::clamp(weight(t), 0.0, 1.0);
  const int n = static_cast<int>(a.size());
  std::mt19937_64 rng(mix_seed(seed, 0x5a71));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t stride = words_for_bits(n);
  std::vector<std::uint64_t> words(count * stride, 0);
  for (std::size_t s = 0; s < count; ++s) {
    const auto& p = u(rng) < w ? b : a;
    for (int i = 0; i < n; ++i) {
      if (u(rng) < p[static_cast<std::size_t>(i)]) words[s * stride + static_cast<std::size_t>(i / 64)] |= std::uint64_t{1} << (i % 64);
    }
  }
  return BitDataset(n, std::move(words));
}

void TemporalConfig::validate() const {
  if (n < 2 || n > 20) throw ConfigError("temporal width must be in [2, 20]");
  if (anchor_times.size() < 2) throw ConfigError("the temporal study needs at least 2 anchors");
  for (std::size_t k = 1; k < anchor_times.size(); ++k) {
    if (!(anchor_times[k] > anchor_times[k - 1])) throw ConfigError("anchor times must be strictly increasing");
  }
  if (available_subsets(n, template_locality) < d_lat) throw ConfigError("latent dimension exceeds the template size");
  if (train_samples < 2 || heldout_samples < 2) throw ConfigError("sample counts must be >= 2");
  if (!mixture_a.empty() || !mixture_b.empty()) {
    if (mixture_a.size() != static_cast<std::size_t>(n) || mixture_b.size() != static_cast<std::size_t>(n)) {
      throw ConfigError("mixture component vectors must have n entries");
    }
    for (const auto* v : {&mixture_a, &mixture_b}) {
      for (double p : *v) {
        if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("mixture probabilities must lie in [0, 1]");
      }
    }
  }
  if (seeds.empty()) throw ConfigError("seeds must be nonempty");
  if (sigma < 0.0) throw ConfigError("sigma must be >= 0 (0 selects the default)");
  core_opt.validate();
  latent_opt.validate();
  rbm.validate();
  if (rbm_latent_epochs < 0) throw ConfigError("rbm_latent_epochs must be >= 0");
}

std::string TemporalConfig::to_json() const {
  json j;
  j["kind"] = "temporal";
  j["name"] = name;
  j["n"] = n;
  j["template_locality"] = template_locality;
  j["d_lat"] = d_lat;
  j["anchor_times"] = anchor_times;
  j["eval_times"] = eval_times;
  j["train_samples"] = train_samples;
  j["heldout_samples"] = heldout_samples;
  j["core_opt"] = json::parse(core_opt.to_json());
  j["latent_opt"] = json::parse(latent_opt.to_json());
  j["sigma"] = sigma;
  j["angle_range"] = angle_range;
  j["mixture_a"] = mixture_a;
  j["mixture_b"] = mixture_b;
  j["seeds"] = seeds;
  j["rbm_baseline"] = rbm_baseline;
  j["rbm"] = json::parse(rbm.to_json());
  j["rbm_latent_epochs"] = rbm_latent_epochs;
  j["threads"] = threads;
  return j.dump();
}

TemporalConfig TemporalConfig::from_json(const std::string& text) {
  const json j = parse_config(text, "temporal");
  check_keys(j, {"name", "n", "template_locality", "d_lat", "anchor_times", "eval_times", "train_samples",
                 "heldout_samples", "core_opt", "latent_opt", "sigma", "angle_range", "mixture_a", "mixture_b", "seeds",
                 "rbm_baseline", "rbm", "rbm_latent_epochs", "threads"},
             "temporal");
  TemporalConfig c;
  read(j, "name", c.name);
  read(j, "n", c.n);
  read(j, "template_locality", c.template_locality);
  read(j, "d_lat", c.d_lat);
  read(j, "anchor_times", c.anchor_times);
  read(j, "eval_times", c.eval_times);
  read(j, "train_samples", c.train_samples);
  read(j, "heldout_samples", c.heldout_samples);
  read_optimizer(j, "core_opt", c.core_opt);
  read_optimizer(j, "latent_opt", c.latent_opt);
  read(j, "sigma", c.sigma);
  read(j, "angle_range", c.angle_range);
  read(j, "mixture_a", c.mixture_a);
  read(j, "mixture_b", c.mixture_b);
  read(j, "seeds", c.seeds);
  read(j, "rbm_baseline", c.rbm_baseline);
  if (j.contains("rbm")) {
    const auto& r = j.at("rbm");
    check_keys(r, {"n_hidden", "epochs", "learning_rate", "cd_steps", "batch_size", "init_scale", "seed"}, "rbm");
    read(r, "n_hidden", c.rbm.n_hidden);
    read(r, "epochs", c.rbm.epochs);
    read(r, "learning_rate", c.rbm.learning_rate);
    read(r, "cd_steps", c.rbm.cd_steps);
    read(r, "batch_size", c.rbm.batch_size);
    read(r, "init_scale", c.rbm.init_scale);
    read(r, "seed", c.rbm.seed);
  }
  read(j, "rbm_latent_epochs", c.rbm_latent_epochs);
  read(j, "threads", c.threads);
  c.validate();
  return c;
}

std::vector<double> TemporalConfig::effective_eval_times() const {
  if (!eval_times.empty()) return eval_times;
  std::vector<double> mids;
  for (std::size_t k = 1; k < anchor_times.size(); ++k) mids.push_back(0.5 * (anchor_times[k - 1] + anchor_times[k]));
  return mids;
}

std::string TemporalReport::to_json() const {
  json j;
  j["model"] = model;
  j["seed"] = seed;
  j["sigma"] = sigma;
  j["params"] = params;
  auto& a = j["anchors"] = json::array();
  for (const auto& x : anchors) a.push_back({{"t", x.t}, {"fit_loss", x.fit_loss}, {"anchor_mmd", x.anchor_mmd}});
  auto& e = j["evals"] = json::array();
  for (const auto& x : evals) {
    e.push_back({{"tau", x.tau},
                 {"interp_mmd", x.interp_mmd},
                 {"nearest_mmd", x.nearest_mmd},
                 {"nearest_t", x.nearest_t},
                 {"extrapolated", x.extrapolated}});
  }
  j["mean_interp_mmd"] = mean_interp_mmd;
  j["mean_nearest_mmd"] = mean_nearest_mmd;
  j["interp_wins"] = interp_wins;
  return j.dump(2);
}

namespace {

std::size_t nearest_anchor(const std::vector<LatentAnchor>& anchors, double tau) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < anchors.size(); ++k) {
    if (std::abs(anchors[k].t - tau) < std::abs(anchors[best].t - tau)) best = k;
  }
  return best;
}

void finish_report(TemporalReport& r) {
  double si = 0.0, sn = 0.0;
  for (const auto& e : r.evals) {
    si += e.interp_mmd;
    sn += e.nearest_mmd;
  }
  r.mean_interp_mmd = si / static_cast<double>(r.evals.size());
  r.mean_nearest_mmd = sn / static_cast<double>(r.evals.size());
  r.interp_wins = r.mean_interp_mmd < r.mean_nearest_mmd;
}

TemporalReport rbm_baseline(const TemporalConfig& cfg, std::uint64_t seed, const std::vector<BitDataset>& train,
                            const std::vector<std::vector<double>>& heldout_exp, const PauliCoefficients& coeffs) {
  TemporalReport rep;
  rep.model = "rbm";
  rep.seed = seed;
  RbmConfig rc = cfg.rbm;
  rc.seed = mix_seed(seed, 0x2b3);
  RbmConfig init_cfg = rc;
  init_cfg.epochs = 0;
  const RbmModel init = rbm_train(train.front(), init_cfg).model;
  rep.params = init.param_count();
  if (cfg.d_lat > init.param_count()) throw ConfigError("latent dimension exceeds the RBM parameter count");
  std::vector<std::size_t> lat, core;
  for (std::size_t i = 0; i < init.param_count(); ++i) (i < cfg.d_lat ? lat : core).push_back(i);
  const auto latent_frozen = frozen_mask(init.param_count(), lat);
  const auto core_frozen = frozen_mask(init.param_count(), core);

  const auto exact_mmd = [&](const RbmModel& m, std::span<const double> target) {
    return mmd_pauli(z_expectations(rbm_distribution(m)), target, coeffs);
  };
  const auto latent_of = [&](const RbmModel& m) {
    const auto p = m.flat();
    return std::vector<double>(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(cfg.d_lat));
  };

  RbmModel core_model = rbm_train_from(init, train.front(), rc, latent_frozen).model;
  std::vector<LatentAnchor> anchors{{cfg.anchor_times.front(), latent_of(core_model)}};
  {
    const double m0 = exact_mmd(core_model, empirical_z_expectations(train.front()));
    rep.anchors.push_back({cfg.anchor_times.front(), m0, m0});
  }
  RbmConfig adapt_cfg = rc;
  adapt_cfg.epochs = cfg.rbm_latent_epochs;
  RbmModel current = core_model;
  for (std::size_t k = 1; k < cfg.anchor_times.size(); ++k) {
    adapt_cfg.seed = mix_seed(rc.seed, k);
    current = rbm_train_from(current, train[k], adapt_cfg, core_frozen).model;
    anchors.push_back({cfg.anchor_times[k], latent_of(current)});
    const double mk = exact_mmd(current, empirical_z_expectations(train[k]));
    rep.anchors.push_back({cfg.anchor_times[k], mk, mk});
  }
  const auto taus = cfg.effective_eval_times();
  for (std::size_t e = 0; e < taus.size(); ++e) {
    TemporalEvalReport ev;
    ev.tau = taus[e];
    ev.extrapolated = interpolate_latent(anchors, taus[e]).extrapolated;
    ev.interp_mmd = exact_mmd(rbm_latent_interpolate(anchors, core_model, taus[e]), heldout_exp[e]);
    const std::size_t k = nearest_anchor(anchors, taus[e]);
    ev.nearest_t = anchors[k].t;
    ev.nearest_mmd = exact_mmd(rbm_latent_interpolate(anchors, core_model, anchors[k].t), heldout_exp[e]);
    rep.evals.push_back(ev);
  }
  finish_report(rep);
  return rep;
}

}  // namespace

TemporalSeedResult run_temporal_seed(const TemporalConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const double t_first = cfg.anchor_times.front();
  const double t_last = cfg.anchor_times.back();
  DriftingMixture mix;
  if (cfg.mixture_a.empty()) {
    mix = DriftingMixture::from_seed(cfg.n, seed, t_first, t_last);
  } else {
    mix = DriftingMixture{cfg.mixture_a, cfg.mixture_b, t_first, t_last};
  }
  const KernelSpec kernel{resolve_sigma(cfg.sigma, cfg.n)};
  const auto coeffs = pauli_coefficients(cfg.n, kernel.sigma);

  std::vector<BitDataset> train;
  for (std::size_t k = 0; k < cfg.anchor_times.size(); ++k) {
    train.push_back(mix.sample(cfg.anchor_times[k], cfg.train_samples, mix_seed(seed, 0xa000 + k)));
  }
  const auto taus = cfg.effective_eval_times();
  std::vector<std::vector<double>> heldout_exp;
  for (std::size_t e = 0; e < taus.size(); ++e) {
    heldout_exp.push_back(empirical_z_expectations(mix.sample(taus[e], cfg.heldout_samples, mix_seed(seed, 0xb000 + e))));
  }

  IqpCircuit tmpl = full_template(cfg.n, cfg.template_locality);
  {
    std::mt19937_64 rng(mix_seed(seed, 0x7e));
    std::uniform_real_distribution<double> angle(-cfg.angle_range, cfg.angle_range);
    for (auto& g : tmpl.generators) g.theta = angle(rng);
  }
  const auto partition = ParamPartition::leading(tmpl.size(), cfg.d_lat);

  TemporalSeedResult out;
  TemporalReport& rep = out.iqp;
  rep.model = "iqp";
  rep.seed = seed;
  rep.sigma = kernel.sigma;
  rep.params = tmpl.size();

  OptimizerConfig core_opt = cfg.core_opt;
  core_opt.seed = mix_seed(seed, 0xc0);
  const auto fit = fit_core(tmpl, train.front(), t_first, partition, kernel, core_opt);
  LatentTrajectory traj = fit.trajectory;
  rep.anchors.push_back({t_first, fit.training.final_loss(),
                         mmd_loss(traj.assemble(traj.anchors.back().theta_lat), empirical_z_expectations(train.front()), coeffs)});
  for (std::size_t k = 1; k < cfg.anchor_times.size(); ++k) {
    OptimizerConfig lat_opt = cfg.latent_opt;
    lat_opt.seed = mix_seed(seed, 0xd0 + k);
    const auto ad = adapt_latent(traj, train[k], cfg.anchor_times[k], kernel, lat_opt);
    traj = ad.trajectory;
    rep.anchors.push_back({cfg.anchor_times[k], ad.training.final_loss(),
                           mmd_loss(traj.assemble(traj.anchors.back().theta_lat), empirical_z_expectations(train[k]), coeffs)});
  }
  for (std::size_t e = 0; e < taus.size(); ++e) {
    TemporalEvalReport ev;
    ev.tau = taus[e];
    const auto interp = interpolate_latent(traj, taus[e]);
    ev.extrapolated = interp.extrapolated;
    ev.interp_mmd = mmd_loss(traj.assemble(interp.theta_lat), heldout_exp[e], coeffs);
    const std::size_t k = nearest_anchor(traj.anchors, taus[e]);
    ev.nearest_t = traj.anchors[k].t;
    ev.nearest_mmd = mmd_loss(traj.assemble(traj.anchors[k].theta_lat), heldout_exp[e], coeffs);
    rep.evals.push_back(ev);
  }
  finish_report(rep);
  out.trajectory = std::move(traj);
  if (cfg.rbm_baseline) {
    out.rbm = rbm_baseline(cfg, seed, train, heldout_exp, coeffs);
    out.rbm->sigma = kernel.sigma;
  }
  return out;
}

std::vector<TemporalSeedResult> run_temporal_study(const TemporalConfig& cfg) {
  cfg.validate();
  std::vector<TemporalSeedResult> out(cfg.seeds.size());
  parallel_for(cfg.seeds.size(), resolve_threads(cfg.threads),
               [&](std::size_t i) { out[i] = run_temporal_seed(cfg, cfg.seeds[i]); });
  return out;
}

std::string preset_kind(const std::string& text) {
  const json j = parse_config(text, "preset");
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
    throw ConfigError("preset must carry a string \"kind\" field");
  }
  return j.at("kind").get<std::string>();
}

}  // namespace ccmap
