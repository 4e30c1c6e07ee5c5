#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include "ccmap/error.hpp"
#include "ccmap/experiments.hpp"
#include "ccmap/svg.hpp"
#include "common.hpp"

namespace ccmap::cli {

namespace {

const char* const kPalette[] = {"#1f5fbf", "#e07b00", "#2a9d3a", "#b8323a", "#7b4fb0", "#6b6b6b"};

std::string load_preset(const std::string& path, const std::string& kind) {
  const std::string text = read_text(path);
  const std::string found = preset_kind(text);
  if (found != kind) throw ConfigError(path + " configures \"" + found + "\", not \"" + kind + "\"");
  return text;
}

struct StudyOpts {
  std::string config, out_dir;
  int threads = -1;
  long long point = -1;
};

void run_sweep(const StudyOpts& o) {
  SweepConfig cfg = SweepConfig::from_json(load_preset(o.config, "sweep"));
  if (o.threads >= 0) cfg.threads = o.threads;
  const fs::path dir = o.out_dir;

  if (o.point >= 0) {
    if (static_cast<std::size_t>(o.point) >= cfg.point_count()) throw ConfigError("--point is out of range");
    std::cout << sweep_csv_header();
    for (const auto& r : run_sweep_point(cfg, static_cast<std::size_t>(o.point))) std::cout << sweep_csv_line(r);
    return;
  }

  Manifest m("sweep");
  m.config() = J::parse(cfg.to_json());
  for (auto s : cfg.seeds) m.seed(s);
  m.input(o.config);
  for (const char* f : {"sweep.csv", "rows.jsonl", "terciles.json", "sweep.svg"}) m.output(dir / f);
  for (auto g : cfg.learner_gate_counts) m.output(dir / ("envelope_learner" + std::to_string(g) + ".csv"));
  const auto manifest = m.write(std::nullopt, dir);

  std::ofstream log(dir / "rows.jsonl", std::ios::trunc);
  if (!log) throw DataError("cannot write " + (dir / "rows.jsonl").string());
  const auto rows = run_mismatch_sweep(cfg, [&](const SweepRow& r) {
    J j{{"point", r.point},
        {"seed", r.seed},
        {"generator_gates", r.generator_gates},
        {"boost_steps", r.boost_steps},
        {"target_qcli", r.target_qcli},
        {"kept", r.kept},
        {"learner_gates", r.learner_gates},
        {"initial_mmd", r.initial_mmd},
        {"achieved_mmd", r.achieved_mmd},
        {"status", r.status},
        {"config_hash", r.config_hash}};
    log << j.dump() << '\n' << std::flush;
  });

  std::string csv = sweep_csv_header();
  for (const auto& r : rows) csv += sweep_csv_line(r);
  write_atomic(dir / "sweep.csv", csv);

  J summary;
  summary["rows"] = rows.size();
  summary["points"] = cfg.point_count();
  std::size_t kept = 0, failed = 0;
  for (const auto& r : rows) {
    kept += (r.kept && r.status == "ok") ? 1 : 0;
    failed += r.status == "ok" ? 0 : 1;
  }
  summary["kept_rows"] = kept;
  summary["failed_rows"] = failed;
  const auto terciles = tercile_summary(rows);
  summary["terciles"] = J::array();
  for (const auto& t : terciles) {
    summary["terciles"].push_back({{"learner_gates", t.learner_gates},
                                   {"bottom_mean", t.bottom_mean},
                                   {"top_mean", t.top_mean},
                                   {"bottom_count", t.bottom_count},
                                   {"top_count", t.top_count},
                                   {"top_not_above_bottom", t.top_mean <= t.bottom_mean}});
  }

  std::vector<SvgSeries> series;
  std::size_t color = 0;
  summary["envelopes"] = J::object();
  for (auto g : cfg.learner_gate_counts) {
    const std::size_t eff = effective_gate_count(cfg.n, g, cfg.learner_locality);
    std::vector<XY> pts;
    for (const auto& r : rows) {
      if (r.learner_gates_requested == g && r.kept && r.status == "ok") pts.push_back({r.target_qcli, r.achieved_mmd});
    }
    const std::string c = kPalette[color++ % 6];
    series.push_back({"learner " + std::to_string(eff), c, pts, false, false});
    const std::string name = "envelope_learner" + std::to_string(g) + ".csv";
    try {
      const auto env = scatter_envelopes(pts);
      write_atomic(dir / name, envelope_csv(env.upper) + envelope_csv(env.lower));
      series.push_back({"upper " + std::to_string(eff), c, env.upper.smoothed, true, false});
      summary["envelopes"][std::to_string(g)] = "ok";
    } catch (const DataError& e) {
      write_atomic(dir / name, "");
      summary["envelopes"][std::to_string(g)] = e.what();
    }
  }
  write_atomic(dir / "sweep.svg", render_svg("achieved MMD vs target QCLI", "target QCLI", "achieved MMD", series));
  summary["config_hash"] = m.config_hash();
  summary["manifest"] = manifest.string();
  write_atomic(dir / "terciles.json", summary.dump(2) + "\n");
  emit_json(summary, "");
}

void run_coupling(const StudyOpts& o) {
  CouplingConfig cfg = CouplingConfig::from_json(load_preset(o.config, "coupling"));
  if (o.threads >= 0) cfg.threads = o.threads;
  const fs::path dir = o.out_dir;

  Manifest m("coupling");
  m.config() = J::parse(cfg.to_json());
  m.seed(cfg.seed);
  m.input(o.config);
  for (const char* f : {"coupling.csv", "summary.json", "coupling.svg"}) m.output(dir / f);
  for (int n : cfg.sizes) m.output(dir / ("frontier_n" + std::to_string(n) + ".csv"));
  const auto manifest = m.write(std::nullopt, dir);

  const auto res = run_coupling_study(cfg);
  write_atomic(dir / "coupling.csv", coupling_csv(res));

  J summary;
  summary["rows"] = res.rows.size();
  summary["spearman"] = J::array();
  for (const auto& [n, c] : res.spearman) {
    summary["spearman"].push_back({{"n", n}, {"rho", c.rho}, {"p_value", c.p_value}, {"points", c.n}});
  }
  std::vector<SvgSeries> series;
  std::size_t color = 0;
  for (int n : cfg.sizes) {
    std::vector<XY> pts;
    for (const auto& r : res.rows) {
      if (r.n == n) pts.push_back({r.qcli, r.cci});
    }
    const std::string c = kPalette[color++ % 6];
    series.push_back({"n=" + std::to_string(n), c, pts, false, false});
    const auto env = frontier_envelope(pts);
    write_atomic(dir / ("frontier_n" + std::to_string(n) + ".csv"), envelope_csv(env));
    series.push_back({"frontier n=" + std::to_string(n), c, env.smoothed, true, true});
  }
  write_atomic(dir / "coupling.svg", render_svg("QCLI vs CCI along SPSA trajectories", "QCLI", "CCI", series));
  summary["config_hash"] = res.config_hash;
  summary["manifest"] = manifest.string();
  write_atomic(dir / "summary.json", summary.dump(2) + "\n");
  emit_json(summary, "");
}

void run_temporal(const StudyOpts& o) {
  TemporalConfig cfg = TemporalConfig::from_json(load_preset(o.config, "temporal"));
  if (o.threads >= 0) cfg.threads = o.threads;
  const fs::path dir = o.out_dir;

  Manifest m("temporal");
  m.config() = J::parse(cfg.to_json());
  for (auto s : cfg.seeds) m.seed(s);
  m.input(o.config);
  for (const char* f : {"report.json", "summary.json", "temporal.svg"}) m.output(dir / f);
  for (auto s : cfg.seeds) m.output(dir / ("trajectory_seed" + std::to_string(s) + ".json"));
  const auto manifest = m.write(std::nullopt, dir);

  const auto results = run_temporal_study(cfg);
  J report = J::array();
  std::size_t iqp_wins = 0, rbm_wins = 0, rbm_runs = 0;
  std::map<double, std::array<double, 4>> per_tau;  // iqp interp, iqp nearest, rbm interp, rbm nearest
  for (const auto& r : results) {
    J entry;
    entry["seed"] = r.iqp.seed;
    entry["iqp"] = J::parse(r.iqp.to_json());
    if (r.rbm) entry["rbm"] = J::parse(r.rbm->to_json());
    report.push_back(entry);
    write_atomic(dir / ("trajectory_seed" + std::to_string(r.iqp.seed) + ".json"), r.trajectory.to_json() + "\n");
    iqp_wins += r.iqp.interp_wins ? 1 : 0;
    for (const auto& e : r.iqp.evals) {
      per_tau[e.tau][0] += e.interp_mmd;
      per_tau[e.tau][1] += e.nearest_mmd;
    }
    if (r.rbm) {
      ++rbm_runs;
      rbm_wins += r.rbm->interp_wins ? 1 : 0;
      for (const auto& e : r.rbm->evals) {
        per_tau[e.tau][2] += e.interp_mmd;
        per_tau[e.tau][3] += e.nearest_mmd;
      }
    }
  }
  write_atomic(dir / "report.json", report.dump(2) + "\n");

  const double seeds = static_cast<double>(results.size());
  std::vector<SvgSeries> series{{"IQP interpolated", kPalette[0], {}, true, false},
                                {"IQP nearest anchor", kPalette[0], {}, true, true}};
  if (rbm_runs > 0) {
    series.push_back({"RBM interpolated", kPalette[1], {}, true, false});
    series.push_back({"RBM nearest anchor", kPalette[1], {}, true, true});
  }
  for (const auto& [tau, v] : per_tau) {
    series[0].points.push_back({tau, v[0] / seeds});
    series[1].points.push_back({tau, v[1] / seeds});
    if (rbm_runs > 0) {
      series[2].points.push_back({tau, v[2] / static_cast<double>(rbm_runs)});
      series[3].points.push_back({tau, v[3] / static_cast<double>(rbm_runs)});
    }
  }
  write_atomic(dir / "temporal.svg", render_svg("held-out exact MMD", "tau", "MMD", series));

  J summary;
  summary["seeds"] = results.size();
  summary["iqp_interp_wins"] = iqp_wins;
  if (rbm_runs > 0) summary["rbm_interp_wins"] = rbm_wins;
  summary["config_hash"] = m.config_hash();
  summary["manifest"] = manifest.string();
  write_atomic(dir / "summary.json", summary.dump(2) + "\n");
  emit_json(summary, "");
}

void add_study(CLI::App& app, Handlers& handlers, const char* name, const char* help, void (*fn)(const StudyOpts&),
               bool with_point) {
  auto o = std::make_shared<StudyOpts>();
  auto* sub = app.add_subcommand(name, help);
  sub->add_option("--config", o->config, "Preset JSON (see configs/)")->required();
  sub->add_option("--out-dir", o->out_dir, "Directory for tables, plots, logs and the manifest");
  sub->add_option("--threads", o->threads, "Worker threads; -1 keeps the config value, 0 uses all cores");
  if (with_point) sub->add_option("--point", o->point, "Re-run one sweep point and print its rows; -1 runs all");
  handlers[name] = [o, fn, with_point] {
    if (o->out_dir.empty() && !(with_point && o->point >= 0)) throw ConfigError("--out-dir is required");
    fn(*o);
  };
}

}  // namespace

void register_study_commands(CLI::App& app, Handlers& handlers) {
  add_study(app, handlers, "sweep", "QCLI vs MMD support-mismatch sweep", run_sweep, true);
  add_study(app, handlers, "coupling", "QCLI maximisation with logged CCI", run_coupling, false);
  add_study(app, handlers, "temporal", "Latent adaptation and interpolation on a drifting sequence", run_temporal,
            false);
}

}  // namespace ccmap::cli
