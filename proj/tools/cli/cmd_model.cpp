#include <fstream>
#include <memory>
#include <random>

#include "ccmap/bits.hpp"
#include "ccmap/error.hpp"
#include "ccmap/eval.hpp"
#include "ccmap/iqp.hpp"
#include "ccmap/mmd.hpp"
#include "ccmap/optim.hpp"
#include "ccmap/train.hpp"
#include "common.hpp"

namespace ccmap::cli {

namespace {

struct OptFlags {
  std::string method = "adam";
  int steps = OptimizerConfig{}.steps;
  double lr = OptimizerConfig{}.learning_rate;
  double spsa_a = OptimizerConfig{}.spsa_a;
  double spsa_c = OptimizerConfig{}.spsa_c;
  double spsa_A = OptimizerConfig{}.spsa_A;
  std::size_t batch = 0;
  double sigma = 0.0;
  std::string estimator = "biased";

  OptimizerConfig config(std::uint64_t seed) const {
    OptimizerConfig c;
    c.method = parse_optim_method(method);
    c.steps = steps;
    c.learning_rate = lr;
    c.spsa_a = spsa_a;
    c.spsa_c = spsa_c;
    c.spsa_A = spsa_A;
    c.batch_samples = batch;
    c.seed = seed;
    c.validate();
    return c;
  }

  KernelSpec kernel(int n) const {
    KernelSpec k;
    k.sigma = sigma > 0.0 ? sigma : default_sigma(n);
    if (estimator == "biased") {
      k.estimator = MmdEstimator::biased;
    } else if (estimator == "unbiased") {
      k.estimator = MmdEstimator::unbiased;
    } else {
      throw ConfigError("--estimator must be biased or unbiased");
    }
    k.validate();
    return k;
  }
};

void add_opt_flags(CLI::App* sub, OptFlags& f) {
  sub->add_option("--method", f.method, "Optimizer: adam or spsa");
  sub->add_option("--steps", f.steps, "Optimizer iterations");
  sub->add_option("--lr", f.lr, "Adam learning rate");
  sub->add_option("--spsa-a", f.spsa_a, "SPSA gain a in a/(k+1+A)^0.602");
  sub->add_option("--spsa-c", f.spsa_c, "SPSA perturbation c in c/(k+1)^0.101");
  sub->add_option("--spsa-A", f.spsa_A, "SPSA stability constant A");
  sub->add_option("--batch", f.batch, "Samples per loss estimate; 0 uses the exact loss");
  sub->add_option("--sigma", f.sigma, "Kernel bandwidth; 0 selects sqrt(n/4)");
  sub->add_option("--estimator", f.estimator, "MMD estimator for sampled losses: biased or unbiased");
}

J opt_json(const OptimizerConfig& c, const KernelSpec& k) {
  J j = J::parse(c.to_json());
  j["sigma"] = k.sigma;
  j["estimator"] = k.estimator == MmdEstimator::biased ? "biased" : "unbiased";
  return j;
}

class JsonLinesLog {
 public:
  explicit JsonLinesLog(const std::string& path) {
    if (!path.empty()) {
      out_.open(path, std::ios::trunc);
      if (!out_) throw DataError("cannot write " + path);
    }
  }
  void operator()(const StepRecord& r) {
    if (out_.is_open()) out_ << r.to_json_line() << '\n';
  }
  StepObserver observer() {
    if (!out_.is_open()) return {};
    return [this](const StepRecord& r) { (*this)(r); };
  }

 private:
  std::ofstream out_;
};

struct TrainOpts {
  std::string input, format = "auto", circuit, out, log;
  std::size_t gates = 60;
  int locality = 2;
  double angle_range = kDefaultAngleRange;
  std::uint64_t seed = 0;
  std::vector<std::size_t> freeze;
  OptFlags opt;
};

void run_train(const TrainOpts& o) {
  const BitDataset data = load_bits(o.input, o.format);
  IqpCircuit init = o.circuit.empty()
                        ? random_circuit(data.width(), o.gates, o.locality, mix_seed(o.seed, 0x1c), o.angle_range)
                        : IqpCircuit::from_json(read_text(o.circuit));
  if (init.n != data.width()) throw DataError("circuit width does not match the dataset width");
  const auto opt = o.opt.config(o.seed);
  const auto kernel = o.opt.kernel(data.width());
  const auto frozen = frozen_mask(init.size(), o.freeze);

  Manifest m("train");
  m.config() = {{"optimizer", opt_json(opt, kernel)},
                {"init", o.circuit.empty() ? J{{"gates", o.gates}, {"locality", o.locality}, {"angle_range", o.angle_range}}
                                           : J("file")},
                {"frozen", o.freeze}};
  m.seed(o.seed);
  m.input(o.input);
  if (!o.circuit.empty()) m.input(o.circuit);
  m.output(o.out);
  if (!o.log.empty()) m.output(o.log);
  const auto manifest = m.write(fs::path(o.out));

  JsonLinesLog log(o.log);
  const auto res = train_mmd(init, data, kernel, opt, frozen, log.observer());
  write_atomic(o.out, res.circuit.to_json() + "\n");
  emit_json(J{{"initial_loss", res.initial_loss()},
              {"final_loss", res.final_loss()},
              {"steps", opt.steps},
              {"sigma", kernel.sigma},
              {"generators", res.circuit.size()},
              {"param_checksum", param_checksum(res.circuit.params())},
              {"manifest", manifest.string()}},
            "");
}

struct AdaptOpts {
  std::string input, format = "auto", trajectory, template_circuit, out, log;
  double time = 1.0;
  int locality = 3;
  std::size_t latent_dim = 50;
  double angle_range = kDefaultAngleRange;
  std::uint64_t seed = 0;
  OptFlags opt;
};

void run_adapt(const AdaptOpts& o) {
  const BitDataset data = load_bits(o.input, o.format);
  const auto opt = o.opt.config(o.seed);
  const auto kernel = o.opt.kernel(data.width());
  const bool fresh = o.trajectory.empty();

  Manifest m("adapt");
  m.config() = {{"optimizer", opt_json(opt, kernel)}, {"time", o.time}, {"mode", fresh ? "fit_core" : "adapt_latent"}};
  if (fresh) {
    m.config()["template"] = o.template_circuit.empty()
                                 ? J{{"locality", o.locality}, {"angle_range", o.angle_range}}
                                 : J("file");
    m.config()["latent_dim"] = o.latent_dim;
  }
  m.seed(o.seed);
  m.input(o.input);
  if (!o.trajectory.empty()) m.input(o.trajectory);
  if (!o.template_circuit.empty()) m.input(o.template_circuit);
  m.output(o.out);
  if (!o.log.empty()) m.output(o.log);
  const auto manifest = m.write(fs::path(o.out));

  JsonLinesLog log(o.log);
  LatentTrajectory traj;
  TrainResult training;
  if (fresh) {
    IqpCircuit tmpl;
    if (o.template_circuit.empty()) {
      tmpl = full_template(data.width(), o.locality);
      std::mt19937_64 rng(mix_seed(o.seed, 0x7e));
      std::uniform_real_distribution<double> angle(-o.angle_range, o.angle_range);
      for (auto& g : tmpl.generators) g.theta = angle(rng);
    } else {
      tmpl = IqpCircuit::from_json(read_text(o.template_circuit));
      canonicalize(tmpl);
    }
    if (tmpl.n != data.width()) throw DataError("template width does not match the dataset width");
    const auto partition = ParamPartition::leading(tmpl.size(), o.latent_dim);
    auto fit = fit_core(tmpl, data, o.time, partition, kernel, opt, log.observer());
    traj = std::move(fit.trajectory);
    training = std::move(fit.training);
  } else {
    const auto prev = LatentTrajectory::from_json(read_text(o.trajectory));
    if (prev.circuit_template.n != data.width()) throw DataError("trajectory width does not match the dataset width");
    auto ad = adapt_latent(prev, data, o.time, kernel, opt, log.observer());
    traj = std::move(ad.trajectory);
    training = std::move(ad.training);
  }
  write_atomic(o.out, traj.to_json() + "\n");
  emit_json(J{{"mode", fresh ? "fit_core" : "adapt_latent"},
              {"time", o.time},
              {"anchors", traj.anchors.size()},
              {"latent_dim", traj.partition.latent.size()},
              {"initial_loss", training.initial_loss()},
              {"final_loss", training.final_loss()},
              {"sigma", kernel.sigma},
              {"manifest", manifest.string()}},
            "");
}

struct GenerateOpts {
  std::string trajectory, circuit, out, format = "auto";
  double time = 0.0;
  bool time_set = false;
  std::size_t shots = 100000;
  std::uint64_t seed = 0;
};

void run_generate(const GenerateOpts& o) {
  if (o.trajectory.empty() == o.circuit.empty()) throw ConfigError("give exactly one of --trajectory or --circuit");
  if (!o.trajectory.empty() && !o.time_set) throw ConfigError("--time is required with --trajectory");
  if (o.shots == 0) throw ConfigError("--shots must be >= 1");

  Manifest m("generate");
  m.config() = {{"shots", o.shots}};
  if (!o.trajectory.empty()) m.config()["time"] = o.time;
  m.seed(o.seed);
  m.input(o.trajectory.empty() ? o.circuit : o.trajectory);
  m.output(o.out);
  const auto manifest = m.write(fs::path(o.out));

  J r;
  BitDataset out = [&] {
    if (!o.circuit.empty()) return sample(IqpCircuit::from_json(read_text(o.circuit)), o.shots, o.seed);
    const auto traj = LatentTrajectory::from_json(read_text(o.trajectory));
    const auto interp = interpolate_latent(traj, o.time);
    r["time"] = o.time;
    r["extrapolated"] = interp.extrapolated;
    return sample(traj.assemble(interp.theta_lat), o.shots, o.seed);
  }();
  save_bit_dataset(out, o.out, resolve_format(o.format, o.out));
  r["n"] = out.width();
  r["shots"] = out.size();
  r["checksum"] = dataset_checksum(out);
  r["manifest"] = manifest.string();
  emit_json(r, "");
}

struct EvalOpts {
  std::string real, gen, out;
  int bins = kDefaultPdfBins;
  std::uint64_t encoder_seed = 0;
  std::size_t eval_size = kFeatureEvalSize;
  std::uint64_t subsample_seed = 0;
};

void run_eval(const EvalOpts& o) {
  const RandomConvEncoder enc(o.encoder_seed);
  Manifest m("eval");
  m.config() = {{"bins", o.bins},
                {"histogram_eps", kHistogramEps},
                {"eval_size", o.eval_size},
                {"encoder", J::parse(enc.config_json())}};
  m.seed(o.encoder_seed);
  m.seed(o.subsample_seed);
  m.input(o.real);
  m.input(o.gen);
  if (!o.out.empty()) m.output(o.out);
  const auto manifest = m.write(o.out.empty() ? std::nullopt : std::optional<fs::path>(o.out));

  const auto real = load_field_dir(o.real);
  const auto gen = load_field_dir(o.gen);
  const auto js = pdf_js(real, gen, o.bins);
  const auto mmd = feature_mmd(real, gen, enc, o.eval_size, o.subsample_seed);
  emit_json(J{{"pdf_js", js.value},
              {"pdf_js_degenerate", js.degenerate},
              {"feature_mmd", mmd.value},
              {"feature_mmd_degenerate", mmd.degenerate},
              {"real_snapshots", real.size()},
              {"gen_snapshots", gen.size()},
              {"config", m.config()},
              {"manifest", manifest.string()}},
            o.out);
}

}  // namespace

void register_model_commands(CLI::App& app, Handlers& handlers) {
  {
    auto o = std::make_shared<TrainOpts>();
    auto* sub = app.add_subcommand("train", "Fit an IQP circuit to a bit dataset by MMD");
    sub->add_option("--input", o->input, "Bit dataset")->required();
    sub->add_option("--format", o->format, "Input format: text, packed, csv or auto");
    sub->add_option("--circuit", o->circuit, "Initial circuit JSON (default: random circuit)");
    sub->add_option("--gates", o->gates, "Random-circuit gate count");
    sub->add_option("--locality", o->locality, "Random-circuit maximum gate locality");
    sub->add_option("--angle-range", o->angle_range, "Initial angles uniform on [-r, r]");
    sub->add_option("--seed", o->seed, "Seed for initialization and the optimizer");
    sub->add_option("--freeze", o->freeze, "Generator indices kept fixed");
    sub->add_option("--out", o->out, "Trained circuit JSON")->required();
    sub->add_option("--log", o->log, "JSON-lines step log");
    add_opt_flags(sub, o->opt);
    handlers["train"] = [o] { run_train(*o); };
  }
  {
    auto o = std::make_shared<AdaptOpts>();
    auto* sub = app.add_subcommand("adapt",
                                   "Fit the core at the first snapshot (no --trajectory) or adapt the latent block");
    sub->add_option("--input", o->input, "Bit dataset of this snapshot")->required();
    sub->add_option("--format", o->format, "Input format: text, packed, csv or auto");
    sub->add_option("--time", o->time, "Time index of the snapshot");
    sub->add_option("--trajectory", o->trajectory, "Existing trajectory JSON to extend");
    sub->add_option("--template", o->template_circuit, "Template circuit JSON for the core fit");
    sub->add_option("--locality", o->locality, "Template locality when no --template is given");
    sub->add_option("--latent-dim", o->latent_dim, "Latent block size (leading canonical generators)");
    sub->add_option("--angle-range", o->angle_range, "Template angles uniform on [-r, r]");
    sub->add_option("--seed", o->seed, "Seed for template angles and the optimizer");
    sub->add_option("--out", o->out, "Trajectory JSON to write")->required();
    sub->add_option("--log", o->log, "JSON-lines step log");
    add_opt_flags(sub, o->opt);
    handlers["adapt"] = [o] { run_adapt(*o); };
  }
  {
    auto o = std::make_shared<GenerateOpts>();
    auto* sub = app.add_subcommand("generate", "Sample bitstrings from a circuit or an interpolated trajectory");
    sub->add_option("--trajectory", o->trajectory, "Trajectory JSON");
    sub->add_option("--circuit", o->circuit, "Circuit JSON");
    sub->add_option("--time", o->time, "Time at which to interpolate the latent block")
        ->each([o](const std::string&) { o->time_set = true; });
    sub->add_option("--shots", o->shots, "Number of samples");
    sub->add_option("--seed", o->seed, "Sampling seed");
    sub->add_option("--out", o->out, "Bit dataset to write")->required();
    sub->add_option("--format", o->format, "Output format: text, packed, csv or auto");
    handlers["generate"] = [o] { run_generate(*o); };
  }
  {
    auto o = std::make_shared<EvalOpts>();
    auto* sub = app.add_subcommand("eval", "PDF-JS and random-conv feature MMD between snapshot directories");
    sub->add_option("--real", o->real, "Directory of real snapshots (.csv or .bin)")->required();
    sub->add_option("--gen", o->gen, "Directory of generated snapshots")->required();
    sub->add_option("--bins", o->bins, "Histogram bins");
    sub->add_option("--encoder-seed", o->encoder_seed, "Random encoder seed");
    sub->add_option("--eval-size", o->eval_size, "Snapshots per side for the feature MMD");
    sub->add_option("--subsample-seed", o->subsample_seed, "Seed for subsampling larger sets");
    sub->add_option("--out", o->out, "JSON result (default: stdout)");
    handlers["eval"] = [o] { run_eval(*o); };
  }
}

}  // namespace ccmap::cli
