#include <iostream>
#include <sstream>

#include "ccmap/bits.hpp"
#include "ccmap/cci.hpp"
#include "ccmap/codec.hpp"
#include "ccmap/envelope.hpp"
#include "ccmap/error.hpp"
#include "ccmap/spectrum.hpp"
#include "ccmap/svg.hpp"
#include "common.hpp"

namespace ccmap::cli {

namespace {

struct EncodeOpts {
  std::string input, out, spec_in, spec_out, format = "text";
  int bits = 6;
  std::vector<std::string> ranges;
};

QuantizerSpec resolve_spec(const EncodeOpts& o, const FloatDataset& d) {
  if (!o.spec_in.empty()) return QuantizerSpec::from_json(read_text(o.spec_in));
  QuantizerSpec spec;
  spec.bits = o.bits;
  if (o.ranges.empty()) {
    for (const auto& r : d.ranges) spec.ranges.push_back({r[0], r[1]});
  } else {
    if (o.ranges.size() != 3) throw ConfigError("--ranges needs three a,b pairs (x, y, z)");
    for (const auto& r : o.ranges) {
      const auto v = parse_double_list(r, "--ranges");
      if (v.size() != 2) throw ConfigError("each --ranges entry must be a,b");
      spec.ranges.push_back({v[0], v[1]});
    }
  }
  spec.validate();
  return spec;
}

void run_encode(const EncodeOpts& o) {
  const FloatDataset d = load_float_csv(o.input);
  const QuantizerSpec spec = resolve_spec(o, d);
  const std::string spec_out = o.spec_out.empty() ? o.out + ".spec.json" : o.spec_out;

  Manifest m("encode");
  m.config() = {{"bits", spec.bits}, {"spec", J::parse(spec.to_json())}, {"format", o.format}};
  m.input(o.input);
  if (!o.spec_in.empty()) m.input(o.spec_in);
  m.output(o.out);
  m.output(spec_out);
  const auto manifest = m.write(fs::path(o.out));

  reset_codec_clamp_count();
  const BitDataset bits = encode_dataset(d, spec);
  const auto fmt = resolve_format(o.format, o.out);
  write_atomic(spec_out, spec.to_json() + "\n");
  save_bit_dataset(bits, o.out, fmt);

  J r;
  r["n"] = bits.width();
  r["M"] = bits.size();
  r["clamped_values"] = codec_clamp_count();
  r["checksum"] = dataset_checksum(bits);
  r["spec"] = spec_out;
  r["manifest"] = manifest.string();
  emit_json(r, "");
}

struct DecodeOpts {
  std::string input, spec, out, format = "auto";
};

void run_decode(const DecodeOpts& o) {
  const QuantizerSpec spec = QuantizerSpec::from_json(read_text(o.spec));
  const BitDataset bits = load_bits(o.input, o.format);
  Manifest m("decode");
  m.config() = {{"spec", J::parse(spec.to_json())}};
  m.input(o.input);
  m.input(o.spec);
  m.output(o.out);
  const auto manifest = m.write(fs::path(o.out));
  const FloatDataset f = decode_dataset(bits, spec);
  const fs::path tmp = fs::path(o.out).string() + ".partial";
  save_float_csv(f, tmp);
  fs::rename(tmp, o.out);
  emit_json(J{{"M", f.samples.size()}, {"manifest", manifest.string()}}, "");
}

struct QcliOpts {
  std::string input, format = "auto", out, spectrum_csv;
  bool exact = false, mc = false, no_cache = false;
  std::size_t budget = kDefaultMcBudget;
  std::uint64_t seed = 0;
};

J qcli_payload(const BitDataset& d, bool use_mc, std::size_t budget, std::uint64_t seed) {
  J r;
  if (use_mc) {
    const auto res = qcli_mc(d, budget, seed);
    r["qcli"] = res.qcli;
    r["method"] = "mc";
    r["m"] = res.m.m;
    r["b"] = res.b.m;
    r["budget"] = budget;
    r["seed"] = seed;
    r["subsets_per_order"] = res.subsets_per_order;
    r["tv"] = tv_distance(res.m, res.b);
  } else {
    const auto res = qcli_exact(d);
    r["qcli"] = res.qcli;
    r["method"] = "exact";
    r["m"] = res.m.m;
    r["b"] = res.b.m;
    r["tv"] = tv_distance(res.m, res.b);
  }
  r["n"] = d.width();
  r["M"] = d.size();
  r["checksum"] = dataset_checksum(d);
  return r;
}

void run_qcli(const QcliOpts& o) {
  if (o.exact && o.mc) throw ConfigError("--exact and --mc are mutually exclusive");
  const BitDataset d = load_bits(o.input, o.format);
  const bool use_mc = o.mc || (!o.exact && d.width() > kExactQcliLimit);
  if (use_mc && o.budget < static_cast<std::size_t>(d.width()) + 1) {
    throw ConfigError("--budget must be at least n + 1");
  }

  Manifest m("qcli");
  m.config() = {{"method", use_mc ? "mc" : "exact"}, {"budget", o.budget}, {"clip", kJsClip}};
  m.seed(o.seed);
  m.input(o.input);
  if (!o.out.empty()) m.output(o.out);
  if (!o.spectrum_csv.empty()) m.output(o.spectrum_csv);
  const auto manifest = m.write(o.out.empty() ? std::nullopt : std::optional<fs::path>(o.out));

  const std::string key = hex64(fnv1a64(tool_version() + "|" + dataset_checksum(d) + "|" + (use_mc ? "mc" : "exact") +
                                        "|" + std::to_string(use_mc ? o.budget : 0) + "|" +
                                        std::to_string(use_mc ? o.seed : 0)));
  const fs::path cached = cache_dir() / "qcli" / (key + ".json");
  J r;
  if (!o.no_cache && fs::exists(cached)) {
    r = J::parse(read_text(cached), nullptr, false);
  }
  if (r.is_null() || r.is_discarded()) {
    r = qcli_payload(d, use_mc, o.budget, o.seed);
    if (!o.no_cache) write_atomic(cached, r.dump() + "\n");
  }

  if (!o.spectrum_csv.empty()) {
    std::ostringstream os;
    os.precision(17);
    os << "k,m_k,b_k,abs_diff\n";
    const auto& mk = r["m"];
    const auto& bk = r["b"];
    for (std::size_t k = 0; k < mk.size(); ++k) {
      const double a = mk[k].get<double>();
      const double b = bk[k].get<double>();
      os << k << ',' << a << ',' << b << ',' << std::abs(a - b) << '\n';
    }
    write_atomic(o.spectrum_csv, os.str());
  }
  r["manifest"] = manifest.string();
  emit_json(r, o.out);
}

struct CciOpts {
  std::string input, format = "auto", out, edges_out;
};

void run_cci(const CciOpts& o) {
  const BitDataset d = load_bits(o.input, o.format);
  Manifest m("cci");
  m.config() = {{"degenerate_tc", kDegenerateTc}};
  m.input(o.input);
  if (!o.out.empty()) m.output(o.out);
  if (!o.edges_out.empty()) m.output(o.edges_out);
  const auto manifest = m.write(o.out.empty() ? std::nullopt : std::optional<fs::path>(o.out));

  const CciReport rep = cci(d);
  if (!o.edges_out.empty()) write_atomic(o.edges_out, tree_edges_csv(rep.tree));
  J r = J::parse(cci_report_json(rep));
  r["n"] = d.width();
  r["manifest"] = manifest.string();
  emit_json(r, o.out);
}

struct MapOpts {
  std::vector<std::string> inputs, labels, provenance;
  std::string format = "auto", out, svg, frontier;
  std::size_t budget = kDefaultMcBudget;
  std::uint64_t seed = 0;
  int frontier_bins = 20;
  std::size_t min_count = 3;
  int window = 3;
};

void run_map(const MapOpts& o) {
  if (!o.labels.empty() && o.labels.size() != o.inputs.size()) {
    throw ConfigError("--labels must match --inputs one to one");
  }
  if (o.provenance.size() > 1 && o.provenance.size() != o.inputs.size()) {
    throw ConfigError("--provenance takes one value or one per input");
  }
  std::vector<Provenance> prov;
  for (std::size_t i = 0; i < o.inputs.size(); ++i) {
    prov.push_back(o.provenance.empty() ? Provenance::classical
                                        : parse_provenance(o.provenance[o.provenance.size() == 1 ? 0 : i]));
  }

  Manifest m("map");
  m.config() = {{"budget", o.budget},
                {"exact_limit", kExactQcliLimit},
                {"frontier", {{"bins", o.frontier_bins}, {"min_count", o.min_count}, {"window", o.window}}}};
  m.seed(o.seed);
  for (const auto& in : o.inputs) m.input(in);
  for (const auto* p : {&o.out, &o.svg, &o.frontier}) {
    if (!p->empty()) m.output(*p);
  }
  const auto manifest = m.write(o.out.empty() ? std::nullopt : std::optional<fs::path>(o.out));

  std::vector<MapPoint> points;
  for (std::size_t i = 0; i < o.inputs.size(); ++i) {
    const std::string label = o.labels.empty() ? fs::path(o.inputs[i]).stem().string() : o.labels[i];
    points.push_back(map_point(load_bits(o.inputs[i], o.format), label, prov[i], o.budget, o.seed));
  }
  const std::string csv = map_csv(points);
  if (o.out.empty()) {
    std::cout << csv;
  } else {
    write_atomic(o.out, csv);
  }

  std::vector<SvgSeries> series;
  SvgSeries classical{"classical", "#e07b00", {}, false, false};
  SvgSeries quantum{"quantum", "#1f5fbf", {}, false, false};
  std::vector<XY> xy;
  for (const auto& p : points) {
    (p.provenance == Provenance::classical ? classical : quantum).points.push_back({p.qcli, p.cci});
    xy.push_back({p.qcli, p.cci});
  }
  series.push_back(classical);
  series.push_back(quantum);
  if (!o.frontier.empty()) {
    const auto env = frontier_envelope(xy, o.frontier_bins, o.min_count, o.window);
    write_atomic(o.frontier, envelope_csv(env));
    series.push_back({"frontier", "#444444", env.smoothed, true, true});
  }
  if (!o.svg.empty()) write_atomic(o.svg, render_svg("correlation-complexity map", "QCLI", "CCI", series));
  if (!o.out.empty()) std::cerr << J{{"points", points.size()}, {"manifest", manifest.string()}}.dump() << "\n";
}

}  // namespace

void register_data_commands(CLI::App& app, Handlers& handlers) {
  {
    auto o = std::make_shared<EncodeOpts>();
    auto* sub = app.add_subcommand("encode", "Quantize an (x,y,z) float CSV into bitstrings");
    sub->add_option("--input", o->input, "Float CSV with three columns")->required();
    sub->add_option("--out", o->out, "Bit dataset to write")->required();
    sub->add_option("--bits", o->bits, "Bits per coordinate");
    sub->add_option("--ranges", o->ranges, "Three a,b ranges (x y z); default: observed min/max");
    sub->add_option("--spec", o->spec_in, "Existing quantizer JSON (overrides --bits/--ranges)");
    sub->add_option("--spec-out", o->spec_out, "Quantizer JSON to write (default: <out>.spec.json)");
    sub->add_option("--format", o->format, "Output format: text, packed, csv or auto");
    handlers["encode"] = [o] { run_encode(*o); };
  }
  {
    auto o = std::make_shared<DecodeOpts>();
    auto* sub = app.add_subcommand("decode", "Decode bitstrings back to bin-center floats");
    sub->add_option("--input", o->input, "Bit dataset")->required();
    sub->add_option("--spec", o->spec, "Quantizer JSON written by encode")->required();
    sub->add_option("--out", o->out, "Float CSV to write")->required();
    sub->add_option("--format", o->format, "Input format: text, packed, csv or auto");
    handlers["decode"] = [o] { run_decode(*o); };
  }
  {
    auto o = std::make_shared<QcliOpts>();
    auto* sub = app.add_subcommand("qcli", "Order spectrum and QCLI of a bit dataset");
    sub->add_option("--input", o->input, "Bit dataset")->required();
    sub->add_option("--format", o->format, "Input format: text, packed, csv or auto");
    sub->add_flag("--exact", o->exact, "Dense Walsh transform, n <= 24 (default: off)");
    sub->add_flag("--mc", o->mc, "Monte-Carlo subset estimator (default: off; automatic above n = 20)");
    sub->add_option("--budget", o->budget, "Monte-Carlo subset budget");
    sub->add_option("--seed", o->seed, "Monte-Carlo seed");
    sub->add_option("--out", o->out, "JSON result (default: stdout)");
    sub->add_option("--spectrum-csv", o->spectrum_csv, "Per-order table k,m_k,b_k,|m_k-b_k|");
    sub->add_flag("--no-cache", o->no_cache, "Ignore and do not fill the result cache (default: off)");
    handlers["qcli"] = [o] { run_qcli(*o); };
  }
  {
    auto o = std::make_shared<CciOpts>();
    auto* sub = app.add_subcommand("cci", "Total correlation, Chow-Liu tree and CCI");
    sub->add_option("--input", o->input, "Bit dataset")->required();
    sub->add_option("--format", o->format, "Input format: text, packed, csv or auto");
    sub->add_option("--out", o->out, "JSON result (default: stdout)");
    sub->add_option("--edges-out", o->edges_out, "Tree edge list CSV (i,j,weight)");
    handlers["cci"] = [o] { run_cci(*o); };
  }
  {
    auto o = std::make_shared<MapOpts>();
    auto* sub = app.add_subcommand("map", "Place datasets on the (QCLI, CCI) map");
    sub->add_option("--inputs", o->inputs, "Bit datasets")->required();
    sub->add_option("--labels", o->labels, "One label per input (default: file stems)");
    sub->add_option("--provenance", o->provenance, "classical or quantum; one value or one per input");
    sub->add_option("--format", o->format, "Input format: text, packed, csv or auto");
    sub->add_option("--budget", o->budget, "Monte-Carlo budget for wide datasets");
    sub->add_option("--seed", o->seed, "Monte-Carlo seed");
    sub->add_option("--out", o->out, "Map CSV (default: stdout)");
    sub->add_option("--svg", o->svg, "SVG scatter plot");
    sub->add_option("--frontier", o->frontier, "Frontier envelope CSV");
    sub->add_option("--frontier-bins", o->frontier_bins, "Frontier bin count");
    sub->add_option("--min-count", o->min_count, "Points required per frontier bin");
    sub->add_option("--window", o->window, "Moving-average window");
    handlers["map"] = [o] { run_map(*o); };
  }
}

}  // namespace ccmap::cli
