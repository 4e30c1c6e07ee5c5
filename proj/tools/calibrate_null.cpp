// One-off oracle run for the i.i.d. null: QCLI of iid_uniform(n, M) over many seeds.
// Output is committed at tests/acceptance/null_threshold.json and read by the acceptance binary.
#include <cmath>
#include <fstream>
#include <iostream>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ccmap/datasets.hpp"
#include "ccmap/parallel.hpp"
#include "ccmap/spectrum.hpp"
#include "ccmap/stats.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Calibrate the QCLI null threshold (mean + k sd over seeds)"};
  app.option_defaults()->always_capture_default();
  int n = 16;
  std::size_t samples = 10000;
  std::uint64_t first_seed = 1000;
  std::size_t seeds = 100;
  double k_sd = 5.0;
  int threads = 0;
  std::string out;
  app.add_option("--n", n, "Bit width");
  app.add_option("--samples", samples, "Samples per dataset");
  app.add_option("--first-seed", first_seed, "First seed; seeds are consecutive");
  app.add_option("--seeds", seeds, "Number of seeds");
  app.add_option("--k", k_sd, "Standard deviations above the mean");
  app.add_option("--threads", threads, "Worker threads; 0 uses all cores");
  app.add_option("--out", out, "JSON file to write (default: stdout)");
  CLI11_PARSE(app, argc, argv);

  std::vector<double> q(seeds);
  ccmap::parallel_for(seeds, threads > 0 ? threads : ccmap::default_threads(), [&](std::size_t i) {
    q[i] = ccmap::qcli_exact(ccmap::iid_uniform(n, samples, first_seed + i)).qcli;
  });
  const double mu = ccmap::mean(q);
  const double sd = ccmap::stddev(q);

  nlohmann::ordered_json j;
  j["n"] = n;
  j["samples"] = samples;
  j["first_seed"] = first_seed;
  j["seeds"] = seeds;
  j["k_sd"] = k_sd;
  j["mean"] = mu;
  j["sd"] = sd;
  j["threshold"] = mu + k_sd * sd;
  j["values"] = q;
  const std::string text = j.dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
  } else {
    std::ofstream(out) << text;
  }
  return 0;
}
