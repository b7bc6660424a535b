// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

// mcsr: command-line driver for the sum-rate experiments.
//
//   mcsr sweep    --psnr-db 0,10,20,30 --trials 200 --out results/
//   mcsr converge --psnr-db 30 --trials 100 --out results/
//   mcsr density  --psnr-db 30 --trials 200 --out results/
//   mcsr single   --psnr-db 30 --trial 0 --algos maxsr --out results/
//
// Without --config the reference scenario is used. Budgets in the config are
// replaced by --psnr-db and --rho.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mcsr/harness.hpp"

namespace {

struct CommonFlags {
  std::string config;
  std::uint64_t seed = 1;
  int trials = 200;
  std::vector<double> psnr_db;
  double rho = 0.5;
  std::vector<std::string> algos{"maxsr", "summse", "ia"};
  std::string out = "results";
  double epsilon = 1e-4;
  int max_iters = 10000;
  unsigned workers = 0;
};

void add_common(CLI::App *cmd, CommonFlags &f) {
  cmd->add_option("--config", f.config, "scenario file (key = value lines)");
  cmd->add_option("--seed", f.seed, "base seed for channels and initial filters");
  cmd->add_option("--trials", f.trials, "channel snapshots per pseudo-SNR");
  cmd->add_option("--psnr-db", f.psnr_db, "pseudo-SNR values in dB")->delimiter(',');
  cmd->add_option("--rho", f.rho, "fraction of the total power given to the BSs");
  cmd->add_option("--algos", f.algos, "subset of maxsr,summse,ia")->delimiter(',');
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--epsilon", f.epsilon, "stopping tolerance on the objective");
  cmd->add_option("--max-iters", f.max_iters, "iteration cap per run");
  cmd->add_option("--workers", f.workers, "worker threads (0: one per hardware thread)");
}

mcsr::SweepSpec make_spec(const CommonFlags &f, std::vector<double> default_psnr) {
  mcsr::SweepSpec spec;
  if (f.config.empty()) {
    spec.base = mcsr::reference_scenario();
  } else {
    try {
      spec.base = mcsr::load_config_file(f.config);
    } catch (const mcsr::ConfigError &e) {
      throw mcsr::ConfigError(e.field(), e.reason() + " (in " + f.config + ")");
    }
  }
  spec.psnr_db = f.psnr_db.empty() ? std::move(default_psnr) : f.psnr_db;
  spec.trials = f.trials;
  spec.rho = f.rho;
  spec.seed = f.seed;
  spec.run.epsilon = f.epsilon;
  spec.run.max_iters = f.max_iters;
  spec.workers = f.workers;
  spec.algorithms.clear();
  for (const auto &a : f.algos) spec.algorithms.push_back(mcsr::parse_algorithm(a));
  spec.validate();
  return spec;
}

void print_summary(const mcsr::SweepSpec &spec, const std::vector<mcsr::TrialResult> &results) {
  for (const auto &s : mcsr::summarize(spec, results))
    std::cout << "psnr " << s.psnr_db << " dB  " << mcsr::to_string(s.algorithm) << "  mean "
              << s.mean << "  std " << s.stddev << "  n " << s.n << '\n';
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Sum-rate maximization experiments for relay-assisted cellular downlinks"};
  app.require_subcommand(1);

  CommonFlags sweep_f, conv_f, dens_f, single_f;
  int single_trial = 0;
  auto *sweep = app.add_subcommand("sweep", "average rate per slot over a pseudo-SNR grid");
  auto *conv = app.add_subcommand("converge", "mean rate per slot over iterations 1..50");
  auto *dens = app.add_subcommand("density", "final-rate histogram at one pseudo-SNR");
  auto *single = app.add_subcommand("single", "one run with its full per-iteration trace");
  add_common(sweep, sweep_f);
  add_common(conv, conv_f);
  add_common(dens, dens_f);
  add_common(single, single_f);
  single->add_option("--trial", single_trial, "trial index whose channel and start are used");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sweep) {
      const auto spec = make_spec(sweep_f, {0.0, 10.0, 20.0, 30.0});
      const auto results = mcsr::run_sweep(spec, sweep_f.out);
      print_summary(spec, results);
    } else if (*conv) {
      const auto spec = make_spec(conv_f, {30.0});
      const auto results = mcsr::run_convergence(spec, conv_f.out);
      print_summary(spec, results);
    } else if (*dens) {
      const auto spec = make_spec(dens_f, {30.0});
      const auto results = mcsr::run_density(spec, dens_f.out);
      print_summary(spec, results);
    } else if (*single) {
      auto spec = make_spec(single_f, {30.0});
      if (spec.psnr_db.size() != 1) throw mcsr::ConfigError("psnr_db", "single needs one value");
      if (single_trial < 0) throw mcsr::ConfigError("trial", "must be >= 0");
      const auto cfg = mcsr::apply_psnr(spec.base, spec.psnr_db.front(), spec.rho);
      const auto ch = mcsr::draw_channels(cfg, mcsr::trial_channel_seed(spec.seed, single_trial));
      auto opts = spec.run;
      opts.init_seed = mcsr::trial_init_seed(spec.seed, single_trial);
      for (auto alg : spec.algorithms) {
        const auto r = mcsr::run_algorithm(alg, ch, cfg, opts);
        const std::string name = "single_" + std::string(mcsr::to_string(alg)) + ".csv";
        auto os = mcsr::open_output(single_f.out, name);
        mcsr::write_trace_csv(os, r);
        mcsr::close_output(os, std::filesystem::path(single_f.out) / name);
        std::cout << mcsr::to_string(alg) << "  rate/slot " << r.trace.back().sum_rate_per_slot
                  << "  iterations " << r.iterations_used << (r.converged ? "" : " (cap)")
                  << '\n';
      }
    }
  } catch (const mcsr::ConfigError &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
