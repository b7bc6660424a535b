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

// Monte-Carlo experiment driver: pseudo-SNR sweeps, per-iteration
// convergence curves and sum-rate histograms, written as CSV.
//
// Trial t uses channel seed substream(seed, 1, t) and filter seed
// substream(seed, 2, t) at every pseudo-SNR and for every algorithm, so all
// algorithms see identical channels and identical starting filters. Trials
// run on a worker pool; results are stored by job index, so the output does
// not depend on the number of workers.

#ifndef MCSR_HARNESS_HPP
#define MCSR_HARNESS_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "mcsr/algorithms.hpp"
#include "mcsr/scenario.hpp"

namespace mcsr {

class IoError : public Error {
 public:
  IoError(const std::string &path, const std::string &what)
      : Error(path + ": " + what), path_(path) {}
  const std::string &path() const noexcept { return path_; }

 private:
  std::string path_;
};

struct SweepSpec {
  std::vector<double> psnr_db{30.0};
  int trials = 200;
  std::vector<Algorithm> algorithms{Algorithm::kMaxSumRate, Algorithm::kSumMse, Algorithm::kIa};
  double rho = 0.5;  // fraction of the total power given to the BSs (two-hop)
  ScenarioConfig base = reference_scenario();
  std::uint64_t seed = 1;
  RunOptions run;         // init_seed is replaced per trial
  unsigned workers = 0;   // 0: one per hardware thread

  void validate() const {
    if (psnr_db.empty()) throw ConfigError("psnr_db", "list must not be empty");
    if (trials < 1) throw ConfigError("trials", "must be >= 1");
    if (algorithms.empty()) throw ConfigError("algos", "list must not be empty");
    if (base.two_hop() && !(rho > 0.0 && rho < 1.0)) throw ConfigError("rho", "must lie in (0, 1)");
    run.validate();
    base.validate();
  }
};

inline std::uint64_t trial_channel_seed(std::uint64_t seed, int trial) {
  return substream_seed(seed, 1, static_cast<std::uint64_t>(trial));
}

inline std::uint64_t trial_init_seed(std::uint64_t seed, int trial) {
  return substream_seed(seed, 2, static_cast<std::uint64_t>(trial));
}

struct TrialResult {
  double psnr_db = 0.0;
  Algorithm algorithm = Algorithm::kMaxSumRate;
  int trial = 0;
  std::uint64_t seed = 0;         // channel seed
  std::uint64_t channel_hash = 0;  // ChannelSet::fingerprint of the channels used
  double sum_rate_per_slot = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<IterationRecord> trace;  // entry 0 is the initial point
};

namespace detail {

// Runs fn(i) for i in [0, n) on up to `workers` threads. The first exception
// by index is rethrown after all threads join.
template <class Fn>
void parallel_for(std::size_t n, unsigned workers, Fn fn) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(n, 1)));
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto &t : pool) t.join();
  }
  for (auto &e : errors)
    if (e) std::rethrow_exception(e);
}

// Round-trip-exact text for a double, independent of locale.
inline std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string fmt_fixed(double x, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

}  // namespace detail

// All (psnr, trial, algorithm) runs of a sweep, ordered by psnr (as listed),
// then trial, then algorithm (as listed).
inline std::vector<TrialResult> run_trials(const SweepSpec &spec) {
  spec.validate();
  const std::size_t n_alg = spec.algorithms.size();
  const std::size_t n_trials = static_cast<std::size_t>(spec.trials);
  const std::size_t jobs = spec.psnr_db.size() * n_trials;
  std::vector<TrialResult> out(jobs * n_alg);

  detail::parallel_for(jobs, spec.workers, [&](std::size_t job) {
    const std::size_t p = job / n_trials;
    const int trial = static_cast<int>(job % n_trials);
    const ScenarioConfig cfg = apply_psnr(spec.base, spec.psnr_db[p], spec.rho);
    const std::uint64_t seed = trial_channel_seed(spec.seed, trial);
    const ChannelSet ch = draw_channels(cfg, seed);
    RunOptions opts = spec.run;
    opts.init_seed = trial_init_seed(spec.seed, trial);
    opts.record_trace = true;
    for (std::size_t a = 0; a < n_alg; ++a) {
      RunResult r = run_algorithm(spec.algorithms[a], ch, cfg, opts);
      TrialResult &t = out[job * n_alg + a];
      t.psnr_db = spec.psnr_db[p];
      t.algorithm = spec.algorithms[a];
      t.trial = trial;
      t.seed = seed;
      t.channel_hash = ch.fingerprint();
      t.sum_rate_per_slot = r.trace.back().sum_rate_per_slot;
      t.iterations = r.iterations_used;
      t.converged = r.converged;
      t.trace = std::move(r.trace);
      if (!std::isfinite(t.sum_rate_per_slot) || t.sum_rate_per_slot < 0.0)
        throw ModelError("non-finite or negative sum rate in trial " + std::to_string(trial));
    }
  });
  return out;
}

struct RateSummary {
  double psnr_db = 0.0;
  Algorithm algorithm = Algorithm::kMaxSumRate;
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 for n = 1
  int n = 0;
};

inline double sample_mean(const std::vector<double> &x) {
  double s = 0.0;
  for (double v : x) s += v;
  return x.empty() ? 0.0 : s / static_cast<double>(x.size());
}

inline double sample_variance(const std::vector<double> &x) {
  if (x.size() < 2) return 0.0;
  const double m = sample_mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

// Final rates of one (psnr, algorithm) cell in trial order.
inline std::vector<double> final_rates(const std::vector<TrialResult> &results, double psnr_db,
                                       Algorithm alg) {
  std::vector<double> x;
  for (const auto &r : results)
    if (r.psnr_db == psnr_db && r.algorithm == alg) x.push_back(r.sum_rate_per_slot);
  return x;
}

inline std::vector<RateSummary> summarize(const SweepSpec &spec,
                                          const std::vector<TrialResult> &results) {
  std::vector<RateSummary> out;
  for (double p : spec.psnr_db) {
    for (Algorithm a : spec.algorithms) {
      const auto x = final_rates(results, p, a);
      out.push_back({p, a, sample_mean(x), std::sqrt(sample_variance(x)), static_cast<int>(x.size())});
    }
  }
  return out;
}

// Mean rate per slot after iterations 1..iterations; a run that stopped
// early contributes its final value to later iterations.
inline std::vector<double> mean_rate_curve(const std::vector<TrialResult> &results, Algorithm alg,
                                           int iterations) {
  std::vector<double> curve(static_cast<std::size_t>(iterations), 0.0);
  int n = 0;
  for (const auto &r : results) {
    if (r.algorithm != alg) continue;
    ++n;
    for (int i = 1; i <= iterations; ++i) {
      const std::size_t idx = std::min<std::size_t>(static_cast<std::size_t>(i), r.trace.size() - 1);
      curve[static_cast<std::size_t>(i - 1)] += r.trace[idx].sum_rate_per_slot;
    }
  }
  if (n > 0)
    for (double &c : curve) c /= n;
  return curve;
}

struct HistogramBin {
  Algorithm algorithm = Algorithm::kMaxSumRate;
  double lo = 0.0;
  double hi = 0.0;
  int count = 0;
};

inline constexpr double kHistogramBinWidth = 0.25;

// Bins [j w, (j+1) w) covering every final rate of each algorithm.
inline std::vector<HistogramBin> rate_histogram(const SweepSpec &spec,
                                                const std::vector<TrialResult> &results) {
  std::vector<HistogramBin> out;
  const double w = kHistogramBinWidth;
  for (Algorithm a : spec.algorithms) {
    std::map<long, int> counts;
    for (const auto &r : results)
      if (r.algorithm == a) ++counts[static_cast<long>(std::floor(r.sum_rate_per_slot / w))];
    if (counts.empty()) continue;
    for (long j = counts.begin()->first; j <= counts.rbegin()->first; ++j) {
      const auto it = counts.find(j);
      out.push_back({a, static_cast<double>(j) * w, static_cast<double>(j + 1) * w,
                     it == counts.end() ? 0 : it->second});
    }
  }
  return out;
}

// ---- CSV ------------------------------------------------------------------

inline void write_detail_csv(std::ostream &os, const std::vector<TrialResult> &results) {
  os << "psnr_db,algorithm,trial,seed,sum_rate_per_slot,iterations,converged\n";
  for (const auto &r : results)
    os << detail::fmt(r.psnr_db) << ',' << to_string(r.algorithm) << ',' << r.trial << ','
       << r.seed << ',' << detail::fmt(r.sum_rate_per_slot) << ',' << r.iterations << ','
       << (r.converged ? 1 : 0) << '\n';
}

inline void write_summary_csv(std::ostream &os, const std::vector<RateSummary> &rows) {
  os << "psnr_db,algorithm,mean_rate,std_rate,n\n";
  for (const auto &r : rows)
    os << detail::fmt(r.psnr_db) << ',' << to_string(r.algorithm) << ',' << detail::fmt(r.mean)
       << ',' << detail::fmt(r.stddev) << ',' << r.n << '\n';
}

inline void write_convergence_csv(std::ostream &os, const SweepSpec &spec,
                                  const std::vector<TrialResult> &results, int iterations) {
  os << "algorithm,iteration,mean_rate\n";
  for (Algorithm a : spec.algorithms) {
    const auto curve = mean_rate_curve(results, a, iterations);
    for (int i = 1; i <= iterations; ++i)
      os << to_string(a) << ',' << i << ',' << detail::fmt(curve[static_cast<std::size_t>(i - 1)])
         << '\n';
  }
}

inline void write_histogram_csv(std::ostream &os, const std::vector<HistogramBin> &bins) {
  os << "algorithm,bin_lo,bin_hi,count\n";
  for (const auto &b : bins)
    os << to_string(b.algorithm) << ',' << detail::fmt_fixed(b.lo, 2) << ','
       << detail::fmt_fixed(b.hi, 2) << ',' << b.count << '\n';
}

// Opens dir/name for writing, creating dir.
inline std::ofstream open_output(const std::filesystem::path &dir, const std::string &name) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError(dir.string(), "cannot create directory: " + ec.message());
  const auto path = dir / name;
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError(path.string(), "cannot open for writing");
  return os;
}

inline void close_output(std::ofstream &os, const std::filesystem::path &path) {
  os.flush();
  if (!os) throw IoError(path.string(), "write failed");
  os.close();
}

// ---- experiments ----------------------------------------------------------

// Writes sweep_detail.csv and sweep_summary.csv into out_dir.
inline std::vector<TrialResult> run_sweep(const SweepSpec &spec,
                                          const std::filesystem::path &out_dir) {
  auto results = run_trials(spec);
  {
    auto os = open_output(out_dir, "sweep_detail.csv");
    write_detail_csv(os, results);
    close_output(os, out_dir / "sweep_detail.csv");
  }
  {
    auto os = open_output(out_dir, "sweep_summary.csv");
    write_summary_csv(os, summarize(spec, results));
    close_output(os, out_dir / "sweep_summary.csv");
  }
  return results;
}

inline constexpr int kConvergenceIterations = 50;

// Writes convergence.csv: mean rate per slot at iterations 1..50 for each
// algorithm at the single pseudo-SNR of the sweep.
inline std::vector<TrialResult> run_convergence(const SweepSpec &spec,
                                                const std::filesystem::path &out_dir) {
  if (spec.psnr_db.size() != 1) throw ConfigError("psnr_db", "convergence needs exactly one value");
  if (spec.run.max_iters < kConvergenceIterations)
    throw ConfigError("max_iters", "convergence curves need at least 50 iterations");
  auto results = run_trials(spec);
  auto os = open_output(out_dir, "convergence.csv");
  write_convergence_csv(os, spec, results, kConvergenceIterations);
  close_output(os, out_dir / "convergence.csv");
  return results;
}

// Writes density_detail.csv (final rate per trial) and density_hist.csv
// (counts in bins of width 0.25) at the single pseudo-SNR of the sweep.
inline std::vector<TrialResult> run_density(const SweepSpec &spec,
                                            const std::filesystem::path &out_dir) {
  if (spec.psnr_db.size() != 1) throw ConfigError("psnr_db", "density needs exactly one value");
  auto results = run_trials(spec);
  {
    auto os = open_output(out_dir, "density_detail.csv");
    write_detail_csv(os, results);
    close_output(os, out_dir / "density_detail.csv");
  }
  {
    auto os = open_output(out_dir, "density_hist.csv");
    write_histogram_csv(os, rate_histogram(spec, results));
    close_output(os, out_dir / "density_hist.csv");
  }
  return results;
}

// Full per-iteration trace of one run.
inline void write_trace_csv(std::ostream &os, const RunResult &r) {
  os << "iteration,objective,sum_rate,sum_rate_per_slot,bs_power,relay_power\n";
  for (const auto &t : r.trace)
    os << t.iteration << ',' << detail::fmt(t.objective) << ',' << detail::fmt(t.sum_rate) << ','
       << detail::fmt(t.sum_rate_per_slot) << ',' << detail::fmt(t.bs_power) << ','
       << detail::fmt(t.relay_power) << '\n';
}

inline ScenarioConfig load_config_file(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string(), "cannot open config");
  return load_config(in);
}

}  // namespace mcsr

#endif  // MCSR_HARNESS_HPP
