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


#include <cmath>
#include <string>

#include <gtest/gtest.h>

#include "mcsr/algorithms.hpp"
#include "mcsr/harness.hpp"

using namespace mcsr;

namespace {

const Algorithm kAll[] = {Algorithm::kMaxSumRate, Algorithm::kSumMse, Algorithm::kIa};

ScenarioConfig single_user_config() {
  return load_config_file(std::string(MCSR_SOURCE_DIR) + "/configs/single_user.cfg");
}

RunOptions quick(std::uint64_t seed, int iters = 30) {
  RunOptions o;
  o.init_seed = seed;
  o.max_iters = iters;
  o.epsilon = 1e-12;
  return o;
}

void expect_feasible(const RunResult &r, const ScenarioConfig &cfg, const std::string &what) {
  for (const auto &rec : r.trace) {
    EXPECT_LE(rec.bs_power, cfg.bs_power_budget * (1.0 + 1e-6)) << what << " it " << rec.iteration;
    EXPECT_LE(rec.relay_power, cfg.relay_power_budget * (1.0 + 1e-6))
        << what << " it " << rec.iteration;
  }
}

}  // namespace

TEST(SingleUser, AllAlgorithmsReachCapacity) {
  const ScenarioConfig cfg = single_user_config();
  const ChannelSet ch = ChannelSet::single_hop(cfg, {CMat::Ones(1, 1)});
  const double capacity = std::log2(1.0 + cfg.bs_power_budget / cfg.noise_var);
  for (Algorithm a : kAll) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const RunResult r = run_algorithm(a, ch, cfg, quick(seed, 200));
      EXPECT_NEAR(r.trace.back().sum_rate, capacity, 1e-3) << to_string(a);
      EXPECT_NEAR(bs_power(r.final_state.V, cfg), cfg.bs_power_budget, 1e-3) << to_string(a);
    }
  }
}

TEST(SingleUser, SurrogateEqualsRateAtTermination) {
  const ScenarioConfig cfg = single_user_config();
  const ChannelSet ch = ChannelSet::single_hop(cfg, {CMat::Constant(1, 1, cplx(0.6, -0.8))});
  const RunResult r = maximize_sum_rate(ch, cfg, quick(4, 100));
  EXPECT_NEAR(r.trace.back().objective, r.trace.back().sum_rate - 1.0 / kLn2, 1e-9);
}

TEST(MaxSumRate, AscentAndFeasibility) {
  const ScenarioConfig cfg = reference_scenario(30.0);
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const ChannelSet ch = draw_channels(cfg, seed);
    const RunResult r = maximize_sum_rate(ch, cfg, quick(seed));
    ASSERT_EQ(r.trace.size(), 31u);
    for (std::size_t i = 1; i < r.trace.size(); ++i)
      EXPECT_GE(r.trace[i].objective, r.trace[i - 1].objective - 1e-8) << "it " << i;
    expect_feasible(r, cfg, "maxsr");
    // eta(w) <= 1 + SINR for every w, so b never exceeds the shifted rate.
    for (const auto &rec : r.trace)
      EXPECT_LE(rec.objective, rec.sum_rate - cfg.num_ms() / kLn2 + 1e-9 * std::abs(rec.sum_rate));
  }
}

TEST(SumMse, DescentAndFeasibility) {
  const ScenarioConfig cfg = reference_scenario(30.0);
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const ChannelSet ch = draw_channels(cfg, seed);
    const RunResult r = minimize_sum_mse(ch, cfg, quick(seed));
    for (std::size_t i = 1; i < r.trace.size(); ++i)
      EXPECT_LE(r.trace[i].objective, r.trace[i - 1].objective * (1.0 + 1e-10) + 1e-12)
          << "it " << i;
    expect_feasible(r, cfg, "summse");
  }
}

TEST(Ia, LeakageNonIncreasingAndFullPower) {
  const ScenarioConfig cfg = reference_scenario(30.0);
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const ChannelSet ch = draw_channels(cfg, seed);
    const RunResult r = ia_leakage_min(ch, cfg, quick(seed));
    for (std::size_t i = 2; i < r.trace.size(); ++i)
      EXPECT_LE(r.trace[i].objective, r.trace[i - 1].objective * (1.0 + 1e-8) + 1e-14)
          << "it " << i;
    EXPECT_LT(r.trace.back().objective, r.trace.front().objective);
    expect_feasible(r, cfg, "ia");
    EXPECT_NEAR(r.trace.back().bs_power, cfg.bs_power_budget, 1e-9 * cfg.bs_power_budget);
    EXPECT_NEAR(r.trace.back().relay_power, cfg.relay_power_budget, 1e-9 * cfg.relay_power_budget);
  }
}

TEST(Ia, NoInterferenceMeansNoLeakage) {
  ScenarioConfig cfg = reference_scenario(20.0);
  cfg.cells = 1;
  cfg.ms_per_cell = 1;
  const ChannelSet ch = draw_channels(cfg, 6);
  const RunResult r = ia_leakage_min(ch, cfg, quick(1, 5));
  EXPECT_EQ(r.trace.back().objective, 0.0);
  EXPECT_GT(r.trace.back().sum_rate, 0.0);
}

TEST(Runs, FinalStateMatchesLastRecord) {
  const ScenarioConfig cfg = reference_scenario(20.0);
  const ChannelSet ch = draw_channels(cfg, 12);
  for (Algorithm a : kAll) {
    const RunResult r = run_algorithm(a, ch, cfg, quick(3, 10));
    EXPECT_NEAR(sum_rate_per_slot(r.final_state, ch, cfg), r.trace.back().sum_rate_per_slot,
                1e-12 * std::max(1.0, r.trace.back().sum_rate_per_slot))
        << to_string(a);
    EXPECT_EQ(r.iterations_used, 10);
    EXPECT_FALSE(r.converged);

    RunOptions lean = quick(3, 10);
    lean.record_trace = false;
    const RunResult l = run_algorithm(a, ch, cfg, lean);
    ASSERT_EQ(l.trace.size(), 1u);
    EXPECT_EQ(l.trace.back().sum_rate, r.trace.back().sum_rate) << to_string(a);
  }
}

TEST(Runs, StopOnSmallChange) {
  const ScenarioConfig cfg = reference_scenario(20.0);
  const ChannelSet ch = draw_channels(cfg, 13);
  RunOptions o;
  o.init_seed = 2;
  o.epsilon = 1e-2;
  o.max_iters = 1000;
  const RunResult r = maximize_sum_rate(ch, cfg, o);
  ASSERT_TRUE(r.converged);
  const auto n = r.trace.size();
  EXPECT_LE(std::abs(r.trace[n - 1].objective - r.trace[n - 2].objective), 1e-2);
  if (n > 2) {
    EXPECT_GT(std::abs(r.trace[n - 2].objective - r.trace[n - 3].objective), 1e-2);
  }
}

TEST(Runs, DeterministicInSeed) {
  const ScenarioConfig cfg = reference_scenario(30.0);
  const ChannelSet ch = draw_channels(cfg, 21);
  for (Algorithm a : kAll) {
    const RunResult x = run_algorithm(a, ch, cfg, quick(5, 8));
    const RunResult y = run_algorithm(a, ch, cfg, quick(5, 8));
    const RunResult z = run_algorithm(a, ch, cfg, quick(6, 8));
    ASSERT_EQ(x.trace.size(), y.trace.size());
    for (std::size_t i = 0; i < x.trace.size(); ++i)
      EXPECT_EQ(x.trace[i].sum_rate, y.trace[i].sum_rate) << to_string(a);
    EXPECT_NE(x.trace.back().sum_rate, z.trace.back().sum_rate) << to_string(a);
  }
}

TEST(InitialState, FullPowerUnitFilters) {
  const ScenarioConfig cfg = reference_scenario(30.0);
  const ChannelSet ch = draw_channels(cfg, 1);
  const SystemState s = initial_state(ch, cfg, 9);
  EXPECT_NEAR(bs_power(s.V, cfg), cfg.bs_power_budget, 1e-9 * cfg.bs_power_budget);
  EXPECT_NEAR(relay_power(s.V, s.G, ch, cfg), cfg.relay_power_budget,
              1e-9 * cfg.relay_power_budget);
  for (const auto &u : s.U) EXPECT_NEAR(u.norm(), 1.0, 1e-12);
  // Receive filters do not depend on the power budgets.
  const SystemState t = initial_state(ch, reference_scenario(0.0), 9);
  for (std::size_t m = 0; m < s.U.size(); ++m) EXPECT_EQ(s.U[m], t.U[m]);
}

TEST(Options, RejectInvalidValues) {
  const ScenarioConfig cfg = reference_scenario();
  const ChannelSet ch = draw_channels(cfg, 1);
  RunOptions o;
  o.epsilon = 0.0;
  EXPECT_THROW(maximize_sum_rate(ch, cfg, o), ConfigError);
  o = RunOptions{};
  o.max_iters = 0;
  EXPECT_THROW(minimize_sum_mse(ch, cfg, o), ConfigError);
  EXPECT_THROW(parse_algorithm("wmmse"), ConfigError);
  for (Algorithm a : kAll) EXPECT_EQ(parse_algorithm(to_string(a)), a);
  ScenarioConfig other = cfg;
  other.relays = 3;
  EXPECT_THROW(ia_leakage_min(ch, other, RunOptions{}), ModelError);
}

TEST(SingleHop, MultiUserRuns) {
  const ScenarioConfig cfg =
      load_config_file(std::string(MCSR_SOURCE_DIR) + "/configs/single_hop.cfg");
  const ChannelSet ch = draw_channels(cfg, 4);
  for (Algorithm a : kAll) {
    const RunResult r = run_algorithm(a, ch, cfg, quick(2, 40));
    expect_feasible(r, cfg, std::string(to_string(a)));
    EXPECT_GT(r.trace.back().sum_rate_per_slot, 0.0) << to_string(a);
    EXPECT_EQ(r.trace.back().sum_rate_per_slot, r.trace.back().sum_rate);
    EXPECT_TRUE(r.final_state.G.empty());
  }
}
