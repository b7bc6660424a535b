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
#include <vector>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "mcsr/model.hpp"
#include "mcsr/surrogate.hpp"
#include "oracles.hpp"

using namespace mcsr;

namespace {

ScenarioConfig scalar_single_hop(int cells) {
  ScenarioConfig cfg;
  cfg.cells = cells;
  cfg.ms_per_cell = 1;
  cfg.bs_antennas = 1;
  cfg.ms_antennas = 1;
  cfg.mode = Mode::kSingleHop;
  cfg.bs_power_budget = 10.0;
  return cfg;
}

CMat scalar(cplx v) { return CMat::Constant(1, 1, v); }

// K cells, one relay per cell, every hop an identity link to its own index.
ScenarioConfig scalar_two_hop(int cells) {
  ScenarioConfig cfg = scalar_single_hop(cells);
  cfg.mode = Mode::kTwoHop;
  cfg.relays = cells;
  cfg.relay_antennas = 1;
  cfg.relay_power_budget = 10.0;
  return cfg;
}

ChannelSet diagonal_two_hop(const ScenarioConfig &cfg) {
  std::vector<CMat> rb, mr;
  for (int r = 0; r < cfg.relays; ++r)
    for (int k = 0; k < cfg.cells; ++k) rb.push_back(scalar(r == k ? 1.0 : 0.0));
  for (int m = 0; m < cfg.num_ms(); ++m)
    for (int r = 0; r < cfg.relays; ++r) mr.push_back(scalar(m == r ? 1.0 : 0.0));
  return ChannelSet::two_hop(cfg, rb, mr);
}

SystemState scalar_state(const ScenarioConfig &cfg, cplx v, cplx g) {
  SystemState s;
  for (int k = 0; k < cfg.cells; ++k) s.V.push_back(scalar(v));
  if (cfg.two_hop())
    for (int r = 0; r < cfg.relays; ++r) s.G.push_back(scalar(g));
  for (int m = 0; m < cfg.num_ms(); ++m) s.U.push_back(CVec::Ones(1));
  return s;
}

}  // namespace

TEST(LinkStats, SingleHopIdentity) {
  ScenarioConfig cfg = scalar_single_hop(1);
  cfg.bs_antennas = 2;
  cfg.ms_antennas = 2;
  const ChannelSet ch = ChannelSet::single_hop(cfg, {CMat::Identity(2, 2)});
  SystemState s;
  s.V.push_back(CMat(2, 1));
  s.V[0] << 1.0, 0.0;
  s.U.push_back(CVec::Ones(2));
  const LinkStats ls = link_stats(0, s, ch, cfg);
  EXPECT_NEAR((ls.q - (CVec(2) << 1.0, 0.0).finished()).norm(), 0.0, 1e-15);
  EXPECT_NEAR((ls.Z - CMat::Identity(2, 2)).norm(), 0.0, 1e-15);
}

TEST(LinkStats, SilentRelaysLeaveOnlyNoise) {
  const ScenarioConfig cfg = reference_scenario();
  const ChannelSet ch = draw_channels(cfg, 3);
  Rng rng(11);
  SystemState s = fixture::random_state(cfg, ch, rng);
  for (auto &g : s.G) g.setZero();
  for (int m = 0; m < cfg.num_ms(); ++m) {
    const LinkStats ls = link_stats(m, s, ch, cfg);
    EXPECT_EQ(ls.q.norm(), 0.0);
    EXPECT_NEAR((ls.Z - cfg.noise_var * CMat::Identity(2, 2)).norm(), 0.0, 1e-15);
  }
  EXPECT_EQ(sum_rate(s, ch, cfg), 0.0);
}

TEST(LinkStats, MatchesMonteCarlo) {
  const ScenarioConfig cfg = reference_scenario(10.0);
  const ChannelSet ch = draw_channels(cfg, 17);
  Rng rng(5);
  const SystemState s = fixture::random_state(cfg, ch, rng);
  for (int m : {0, 4}) {
    const LinkStats ls = link_stats(m, s, ch, cfg);
    const CVec &u = s.U[static_cast<std::size_t>(m)];
    const cplx w(0.7, -0.4);
    const auto mc = oracle::simulate_ms(m, s, ch, cfg, ls.q, 200000, 100 + m, &u, w);
    const double scale = ls.Z.norm();
    EXPECT_LT((mc.cov - ls.Z).norm() / scale, 0.02) << "m=" << m;
    EXPECT_LT((mc.useful_gain - ls.q).norm() / std::sqrt(scale), 0.02) << "m=" << m;
    const double g = g_value(ls, u, w, cfg.symbol_power);
    EXPECT_NEAR(mc.mse / g, 1.0, 0.02) << "m=" << m;
    const double pr = relay_power(s.V, s.G, ch, cfg);
    EXPECT_NEAR(mc.relay_power / pr, 1.0, 0.02);
  }
}

TEST(Power, ClosedForms) {
  ScenarioConfig cfg = reference_scenario();
  cfg.symbol_power = 2.0;
  std::vector<CMat> V{CMat::Identity(3, 3), CMat::Zero(3, 3)};
  EXPECT_DOUBLE_EQ(bs_power(V, cfg), 6.0);

  cfg.symbol_power = 1.0;
  const ChannelSet ch = draw_channels(cfg, 1);
  std::vector<CMat> zero(2, CMat::Zero(3, 3));
  std::vector<CMat> G(4, CMat::Identity(2, 2));
  // Only forwarded relay noise: R * N_R * sigma^2.
  EXPECT_DOUBLE_EQ(relay_power(zero, G, ch, cfg), 8.0);
  EXPECT_THROW(relay_power(zero, std::vector<CMat>(3, CMat::Identity(2, 2)), ch, cfg), ModelError);
}

TEST(Power, QuadraticInFilters) {
  const ScenarioConfig cfg = reference_scenario();
  const ChannelSet ch = draw_channels(cfg, 2);
  Rng rng(8);
  SystemState s = fixture::random_state(cfg, ch, rng);
  const double pb = bs_power(s.V, cfg);
  std::vector<CMat> V2 = s.V;
  for (auto &v : V2) v *= 3.0;
  EXPECT_NEAR(bs_power(V2, cfg), 9.0 * pb, 1e-9 * pb);
  // The noise part does not scale with V.
  const double noise_part = relay_power(std::vector<CMat>(2, CMat::Zero(3, 3)), s.G, ch, cfg);
  const double signal_part = relay_power(s.V, s.G, ch, cfg) - noise_part;
  EXPECT_NEAR(relay_power(V2, s.G, ch, cfg) - noise_part, 9.0 * signal_part, 1e-9 * signal_part);
}

TEST(Sinr, ScalarLink) {
  const ScenarioConfig cfg = scalar_single_hop(1);
  const ChannelSet ch = ChannelSet::single_hop(cfg, {scalar(1.0)});
  const SystemState s = scalar_state(cfg, 1.0, 0.0);
  EXPECT_DOUBLE_EQ(sinr(0, s, ch, cfg), 1.0);
}

TEST(Sinr, DegenerateFilters) {
  LinkStats ls;
  ls.q = (CVec(2) << 1.0, 0.0).finished();
  ls.Z = CMat::Identity(2, 2);
  EXPECT_EQ(sinr(ls, (CVec(2) << 0.0, 1.0).finished(), 1.0), 0.0);
  EXPECT_EQ(sinr(ls, CVec::Zero(2), 1.0), 0.0);
}

TEST(Sinr, InvariantToFilterScale) {
  const ScenarioConfig cfg = reference_scenario();
  const ChannelSet ch = draw_channels(cfg, 4);
  Rng rng(6);
  SystemState s = fixture::random_state(cfg, ch, rng);
  for (int m = 0; m < cfg.num_ms(); ++m) {
    const double a = sinr(m, s, ch, cfg);
    s.U[static_cast<std::size_t>(m)] *= cplx(-2.5, 1.0);
    EXPECT_NEAR(sinr(m, s, ch, cfg), a, 1e-12 * std::max(1.0, a));
  }
}

TEST(SumRate, DiagonalSingleHop) {
  const ScenarioConfig cfg = scalar_single_hop(3);
  std::vector<CMat> mb;
  for (int m = 0; m < 3; ++m)
    for (int k = 0; k < 3; ++k) mb.push_back(scalar(m == k ? 1.0 : 0.0));
  const ChannelSet ch = ChannelSet::single_hop(cfg, mb);
  EXPECT_NEAR(sum_rate(scalar_state(cfg, 1.0, 0.0), ch, cfg), 3.0, 1e-14);
  EXPECT_NEAR(sum_rate_per_slot(scalar_state(cfg, 1.0, 0.0), ch, cfg), 3.0, 1e-14);
}

TEST(SumRate, DiagonalTwoHopCountsTwoSlots) {
  const ScenarioConfig cfg = scalar_two_hop(6);
  const ChannelSet ch = diagonal_two_hop(cfg);
  // |v|^2 / (|g|^2 sigma^2 + sigma^2) = 1 per MS.
  const SystemState s = scalar_state(cfg, std::sqrt(2.0), 1.0);
  EXPECT_NEAR(sum_rate(s, ch, cfg), 6.0, 1e-13);
  EXPECT_NEAR(sum_rate_per_slot(s, ch, cfg), 3.0, 1e-13);
  EXPECT_EQ(sum_rate(scalar_state(cfg, 0.0, 1.0), ch, cfg), 0.0);
  // SINR 3 per MS: log2(4) each.
  EXPECT_NEAR(sum_rate(scalar_state(cfg, std::sqrt(6.0), 1.0), ch, cfg), 12.0, 1e-13);
}

TEST(LinkStats, CovarianceFloorIsNoise) {
  const ScenarioConfig cfg = reference_scenario();
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const ChannelSet ch = draw_channels(cfg, seed);
    Rng rng(seed + 1000);
    const SystemState s = fixture::random_state(cfg, ch, rng);
    for (const auto &ls : all_link_stats(s, ch, cfg)) {
      Eigen::SelfAdjointEigenSolver<CMat> es(ls.Z, Eigen::EigenvaluesOnly);
      EXPECT_GE(es.eigenvalues().minCoeff(), cfg.noise_var * (1.0 - 1e-12));
      EXPECT_LT((ls.Z - ls.Z.adjoint()).norm(), 1e-12 * ls.Z.norm());
    }
  }
}

TEST(ValidateState, RejectsMismatchedShapes) {
  const ScenarioConfig cfg = reference_scenario();
  const ChannelSet ch = draw_channels(cfg, 1);
  Rng rng(2);
  const SystemState good = fixture::random_state(cfg, ch, rng);
  EXPECT_NO_THROW(validate_state(good, cfg));
  SystemState bad = good;
  bad.V.pop_back();
  EXPECT_THROW(validate_state(bad, cfg), ModelError);
  bad = good;
  bad.G[1] = CMat::Zero(3, 3);
  EXPECT_THROW(validate_state(bad, cfg), ModelError);
  bad = good;
  bad.U[5] = CVec::Zero(3);
  EXPECT_THROW(validate_state(bad, cfg), ModelError);
  bad = good;
  bad.V[0] = CMat::Zero(3, 2);
  EXPECT_THROW(sum_rate(bad, ch, cfg), ModelError);
  ScenarioConfig single = cfg;
  single.mode = Mode::kSingleHop;
  EXPECT_THROW(validate_state(good, single), ModelError);
}
