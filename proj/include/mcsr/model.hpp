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

// Linear signal model of the downlink: effective links, interference-plus-
// noise covariances, SINR, sum rate and transmit powers. All expectations
// are closed form (uncorrelated symbols of power P_d, white noise of
// variance sigma^2 at relays and MSs).

#ifndef MCSR_MODEL_HPP
#define MCSR_MODEL_HPP

#include <cmath>
#include <cstddef>
#include <vector>

#include "mcsr/scenario.hpp"
#include "mcsr/types.hpp"

namespace mcsr {

// Transmit filters V[k] (N_B x M), relay matrices G[r] (N_R x N_R, empty in
// single-hop mode) and receive filters U[m] (N_M).
struct SystemState {
  std::vector<CMat> V;
  std::vector<CMat> G;
  std::vector<CVec> U;
};

inline void validate_state(const SystemState &s, const ScenarioConfig &cfg) {
  if (s.V.size() != static_cast<std::size_t>(cfg.cells))
    throw ModelError("state: expected " + std::to_string(cfg.cells) + " transmit filters");
  for (const auto &v : s.V)
    if (v.rows() != cfg.bs_antennas || v.cols() != cfg.ms_per_cell)
      throw ModelError("state: transmit filter must be N_B x M");
  if (cfg.two_hop()) {
    if (s.G.size() != static_cast<std::size_t>(cfg.relays))
      throw ModelError("state: expected " + std::to_string(cfg.relays) + " relay matrices");
    for (const auto &g : s.G)
      if (g.rows() != cfg.relay_antennas || g.cols() != cfg.relay_antennas)
        throw ModelError("state: relay matrix must be N_R x N_R");
  } else if (!s.G.empty()) {
    throw ModelError("state: relay matrices given in single-hop mode");
  }
  if (s.U.size() != static_cast<std::size_t>(cfg.num_ms()))
    throw ModelError("state: expected " + std::to_string(cfg.num_ms()) + " receive filters");
  for (const auto &u : s.U)
    if (u.size() != cfg.ms_antennas) throw ModelError("state: receive filter must have N_M entries");
}

// Effective BS-to-MS channels for fixed relay processing.
struct EffectiveLinks {
  // channel[m*K + l]: N_M x N_B, sum_r H_MR^(m,r) G^(r) H_RB^(r,l) (two-hop)
  // or H_MB^(m,l) (single-hop).
  std::vector<CMat> channel;
  // relay_noise[m]: sigma^2 sum_r (H_MR^(m,r) G^(r)) (H_MR^(m,r) G^(r))^H,
  // zero in single-hop mode.
  std::vector<CMat> relay_noise;
  int cells = 0;

  const CMat &at(int m, int l) const {
    return channel[static_cast<std::size_t>(m) * static_cast<std::size_t>(cells) +
                   static_cast<std::size_t>(l)];
  }
};

inline EffectiveLinks effective_links(const std::vector<CMat> &G, const ChannelSet &ch,
                                      const ScenarioConfig &cfg) {
  ch.check_against(cfg);
  const int K = cfg.cells;
  const int KM = cfg.num_ms();
  const int nm = cfg.ms_antennas;
  EffectiveLinks out;
  out.cells = K;
  out.channel.reserve(static_cast<std::size_t>(KM * K));
  out.relay_noise.assign(static_cast<std::size_t>(KM), CMat::Zero(nm, nm));
  if (!cfg.two_hop()) {
    for (int m = 0; m < KM; ++m)
      for (int l = 0; l < K; ++l) out.channel.push_back(ch.ms_from_bs(m, l));
    return out;
  }
  if (G.size() != static_cast<std::size_t>(cfg.relays))
    throw ModelError("expected " + std::to_string(cfg.relays) + " relay matrices");
  for (int m = 0; m < KM; ++m) {
    for (int l = 0; l < K; ++l) out.channel.push_back(CMat::Zero(nm, cfg.bs_antennas));
    auto &noise = out.relay_noise[static_cast<std::size_t>(m)];
    for (int r = 0; r < cfg.relays; ++r) {
      const auto &g = G[static_cast<std::size_t>(r)];
      if (g.rows() != cfg.relay_antennas || g.cols() != cfg.relay_antennas)
        throw ModelError("relay matrix must be N_R x N_R");
      const CMat eg = ch.ms_from_relay(m, r) * g;
      noise.noalias() += cfg.noise_var * eg * eg.adjoint();
      for (int l = 0; l < K; ++l)
        out.channel[static_cast<std::size_t>(m * K + l)].noalias() += eg * ch.relay_from_bs(r, l);
    }
  }
  return out;
}

// Effective useful link q and interference-plus-noise covariance Z = E[z z^H]
// seen by one MS.
struct LinkStats {
  CVec q;
  CMat Z;
};

inline LinkStats link_stats(int m, const std::vector<CMat> &V, const EffectiveLinks &links,
                            const ScenarioConfig &cfg) {
  const int k = serving_bs(m, cfg);
  const int j = stream_index(m, cfg);
  const int nm = cfg.ms_antennas;
  LinkStats out;
  out.Z = CMat::Identity(nm, nm) * cfg.noise_var + links.relay_noise[static_cast<std::size_t>(m)];
  for (int l = 0; l < cfg.cells; ++l) {
    const CMat y = links.at(m, l) * V[static_cast<std::size_t>(l)];
    for (int i = 0; i < cfg.ms_per_cell; ++i) {
      if (l == k && i == j) {
        out.q = y.col(i);
        continue;
      }
      out.Z.noalias() += cfg.symbol_power * y.col(i) * y.col(i).adjoint();
    }
  }
  return out;
}

inline LinkStats link_stats(int m, const SystemState &state, const ChannelSet &ch,
                            const ScenarioConfig &cfg) {
  validate_state(state, cfg);
  return link_stats(m, state.V, effective_links(state.G, ch, cfg), cfg);
}

inline std::vector<LinkStats> all_link_stats(const SystemState &state, const ChannelSet &ch,
                                             const ScenarioConfig &cfg) {
  validate_state(state, cfg);
  const auto links = effective_links(state.G, ch, cfg);
  std::vector<LinkStats> out;
  out.reserve(static_cast<std::size_t>(cfg.num_ms()));
  for (int m = 0; m < cfg.num_ms(); ++m) out.push_back(link_stats(m, state.V, links, cfg));
  return out;
}

// SINR after receive filter u. A zero filter yields 0.
inline double sinr(const LinkStats &ls, const CVec &u, double symbol_power) {
  const double noise = u.dot(ls.Z * u).real();
  if (!(noise > 0.0)) return 0.0;
  return symbol_power * std::norm(u.dot(ls.q)) / noise;
}

inline double sinr(int m, const SystemState &state, const ChannelSet &ch,
                   const ScenarioConfig &cfg) {
  return sinr(link_stats(m, state, ch, cfg), state.U[static_cast<std::size_t>(m)],
              cfg.symbol_power);
}

// Sum over MSs of log2(1 + SINR), bits per channel use.
inline double sum_rate(const SystemState &state, const ChannelSet &ch, const ScenarioConfig &cfg) {
  const auto stats = all_link_stats(state, ch, cfg);
  double c = 0.0;
  for (int m = 0; m < cfg.num_ms(); ++m)
    c += std::log2(1.0 + sinr(stats[static_cast<std::size_t>(m)],
                              state.U[static_cast<std::size_t>(m)], cfg.symbol_power));
  return c;
}

// Two-hop transmission occupies two time slots per symbol.
inline double rate_per_slot(double sum_rate_bits, const ScenarioConfig &cfg) {
  return cfg.two_hop() ? 0.5 * sum_rate_bits : sum_rate_bits;
}

inline double sum_rate_per_slot(const SystemState &state, const ChannelSet &ch,
                                const ScenarioConfig &cfg) {
  return rate_per_slot(sum_rate(state, ch, cfg), cfg);
}

// P_d * sum_k tr(V^(k) V^(k)^H).
inline double bs_power(const std::vector<CMat> &V, const ScenarioConfig &cfg) {
  double p = 0.0;
  for (const auto &v : V) p += v.squaredNorm();
  return cfg.symbol_power * p;
}

// Sum over relays of the transmit power tr E[s_R s_R^H]: forwarded BS signal
// plus forwarded relay noise.
inline double relay_power(const std::vector<CMat> &V, const std::vector<CMat> &G,
                          const ChannelSet &ch, const ScenarioConfig &cfg) {
  if (!cfg.two_hop()) return 0.0;
  if (G.size() != static_cast<std::size_t>(cfg.relays) ||
      V.size() != static_cast<std::size_t>(cfg.cells))
    throw ModelError("relay_power: state does not match configuration");
  double p = 0.0;
  for (int r = 0; r < cfg.relays; ++r) {
    const auto &g = G[static_cast<std::size_t>(r)];
    for (int k = 0; k < cfg.cells; ++k)
      p += cfg.symbol_power * (g * ch.relay_from_bs(r, k) * V[static_cast<std::size_t>(k)])
                                  .squaredNorm();
    p += cfg.noise_var * g.squaredNorm();
  }
  return p;
}

}  // namespace mcsr

#endif  // MCSR_MODEL_HPP
