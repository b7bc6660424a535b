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

// Multi-convex surrogate of the sum rate.
//
// For MS m with receive filter u, useful link q and covariance Z, the
// weighted estimation error
//
//     g(w) = E|d_hat - w d|^2 = P_d |u^H q - w|^2 + u^H Z u
//
// is convex in each of V, G and u separately. The ratio
//
//     eta(w) = P_d |w|^2 / g(w)
//
// peaks at w_opt = (P_d |u^H q|^2 + u^H Z u) / (P_d q^H u) with value
// 1 + SINR, and the objective
//
//     b(w, t) = sum_m log2(P_d |w_m|^2) + log2(t_m) - t_m g_m(w_m) / ln 2
//
// is concave in t with maximizer t_m = 1 / g_m(w_m). Substituting that t
// gives b = sum_m log2 eta_m(w_m) - KM / ln 2, so maximizing b blockwise
// maximizes the sum rate.

#ifndef MCSR_SURROGATE_HPP
#define MCSR_SURROGATE_HPP

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "mcsr/model.hpp"
#include "mcsr/types.hpp"

namespace mcsr {

// Per-MS scaling factors: w complex, t strictly positive.
struct AuxState {
  CVec w;
  RVec t;

  static AuxState ones(int num_ms) {
    return {CVec::Ones(num_ms), RVec::Ones(num_ms)};
  }
};

// ---- forms on precomputed link statistics --------------------------------

inline double g_value(const LinkStats &ls, const CVec &u, cplx w, double symbol_power) {
  return symbol_power * std::norm(u.dot(ls.q) - w) + u.dot(ls.Z * u).real();
}

inline double eta(const LinkStats &ls, const CVec &u, cplx w, double symbol_power) {
  return symbol_power * std::norm(w) / g_value(ls, u, w, symbol_power);
}

// Useful links with SINR below this are treated as switched off: their
// optimal scaling factor would overflow long before the link reaches zero.
inline constexpr double kDegenerateSinr = 1e-20;

// Throws DegenerateLinkError when u^H q = 0 or the SINR is below
// kDegenerateSinr.
inline cplx w_opt(const LinkStats &ls, const CVec &u, double symbol_power) {
  const cplx a = u.dot(ls.q);  // u^H q
  const double noise = u.dot(ls.Z * u).real();
  if (a == cplx(0.0, 0.0) || symbol_power * std::norm(a) <= kDegenerateSinr * noise)
    throw DegenerateLinkError("receive filter orthogonal to the useful link");
  const double num = symbol_power * std::norm(a) + noise;
  const cplx w = num / (symbol_power * std::conj(a));
  if (!std::isfinite(w.real()) || !std::isfinite(w.imag()))
    throw DegenerateLinkError("optimal scaling factor overflows");
  return w;
}

inline double t_opt(const LinkStats &ls, const CVec &u, cplx w, double symbol_power) {
  return 1.0 / g_value(ls, u, w, symbol_power);
}

// One MS's term of b.
inline double b_term(const LinkStats &ls, const CVec &u, cplx w, double t, double symbol_power) {
  if (!(t > 0.0)) throw std::domain_error("b: scaling factor t must be > 0");
  if (w == cplx(0.0, 0.0)) throw std::domain_error("b: scaling factor w must be nonzero");
  return std::log2(symbol_power * std::norm(w)) + std::log2(t) -
         t * g_value(ls, u, w, symbol_power) / kLn2;
}

// ---- per-MS operations on a full state -----------------------------------

inline double g_value(int m, const SystemState &state, const ChannelSet &ch,
                      const ScenarioConfig &cfg, cplx w) {
  return g_value(link_stats(m, state, ch, cfg), state.U[static_cast<std::size_t>(m)], w,
                 cfg.symbol_power);
}

inline double eta(int m, const SystemState &state, const ChannelSet &ch,
                  const ScenarioConfig &cfg, cplx w) {
  return eta(link_stats(m, state, ch, cfg), state.U[static_cast<std::size_t>(m)], w,
             cfg.symbol_power);
}

inline cplx w_opt(int m, const SystemState &state, const ChannelSet &ch,
                  const ScenarioConfig &cfg) {
  return w_opt(link_stats(m, state, ch, cfg), state.U[static_cast<std::size_t>(m)],
               cfg.symbol_power);
}

inline double t_opt(int m, const SystemState &state, const ChannelSet &ch,
                    const ScenarioConfig &cfg, cplx w) {
  return t_opt(link_stats(m, state, ch, cfg), state.U[static_cast<std::size_t>(m)], w,
               cfg.symbol_power);
}

inline void check_aux(const AuxState &aux, const ScenarioConfig &cfg) {
  if (aux.w.size() != cfg.num_ms() || aux.t.size() != cfg.num_ms())
    throw ModelError("aux state must hold K*M scaling factors");
}

inline double b_objective(const std::vector<LinkStats> &stats, const SystemState &state,
                          const AuxState &aux, const ScenarioConfig &cfg) {
  check_aux(aux, cfg);
  double b = 0.0;
  for (int m = 0; m < cfg.num_ms(); ++m) {
    const auto i = static_cast<std::size_t>(m);
    b += b_term(stats[i], state.U[i], aux.w(m), aux.t(m), cfg.symbol_power);
  }
  return b;
}

inline double b_objective(const SystemState &state, const AuxState &aux, const ChannelSet &ch,
                          const ScenarioConfig &cfg) {
  return b_objective(all_link_stats(state, ch, cfg), state, aux, cfg);
}

// sum_m (t_m / ln 2) g_m(w_m): the part of -b that depends on V, G and U.
inline double weighted_error(const std::vector<LinkStats> &stats, const SystemState &state,
                             const AuxState &aux, const ScenarioConfig &cfg) {
  check_aux(aux, cfg);
  double s = 0.0;
  for (int m = 0; m < cfg.num_ms(); ++m) {
    const auto i = static_cast<std::size_t>(m);
    s += aux.t(m) / kLn2 * g_value(stats[i], state.U[i], aux.w(m), cfg.symbol_power);
  }
  return s;
}

inline double weighted_error(const SystemState &state, const AuxState &aux, const ChannelSet &ch,
                             const ScenarioConfig &cfg) {
  return weighted_error(all_link_stats(state, ch, cfg), state, aux, cfg);
}

// Joint (w, t) block update: w_m <- w_opt, then t_m <- 1 / g_m(w_m). An MS
// whose filter is orthogonal to its useful link keeps its previous w.
// Returns the number of such degenerate MSs.
inline int update_scaling(const std::vector<LinkStats> &stats, const SystemState &state,
                          const ScenarioConfig &cfg, AuxState &aux) {
  check_aux(aux, cfg);
  int degenerate = 0;
  for (int m = 0; m < cfg.num_ms(); ++m) {
    const auto i = static_cast<std::size_t>(m);
    try {
      aux.w(m) = w_opt(stats[i], state.U[i], cfg.symbol_power);
    } catch (const DegenerateLinkError &) {
      ++degenerate;
    }
    aux.t(m) = t_opt(stats[i], state.U[i], aux.w(m), cfg.symbol_power);
  }
  return degenerate;
}

}  // namespace mcsr

#endif  // MCSR_SURROGATE_HPP
