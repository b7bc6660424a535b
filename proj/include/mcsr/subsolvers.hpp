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

// Exact block updates for sum_m (t_m / ln 2) g_m: closed-form MMSE receive
// filters, and the transmit-filter / relay-matrix blocks written as convex
// QCQPs over stacked variables.
//
// Stacking order is column-major inside each matrix, matrices in index
// order: x[(k*M + i)*N_B + row] = V^(k)(row, i) and
// x[r*N_R*N_R + col*N_R + row] = G^(r)(row, col).

#ifndef MCSR_SUBSOLVERS_HPP
#define MCSR_SUBSOLVERS_HPP

#include <cstddef>
#include <vector>

#include <Eigen/Cholesky>

#include "mcsr/model.hpp"
#include "mcsr/qcqp.hpp"
#include "mcsr/surrogate.hpp"

namespace mcsr {

// ---- stacking -------------------------------------------------------------

inline CVec stack(const std::vector<CMat> &blocks) {
  Eigen::Index n = 0;
  for (const auto &b : blocks) n += b.size();
  CVec x(n);
  Eigen::Index o = 0;
  for (const auto &b : blocks) {
    x.segment(o, b.size()) = b.reshaped();
    o += b.size();
  }
  return x;
}

inline std::vector<CMat> unstack(const CVec &x, std::size_t count, Eigen::Index rows,
                                 Eigen::Index cols) {
  if (x.size() != static_cast<Eigen::Index>(count) * rows * cols)
    throw ModelError("unstack: vector length does not match block shape");
  std::vector<CMat> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i)
    out.push_back(x.segment(static_cast<Eigen::Index>(i) * rows * cols, rows * cols)
                      .reshaped(rows, cols));
  return out;
}

inline std::vector<CMat> unstack_V(const CVec &x, const ScenarioConfig &cfg) {
  return unstack(x, static_cast<std::size_t>(cfg.cells), cfg.bs_antennas, cfg.ms_per_cell);
}

inline std::vector<CMat> unstack_G(const CVec &x, const ScenarioConfig &cfg) {
  return unstack(x, static_cast<std::size_t>(cfg.relays), cfg.relay_antennas,
                 cfg.relay_antennas);
}

// ---- receive filters ------------------------------------------------------

// u_m = (P_d q q^H + Z)^{-1} P_d conj(w_m) q for every MS.
inline std::vector<CVec> mmse_receivers(const std::vector<LinkStats> &stats, const AuxState &aux,
                                        const ScenarioConfig &cfg) {
  check_aux(aux, cfg);
  std::vector<CVec> U;
  U.reserve(stats.size());
  for (int m = 0; m < cfg.num_ms(); ++m) {
    const auto &ls = stats[static_cast<std::size_t>(m)];
    const CMat R = cfg.symbol_power * ls.q * ls.q.adjoint() + ls.Z;
    const CVec rhs = cfg.symbol_power * std::conj(aux.w(m)) * ls.q;
    U.push_back(R.llt().solve(rhs));
  }
  return U;
}

inline std::vector<CVec> mmse_receivers(const SystemState &state, const AuxState &aux,
                                        const ChannelSet &ch, const ScenarioConfig &cfg) {
  return mmse_receivers(all_link_stats(state, ch, cfg), aux, cfg);
}

// ---- transmit-filter block -----------------------------------------------

// Weighted error as a quadratic in the stacked transmit filters, subject to
// the BS sum power and (two-hop) the relay sum power for the current G.
inline QcqpProblem assemble_V_problem(const SystemState &state, const AuxState &aux,
                                      const ChannelSet &ch, const ScenarioConfig &cfg) {
  validate_state(state, cfg);
  check_aux(aux, cfg);
  const auto links = effective_links(state.G, ch, cfg);
  const int K = cfg.cells;
  const int M = cfg.ms_per_cell;
  const int nb = cfg.bs_antennas;
  const double P = cfg.symbol_power;
  const Eigen::Index n = static_cast<Eigen::Index>(K) * M * nb;
  auto offset = [&](int l, int i) { return static_cast<Eigen::Index>(l * M + i) * nb; };

  QcqpProblem prob;
  auto &obj = prob.objective;
  obj.A = CMat::Zero(n, n);
  obj.b = CVec::Zero(n);
  obj.c = 0.0;
  for (int m = 0; m < cfg.num_ms(); ++m) {
    const int k = serving_bs(m, cfg);
    const int j = stream_index(m, cfg);
    const double c = aux.t(m) / kLn2;
    const CVec &u = state.U[static_cast<std::size_t>(m)];
    for (int l = 0; l < K; ++l) {
      const CVec a = links.at(m, l).adjoint() * u;
      const CMat aa = (c * P) * a * a.adjoint();
      for (int i = 0; i < M; ++i) obj.A.block(offset(l, i), offset(l, i), nb, nb) += aa;
      if (l == k) obj.b.segment(offset(k, j), nb) += (c * P * aux.w(m)) * a;
    }
    obj.c += c * (P * std::norm(aux.w(m)) +
                  u.dot(links.relay_noise[static_cast<std::size_t>(m)] * u).real() +
                  cfg.noise_var * u.squaredNorm());
  }

  QuadraticConstraint bs;
  bs.form.A = CMat::Identity(n, n) * P;
  bs.budget = cfg.bs_power_budget;
  prob.constraints.push_back(std::move(bs));

  if (cfg.two_hop()) {
    QuadraticConstraint relay;
    relay.form.A = CMat::Zero(n, n);
    double noise = 0.0;
    for (int l = 0; l < K; ++l) {
      CMat block = CMat::Zero(nb, nb);
      for (int r = 0; r < cfg.relays; ++r) {
        const CMat gh = state.G[static_cast<std::size_t>(r)] * ch.relay_from_bs(r, l);
        block.noalias() += P * gh.adjoint() * gh;
      }
      for (int i = 0; i < M; ++i) relay.form.A.block(offset(l, i), offset(l, i), nb, nb) = block;
    }
    for (const auto &g : state.G) noise += cfg.noise_var * g.squaredNorm();
    relay.form.c = noise;
    relay.budget = cfg.relay_power_budget;
    prob.constraints.push_back(std::move(relay));
  }
  return prob;
}

// ---- relay block ----------------------------------------------------------

// Weighted error as a quadratic in the stacked relay matrices, subject to the
// relay sum power for the current V. Two-hop only.
inline QcqpProblem assemble_G_problem(const SystemState &state, const AuxState &aux,
                                      const ChannelSet &ch, const ScenarioConfig &cfg) {
  if (!cfg.two_hop()) throw UnsupportedModeError("relay block exists only in two-hop mode");
  validate_state(state, cfg);
  check_aux(aux, cfg);
  ch.check_against(cfg);
  const int K = cfg.cells;
  const int M = cfg.ms_per_cell;
  const int R = cfg.relays;
  const int nr = cfg.relay_antennas;
  const Eigen::Index blk = static_cast<Eigen::Index>(nr) * nr;
  const Eigen::Index n = R * blk;
  const double P = cfg.symbol_power;

  // y[(r*K + l)*M + i] = H_RB^(r,l) v^(l,i): what relay r hears of stream (l,i).
  std::vector<CVec> y;
  y.reserve(static_cast<std::size_t>(R * K * M));
  for (int r = 0; r < R; ++r)
    for (int l = 0; l < K; ++l)
      for (int i = 0; i < M; ++i)
        y.push_back(ch.relay_from_bs(r, l) * state.V[static_cast<std::size_t>(l)].col(i));
  auto heard = [&](int r, int l, int i) -> const CVec & {
    return y[static_cast<std::size_t>((r * K + l) * M + i)];
  };

  QcqpProblem prob;
  auto &obj = prob.objective;
  obj.A = CMat::Zero(n, n);
  obj.b = CVec::Zero(n);
  obj.c = 0.0;
  CVec h(n);
  std::vector<CVec> p(static_cast<std::size_t>(R));
  for (int m = 0; m < cfg.num_ms(); ++m) {
    const int k = serving_bs(m, cfg);
    const int j = stream_index(m, cfg);
    const double c = aux.t(m) / kLn2;
    const CVec &u = state.U[static_cast<std::size_t>(m)];
    for (int r = 0; r < R; ++r) p[static_cast<std::size_t>(r)] = ch.ms_from_relay(m, r).adjoint() * u;

    // u^H H_MR G H_RB v = h^H g with h_r[col*N_R + row] = conj(y_col) p_row.
    for (int l = 0; l < K; ++l) {
      for (int i = 0; i < M; ++i) {
        for (int r = 0; r < R; ++r) {
          const CVec &yy = heard(r, l, i);
          const CVec &pp = p[static_cast<std::size_t>(r)];
          for (int col = 0; col < nr; ++col)
            h.segment(r * blk + col * nr, nr) = std::conj(yy(col)) * pp;
        }
        obj.A.noalias() += (c * P) * h * h.adjoint();
        if (l == k && i == j) obj.b += (c * P * aux.w(m)) * h;
      }
    }
    // Forwarded relay noise: sigma^2 ||G^H p||^2 = sigma^2 g^H (I (x) p p^H) g.
    for (int r = 0; r < R; ++r) {
      const CVec &pp = p[static_cast<std::size_t>(r)];
      const CMat pp2 = (c * cfg.noise_var) * pp * pp.adjoint();
      for (int col = 0; col < nr; ++col)
        obj.A.block(r * blk + col * nr, r * blk + col * nr, nr, nr) += pp2;
    }
    obj.c += c * (P * std::norm(aux.w(m)) + cfg.noise_var * u.squaredNorm());
  }

  // tr(G S G^H) = g^H (conj(S) (x) I) g with S the relay receive covariance.
  QuadraticConstraint relay;
  relay.form.A = CMat::Zero(n, n);
  for (int r = 0; r < R; ++r) {
    CMat S = CMat::Identity(nr, nr) * cfg.noise_var;
    for (int l = 0; l < K; ++l) {
      const CMat hv = ch.relay_from_bs(r, l) * state.V[static_cast<std::size_t>(l)];
      S.noalias() += P * hv * hv.adjoint();
    }
    for (int col = 0; col < nr; ++col)
      for (int col2 = 0; col2 < nr; ++col2)
        relay.form.A.block(r * blk + col * nr, r * blk + col2 * nr, nr, nr).diagonal().setConstant(
            std::conj(S(col, col2)));
  }
  relay.budget = cfg.relay_power_budget;
  prob.constraints.push_back(std::move(relay));
  return prob;
}

}  // namespace mcsr

#endif  // MCSR_SUBSOLVERS_HPP
