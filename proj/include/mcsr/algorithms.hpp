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

// Iterative transceiver designs:
//   maximize_sum_rate  block ascent on the multi-concave surrogate b
//   minimize_sum_mse   same machinery with w = t = 1 held fixed
//   ia_leakage_min     alternating interference-leakage minimization

#ifndef MCSR_ALGORITHMS_HPP
#define MCSR_ALGORITHMS_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "mcsr/model.hpp"
#include "mcsr/qcqp.hpp"
#include "mcsr/scenario.hpp"
#include "mcsr/subsolvers.hpp"
#include "mcsr/surrogate.hpp"

namespace mcsr {

struct RunOptions {
  double epsilon = 1e-4;  // stop when the objective changes by at most this
  int max_iters = 10000;
  std::uint64_t init_seed = 1;
  bool record_trace = true;

  void validate() const {
    if (!(epsilon > 0.0)) throw ConfigError("epsilon", "must be > 0");
    if (max_iters < 1) throw ConfigError("max_iters", "must be >= 1");
  }
};

struct IterationRecord {
  int iteration = 0;
  // b for maximize_sum_rate, sum MSE for minimize_sum_mse, normalized
  // leakage for ia_leakage_min.
  double objective = 0.0;
  double sum_rate = 0.0;           // bits per channel use
  double sum_rate_per_slot = 0.0;  // halved in two-hop mode
  double bs_power = 0.0;
  double relay_power = 0.0;
};

struct RunResult {
  SystemState final_state;
  AuxState final_aux;
  std::vector<IterationRecord> trace;  // entry 0 is the initial point
  int iterations_used = 0;
  bool converged = false;
};

enum class Algorithm { kMaxSumRate, kSumMse, kIa };

inline std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kMaxSumRate: return "maxsr";
    case Algorithm::kSumMse: return "summse";
    case Algorithm::kIa: return "ia";
  }
  return "?";
}

inline Algorithm parse_algorithm(std::string_view name) {
  if (name == "maxsr") return Algorithm::kMaxSumRate;
  if (name == "summse") return Algorithm::kSumMse;
  if (name == "ia") return Algorithm::kIa;
  throw ConfigError("algos", "unknown algorithm '" + std::string(name) + "'");
}

// Random start: unit-norm receive filters, transmit filters at full BS power
// and relay matrices at full relay power. Each component has its own
// substream of init_seed.
inline SystemState initial_state(const ChannelSet &ch, const ScenarioConfig &cfg,
                                 std::uint64_t init_seed) {
  SystemState s;
  Rng rng_u(substream_seed(init_seed, 11));
  Rng rng_v(substream_seed(init_seed, 12));
  Rng rng_g(substream_seed(init_seed, 13));
  for (int m = 0; m < cfg.num_ms(); ++m) {
    CVec u = complex_gaussian(cfg.ms_antennas, 1, rng_u).col(0);
    s.U.push_back(u / u.norm());
  }
  for (int k = 0; k < cfg.cells; ++k)
    s.V.push_back(complex_gaussian(cfg.bs_antennas, cfg.ms_per_cell, rng_v));
  const double vs = std::sqrt(cfg.bs_power_budget / bs_power(s.V, cfg));
  for (auto &v : s.V) v *= vs;
  if (cfg.two_hop()) {
    for (int r = 0; r < cfg.relays; ++r)
      s.G.push_back(complex_gaussian(cfg.relay_antennas, cfg.relay_antennas, rng_g));
    const double gs = std::sqrt(cfg.relay_power_budget / relay_power(s.V, s.G, ch, cfg));
    for (auto &g : s.G) g *= gs;
  }
  return s;
}

namespace detail {

inline IterationRecord make_record(int it, double objective, const SystemState &s,
                                   const std::vector<LinkStats> &stats, const ChannelSet &ch,
                                   const ScenarioConfig &cfg) {
  IterationRecord rec;
  rec.iteration = it;
  rec.objective = objective;
  for (int m = 0; m < cfg.num_ms(); ++m)
    rec.sum_rate += std::log2(1.0 + sinr(stats[static_cast<std::size_t>(m)],
                                         s.U[static_cast<std::size_t>(m)], cfg.symbol_power));
  rec.sum_rate_per_slot = rate_per_slot(rec.sum_rate, cfg);
  rec.bs_power = bs_power(s.V, cfg);
  rec.relay_power = relay_power(s.V, s.G, ch, cfg);
  return rec;
}

inline void check_inputs(const ChannelSet &ch, const ScenarioConfig &cfg, const RunOptions &opts) {
  cfg.validate();
  ch.check_against(cfg);
  opts.validate();
}

// One pass of U, V, (G) exact minimization of sum_m t_m g_m(w_m) / ln 2.
// A block whose QCQP has no strictly feasible point keeps its value.
inline void weighted_error_pass(SystemState &s, const AuxState &aux,
                                const std::vector<LinkStats> &stats, const ChannelSet &ch,
                                const ScenarioConfig &cfg) {
  s.U = mmse_receivers(stats, aux, cfg);
  try {
    s.V = unstack_V(qcqp_solve(assemble_V_problem(s, aux, ch, cfg)).x, cfg);
  } catch (const SolverError &) {
  }
  if (cfg.two_hop()) {
    try {
      s.G = unstack_G(qcqp_solve(assemble_G_problem(s, aux, ch, cfg)).x, cfg);
    } catch (const SolverError &) {
    }
  }
}

inline double sum_mse(const std::vector<LinkStats> &stats, const SystemState &s,
                      const ScenarioConfig &cfg) {
  double e = 0.0;
  for (int m = 0; m < cfg.num_ms(); ++m)
    e += g_value(stats[static_cast<std::size_t>(m)], s.U[static_cast<std::size_t>(m)],
                 cplx(1.0, 0.0), cfg.symbol_power);
  return e;
}

}  // namespace detail

// Block ascent on b: per iteration U (MMSE), V (QCQP), G (QCQP, two-hop),
// then the scaling block (w, t) maximized jointly, w_opt first and t from
// the new w. Stops when |b_i - b_{i-1}| <= epsilon.
inline RunResult maximize_sum_rate(const ChannelSet &ch, const ScenarioConfig &cfg,
                                   const RunOptions &opts) {
  detail::check_inputs(ch, cfg, opts);
  RunResult res;
  SystemState s = initial_state(ch, cfg, opts.init_seed);
  AuxState aux = AuxState::ones(cfg.num_ms());
  auto stats = all_link_stats(s, ch, cfg);
  double prev = b_objective(stats, s, aux, cfg);
  if (opts.record_trace) res.trace.push_back(detail::make_record(0, prev, s, stats, ch, cfg));

  for (int it = 1; it <= opts.max_iters; ++it) {
    detail::weighted_error_pass(s, aux, stats, ch, cfg);
    stats = all_link_stats(s, ch, cfg);
    update_scaling(stats, s, cfg, aux);
    const double b = b_objective(stats, s, aux, cfg);
    if (opts.record_trace) res.trace.push_back(detail::make_record(it, b, s, stats, ch, cfg));
    res.iterations_used = it;
    const bool done = std::abs(b - prev) <= opts.epsilon;
    prev = b;
    if (done) {
      res.converged = true;
      break;
    }
  }
  if (!opts.record_trace) res.trace.push_back(detail::make_record(res.iterations_used, prev, s, stats, ch, cfg));
  res.final_state = std::move(s);
  res.final_aux = std::move(aux);
  return res;
}

// Alternating sum-MSE minimization: the same block updates with w = t = 1.
inline RunResult minimize_sum_mse(const ChannelSet &ch, const ScenarioConfig &cfg,
                                  const RunOptions &opts) {
  detail::check_inputs(ch, cfg, opts);
  RunResult res;
  SystemState s = initial_state(ch, cfg, opts.init_seed);
  const AuxState aux = AuxState::ones(cfg.num_ms());
  auto stats = all_link_stats(s, ch, cfg);
  double prev = detail::sum_mse(stats, s, cfg);
  if (opts.record_trace) res.trace.push_back(detail::make_record(0, prev, s, stats, ch, cfg));

  for (int it = 1; it <= opts.max_iters; ++it) {
    detail::weighted_error_pass(s, aux, stats, ch, cfg);
    stats = all_link_stats(s, ch, cfg);
    const double mse = detail::sum_mse(stats, s, cfg);
    if (opts.record_trace) res.trace.push_back(detail::make_record(it, mse, s, stats, ch, cfg));
    res.iterations_used = it;
    const bool done = std::abs(mse - prev) <= opts.epsilon;
    prev = mse;
    if (done) {
      res.converged = true;
      break;
    }
  }
  if (!opts.record_trace) res.trace.push_back(detail::make_record(res.iterations_used, prev, s, stats, ch, cfg));
  res.final_state = std::move(s);
  res.final_aux = aux;
  return res;
}

namespace detail {

// argmin x^H A x subject to C^H x = d, for Hermitian PSD A. Minimum-norm
// solution of the KKT system; empty when the constraints cannot be met.
inline std::optional<CVec> constrained_least_squares(const CMat &A, const CMat &C,
                                                     const CVec &d) {
  const Eigen::Index n = A.rows();
  const Eigen::Index p = C.cols();
  CMat kkt = CMat::Zero(n + p, n + p);
  kkt.topLeftCorner(n, n) = A;
  kkt.topRightCorner(n, p) = C;
  kkt.bottomLeftCorner(p, n) = C.adjoint();
  CVec rhs = CVec::Zero(n + p);
  rhs.tail(p) = d;
  const CVec sol = Eigen::CompleteOrthogonalDecomposition<CMat>(kkt).solve(rhs);
  CVec x = sol.head(n);
  if (!x.allFinite() || (C.adjoint() * x - d).norm() > 1e-8 * std::max(1.0, d.norm()))
    return std::nullopt;
  return x;
}

// Interference-only covariance of MS m (no relay or MS noise).
inline CMat interference_cov(int m, const std::vector<CMat> &V, const EffectiveLinks &links,
                             const ScenarioConfig &cfg) {
  const int k = serving_bs(m, cfg);
  const int j = stream_index(m, cfg);
  CMat Q = CMat::Zero(cfg.ms_antennas, cfg.ms_antennas);
  for (int l = 0; l < cfg.cells; ++l) {
    const CMat y = links.at(m, l) * V[static_cast<std::size_t>(l)];
    for (int i = 0; i < cfg.ms_per_cell; ++i)
      if (l != k || i != j) Q.noalias() += cfg.symbol_power * y.col(i) * y.col(i).adjoint();
  }
  return Q;
}

// sum_m u_m^H Q_m u_m / (P_d |u_m^H q_m|^2): total leakage measured against
// the useful gains. Invariant to scaling of any V, G or u_m; +inf when a
// useful gain is zero.
inline double normalized_leakage(const SystemState &s, const ChannelSet &ch,
                                 const ScenarioConfig &cfg) {
  const auto links = effective_links(s.G, ch, cfg);
  double L = 0.0;
  for (int m = 0; m < cfg.num_ms(); ++m) {
    const CVec &u = s.U[static_cast<std::size_t>(m)];
    const LinkStats ls = link_stats(m, s.V, links, cfg);
    const double useful = cfg.symbol_power * std::norm(u.dot(ls.q));
    const double leak = u.dot(interference_cov(m, s.V, links, cfg) * u).real();
    L += useful > 0.0 ? leak / useful : std::numeric_limits<double>::infinity();
  }
  return L;
}

// Common rescale of V to full BS power, G to full relay power, U to unit
// norm. Leaves every SINR ratio between links, and so the normalized
// leakage, unchanged.
inline SystemState scale_to_budgets(SystemState s, const ChannelSet &ch,
                                    const ScenarioConfig &cfg) {
  const double vs = std::sqrt(cfg.bs_power_budget / bs_power(s.V, cfg));
  for (auto &v : s.V) v *= vs;
  if (cfg.two_hop()) {
    const double gs = std::sqrt(cfg.relay_power_budget / relay_power(s.V, s.G, ch, cfg));
    for (auto &g : s.G) g *= gs;
  }
  for (auto &u : s.U) u /= u.norm();
  return s;
}

// Relay-entry vector h with u^H H_MR G H_RB v = h^H g for stacked g.
inline CVec relay_response(const std::vector<CVec> &p, const std::vector<CVec> &heard,
                           int relay_antennas) {
  const Eigen::Index nr = relay_antennas;
  const Eigen::Index blk = nr * nr;
  CVec h(static_cast<Eigen::Index>(p.size()) * blk);
  for (std::size_t r = 0; r < p.size(); ++r)
    for (Eigen::Index col = 0; col < nr; ++col)
      h.segment(static_cast<Eigen::Index>(r) * blk + col * nr, nr) =
          std::conj(heard[r](col)) * p[r];
  return h;
}

}  // namespace detail

// Alternating leakage minimization. Every useful gain u_m^H q_m is pinned to
// 1 and each block minimizes the total leakage exactly over that affine set:
//   u_m      argmin u^H Q_m u          s.t. u^H q_m = 1
//   v^(l,i)  argmin of its leakage     s.t. own useful gain = 1
//   G        argmin of total leakage   s.t. all KM useful gains = 1
// The current point stays feasible, so the normalized leakage never
// increases. The reported state is the iterate rescaled to full BS and relay
// power with unit-norm receive filters.
inline RunResult ia_leakage_min(const ChannelSet &ch, const ScenarioConfig &cfg,
                                const RunOptions &opts) {
  detail::check_inputs(ch, cfg, opts);
  const int K = cfg.cells;
  const int M = cfg.ms_per_cell;
  const int KM = cfg.num_ms();
  const double P = cfg.symbol_power;
  const CVec one = CVec::Ones(1);

  RunResult res;
  SystemState x = initial_state(ch, cfg, opts.init_seed);
  SystemState s = x;

  auto record = [&](int it, double L) {
    const auto stats = all_link_stats(s, ch, cfg);
    res.trace.push_back(detail::make_record(it, L, s, stats, ch, cfg));
  };
  double prev = detail::normalized_leakage(s, ch, cfg);
  if (opts.record_trace) record(0, prev);

  for (int it = 1; it <= opts.max_iters; ++it) {
    // Receive filters.
    {
      const auto links = effective_links(x.G, ch, cfg);
      for (int m = 0; m < KM; ++m) {
        const LinkStats ls = link_stats(m, x.V, links, cfg);
        if (auto u = detail::constrained_least_squares(
                detail::interference_cov(m, x.V, links, cfg), ls.q, one))
          x.U[static_cast<std::size_t>(m)] = *u;
      }
    }
    // Transmit filters, stream by stream.
    {
      const auto links = effective_links(x.G, ch, cfg);
      for (int l = 0; l < K; ++l) {
        for (int i = 0; i < M; ++i) {
          const int own = l * M + i;
          CMat A = CMat::Zero(cfg.bs_antennas, cfg.bs_antennas);
          CVec a_own;
          for (int m = 0; m < KM; ++m) {
            const CVec a = links.at(m, l).adjoint() * x.U[static_cast<std::size_t>(m)];
            if (m == own)
              a_own = a;
            else
              A.noalias() += P * a * a.adjoint();
          }
          if (auto v = detail::constrained_least_squares(A, a_own, one))
            x.V[static_cast<std::size_t>(l)].col(i) = *v;
        }
      }
    }
    // Relay matrices.
    if (cfg.two_hop()) {
      const int R = cfg.relays;
      const int nr = cfg.relay_antennas;
      const Eigen::Index n = static_cast<Eigen::Index>(R) * nr * nr;
      CMat A = CMat::Zero(n, n);
      CMat C(n, KM);
      std::vector<CVec> p(static_cast<std::size_t>(R));
      std::vector<CVec> heard(static_cast<std::size_t>(R));
      for (int m = 0; m < KM; ++m) {
        for (int r = 0; r < R; ++r)
          p[static_cast<std::size_t>(r)] =
              ch.ms_from_relay(m, r).adjoint() * x.U[static_cast<std::size_t>(m)];
        for (int l = 0; l < K; ++l) {
          for (int i = 0; i < M; ++i) {
            for (int r = 0; r < R; ++r)
              heard[static_cast<std::size_t>(r)] =
                  ch.relay_from_bs(r, l) * x.V[static_cast<std::size_t>(l)].col(i);
            const CVec h = detail::relay_response(p, heard, nr);
            if (l * M + i == m)
              C.col(m) = h;
            else
              A.noalias() += P * h * h.adjoint();
          }
        }
      }
      if (auto g = detail::constrained_least_squares(A, C, CVec::Ones(KM)))
        x.G = unstack_G(*g, cfg);
    }

    s = detail::scale_to_budgets(x, ch, cfg);
    const double L = detail::normalized_leakage(s, ch, cfg);
    if (opts.record_trace) record(it, L);
    res.iterations_used = it;
    const bool done = std::abs(L - prev) <= opts.epsilon;
    prev = L;
    if (done) {
      res.converged = true;
      break;
    }
  }
  if (!opts.record_trace) record(res.iterations_used, prev);
  res.final_state = std::move(s);
  res.final_aux = AuxState::ones(KM);
  return res;
}

inline RunResult run_algorithm(Algorithm alg, const ChannelSet &ch, const ScenarioConfig &cfg,
                               const RunOptions &opts) {
  switch (alg) {
    case Algorithm::kMaxSumRate: return maximize_sum_rate(ch, cfg, opts);
    case Algorithm::kSumMse: return minimize_sum_mse(ch, cfg, opts);
    case Algorithm::kIa: return ia_leakage_min(ch, cfg, opts);
  }
  throw ConfigError("algos", "unknown algorithm");
}

}  // namespace mcsr

#endif  // MCSR_ALGORITHMS_HPP
