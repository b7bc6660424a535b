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

// Random instances shared by the unit tests and the acceptance suite.

#ifndef MCSR_TESTS_FIXTURES_HPP
#define MCSR_TESTS_FIXTURES_HPP

#include <cmath>
#include <cstdint>
#include <random>

#include "mcsr/model.hpp"
#include "mcsr/qcqp.hpp"
#include "mcsr/scenario.hpp"
#include "mcsr/surrogate.hpp"

namespace fixture {

using mcsr::CMat;
using mcsr::cplx;
using mcsr::CVec;

inline CMat gaussian(Eigen::Index r, Eigen::Index c, mcsr::Rng &rng) {
  return mcsr::complex_gaussian(r, c, rng);
}

// Random state with V at full BS power, G at full relay power, random U.
inline mcsr::SystemState random_state(const mcsr::ScenarioConfig &cfg, const mcsr::ChannelSet &ch,
                                      mcsr::Rng &rng) {
  mcsr::SystemState s;
  for (int k = 0; k < cfg.cells; ++k) s.V.push_back(gaussian(cfg.bs_antennas, cfg.ms_per_cell, rng));
  const double vs = std::sqrt(cfg.bs_power_budget / mcsr::bs_power(s.V, cfg));
  for (auto &v : s.V) v *= vs;
  if (cfg.two_hop()) {
    for (int r = 0; r < cfg.relays; ++r)
      s.G.push_back(gaussian(cfg.relay_antennas, cfg.relay_antennas, rng));
    const double gs = std::sqrt(cfg.relay_power_budget / mcsr::relay_power(s.V, s.G, ch, cfg));
    for (auto &g : s.G) g *= gs;
  }
  for (int m = 0; m < cfg.num_ms(); ++m) s.U.push_back(gaussian(cfg.ms_antennas, 1, rng).col(0));
  return s;
}

inline mcsr::AuxState random_aux(const mcsr::ScenarioConfig &cfg, mcsr::Rng &rng) {
  std::uniform_real_distribution<double> pos(0.1, 3.0);
  mcsr::AuxState aux = mcsr::AuxState::ones(cfg.num_ms());
  for (int m = 0; m < cfg.num_ms(); ++m) {
    aux.w(m) = gaussian(1, 1, rng)(0, 0) * 2.0;
    aux.t(m) = pos(rng);
  }
  return aux;
}

// Convex QCQP of dimension n with 1 or 2 constraints. The first constraint
// is positive definite; the second (if any) is PSD and may be rank
// deficient. Budgets are set relative to the unconstrained minimizer so that
// constraints are active in some instances and slack in others.
inline mcsr::QcqpProblem random_qcqp(int n, int constraints, mcsr::Rng &rng) {
  std::uniform_int_distribution<int> rank_dist(1, n);
  std::uniform_real_distribution<double> frac(0.05, 1.6);
  mcsr::QcqpProblem p;
  const CMat W = gaussian(n, rank_dist(rng), rng);
  p.objective.A = W * W.adjoint() / n + 0.1 * CMat::Identity(n, n);
  p.objective.b = gaussian(n, 1, rng).col(0) * 3.0;
  p.objective.c = 1.0;
  const CVec x0 = p.objective.A.llt().solve(p.objective.b);
  for (int i = 0; i < constraints; ++i) {
    mcsr::QuadraticConstraint con;
    if (i == 0) {
      const CMat B = gaussian(n, n, rng);
      con.form.A = B * B.adjoint() / n + 0.2 * CMat::Identity(n, n);
    } else {
      const CMat B = gaussian(n, rank_dist(rng), rng);
      con.form.A = B * B.adjoint() / n;
    }
    con.form.c = i == 1 ? 0.1 : 0.0;
    const double at_x0 = x0.dot(con.form.A * x0).real();
    con.budget = con.form.c + std::max(1e-3, frac(rng) * at_x0);
    p.constraints.push_back(std::move(con));
  }
  return p;
}

}  // namespace fixture

#endif  // MCSR_TESTS_FIXTURES_HPP
