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

// Convex complex QCQP with one or two quadratic constraints:
//
//     minimize    x^H A x - 2 Re(b^H x) + c
//     subject to  x^H A_i x + c_i <= budget_i,   i = 1..2
//
// with A, A_i Hermitian PSD. Solved through the Lagrangian dual: the primal
// minimizer for multipliers mu is x(mu) = (A + sum_i mu_i A_i)^+ b, and each
// constraint value is non-increasing in its own multiplier, so multipliers
// are found by bisection.
//
// With two constraints the second multiplier is bisected in an outer loop
// while the first is re-optimized exactly for every trial value; the outer
// derivative of the concave dual is the second constraint's excess, which is
// monotone. When a constraint matrix is positive definite it is used as the
// metric of a generalized eigendecomposition, so every inner evaluation of
// x(mu) is a diagonal solve. Problems whose matrices share a block-diagonal
// pattern (the transmit-filter block has one block per stream) are
// decomposed per block.

#ifndef MCSR_QCQP_HPP
#define MCSR_QCQP_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "mcsr/types.hpp"

namespace mcsr {

// x^H A x - 2 Re(b^H x) + c
struct QuadraticForm {
  CMat A;
  CVec b;
  double c = 0.0;

  Eigen::Index dim() const { return A.rows(); }

  double operator()(const CVec &x) const {
    double v = x.dot(A * x).real() + c;
    if (b.size() > 0) v -= 2.0 * b.dot(x).real();
    return v;
  }
};

// form(x) <= budget, with form.b empty or zero.
struct QuadraticConstraint {
  QuadraticForm form;
  double budget = 0.0;
};

struct QcqpProblem {
  QuadraticForm objective;
  std::vector<QuadraticConstraint> constraints;
};

struct QcqpResult {
  CVec x;
  std::vector<double> multipliers;  // one per constraint, >= 0
  double objective = 0.0;
};

namespace detail {

inline double hermitian_form(const CMat &A, const CVec &x) { return x.dot(A * x).real(); }

// Index sets of the diagonal blocks shared by a family of matrices: i and j
// fall in one block when any matrix has a nonzero (i, j) entry.
inline std::vector<std::vector<Eigen::Index>> block_partition(const std::vector<const CMat *> &mats,
                                                              Eigen::Index n) {
  std::vector<Eigen::Index> parent(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) parent[static_cast<std::size_t>(i)] = i;
  auto root = [&](Eigen::Index i) {
    while (parent[static_cast<std::size_t>(i)] != i)
      i = parent[static_cast<std::size_t>(i)] =
          parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(i)])];
    return i;
  };
  for (const CMat *m : mats)
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < j; ++i)
        if ((*m)(i, j) != cplx(0.0, 0.0) || (*m)(j, i) != cplx(0.0, 0.0)) {
          const Eigen::Index a = root(i), b = root(j);
          if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
        }
  std::vector<std::vector<Eigen::Index>> blocks;
  std::vector<long> slot(static_cast<std::size_t>(n), -1);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto r = static_cast<std::size_t>(root(i));
    if (slot[r] < 0) {
      slot[r] = static_cast<long>(blocks.size());
      blocks.emplace_back();
    }
    blocks[static_cast<std::size_t>(slot[r])].push_back(i);
  }
  return blocks;
}

// Solves (M + mu P) x = b for a fixed Hermitian PSD M, PD metric P and many
// mu >= 0, via M E = P E diag(lambda), E^H P E = I.
class PencilSolver {
 public:
  PencilSolver(const CMat &M, const CMat &P, const CVec &b) {
    const Eigen::LLT<CMat> metric(P);
    const CMat L = metric.matrixL().toDenseMatrix();
    // C = L^{-1} M L^{-H}
    CMat tmp = L.triangularView<Eigen::Lower>().solve(M);
    CMat C = L.triangularView<Eigen::Lower>().solve(tmp.adjoint()).adjoint();
    C = 0.5 * (C + C.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<CMat> es(C);
    lambda_ = es.eigenvalues();
    basis_ = L.adjoint().triangularView<Eigen::Upper>().solve(es.eigenvectors());
    coeff_ = basis_.adjoint() * b;
    scale_ = std::max(lambda_.cwiseAbs().maxCoeff(), 1e-300);
  }

  CVec solve(double mu) const { return basis_ * weights(mu); }

  // x(mu)^H P x(mu)
  double metric_value(double mu) const { return weights(mu).squaredNorm(); }

 private:
  CVec weights(double mu) const {
    CVec out(coeff_.size());
    const double floor = 1e-13 * std::max(scale_, mu);
    for (Eigen::Index i = 0; i < coeff_.size(); ++i) {
      const double d = lambda_(i) + mu;
      out(i) = d > floor ? coeff_(i) / d : cplx(0.0, 0.0);
    }
    return out;
  }

  RVec lambda_;
  CMat basis_;
  CVec coeff_;
  double scale_;
};

// One PencilSolver per diagonal block.
class BlockPencil {
 public:
  BlockPencil(const CMat &M, const CMat &P, const CVec &b,
              const std::vector<std::vector<Eigen::Index>> &blocks)
      : blocks_(blocks), n_(b.size()) {
    parts_.reserve(blocks.size());
    for (const auto &idx : blocks) parts_.emplace_back(M(idx, idx), P(idx, idx), b(idx));
  }

  CVec solve(double mu) const {
    CVec x(n_);
    for (std::size_t i = 0; i < parts_.size(); ++i) x(blocks_[i]) = parts_[i].solve(mu);
    return x;
  }

  double metric_value(double mu) const {
    double v = 0.0;
    for (const auto &p : parts_) v += p.metric_value(mu);
    return v;
  }

 private:
  const std::vector<std::vector<Eigen::Index>> &blocks_;
  Eigen::Index n_;
  std::vector<PencilSolver> parts_;
};

// Minimum-norm solution of M x = b for Hermitian PSD M.
inline CVec psd_solve(const CMat &M, const CVec &b) {
  Eigen::SelfAdjointEigenSolver<CMat> es(M);
  const RVec &lam = es.eigenvalues();
  const double floor = 1e-13 * std::max(lam.cwiseAbs().maxCoeff(), 1e-300);
  CVec coeff = es.eigenvectors().adjoint() * b;
  for (Eigen::Index i = 0; i < coeff.size(); ++i)
    coeff(i) = lam(i) > floor ? coeff(i) / lam(i) : cplx(0.0, 0.0);
  return es.eigenvectors() * coeff;
}

inline CVec psd_solve(const CMat &M, const CVec &b,
                      const std::vector<std::vector<Eigen::Index>> &blocks) {
  if (blocks.size() == 1) return psd_solve(M, b);
  CVec x(b.size());
  for (const auto &idx : blocks) x(idx) = psd_solve(M(idx, idx), b(idx));
  return x;
}

// Smallest mu >= 0 (to solver accuracy) with excess(mu) <= 0, for a
// non-increasing excess. Returns a point on the feasible side, within
// rel_tol * budget of the boundary when excess is continuous there.
// Regula falsi with the Illinois weight halving on a doubling bracket.
inline double find_multiplier(const std::function<double(double)> &excess, double budget,
                              double rel_tol) {
  double e_hi = excess(0.0);
  if (e_hi <= 0.0) return 0.0;
  double lo = 0.0, e_lo = e_hi;
  double hi = 1.0;
  while ((e_hi = excess(hi)) > 0.0) {
    lo = hi;
    e_lo = e_hi;
    hi *= 2.0;
    if (hi > 1e12) throw SolverError("QCQP: no multiplier bracket below 1e12");
  }
  double f_lo = e_lo, f_hi = e_hi;  // interpolation weights
  int side = 0;
  for (int step = 0; step < 200; ++step) {
    if (-e_hi <= rel_tol * budget) break;
    if (hi - lo <= 1e-15 * hi) break;
    double mid = hi - f_hi * (hi - lo) / (f_hi - f_lo);
    if (!(mid > lo && mid < hi)) mid = 0.5 * (lo + hi);
    const double e = excess(mid);
    if (e > 0.0) {
      lo = mid;
      f_lo = e;
      if (side < 0) f_hi *= 0.5;
      side = -1;
    } else {
      hi = mid;
      e_hi = f_hi = e;
      if (side > 0) f_lo *= 0.5;
      side = 1;
    }
  }
  return hi;
}

inline bool positive_definite(const CMat &A) {
  Eigen::SelfAdjointEigenSolver<CMat> es(A, Eigen::EigenvaluesOnly);
  const RVec &lam = es.eigenvalues();
  return lam(0) > 1e-10 * std::max(lam(lam.size() - 1), 1e-300);
}

}  // namespace detail

// Returns a KKT point of the convex QCQP. tol is the relative accuracy with
// which an active constraint is met (from the feasible side).
inline QcqpResult qcqp_solve(const QcqpProblem &p, double tol = 1e-10) {
  const auto n = p.objective.dim();
  if (n == 0 || p.objective.A.cols() != n || p.objective.b.size() != n)
    throw SolverError("QCQP: objective dimensions are inconsistent");
  if (p.constraints.size() > 2) throw SolverError("QCQP: at most two constraints supported");
  if (!(tol > 0.0)) throw SolverError("QCQP: tolerance must be > 0");
  {
    Eigen::SelfAdjointEigenSolver<CMat> es(p.objective.A, Eigen::EigenvaluesOnly);
    const RVec &lam = es.eigenvalues();
    if (lam(0) < -1e-9 * std::max(1.0, lam(n - 1)))
      throw SolverError("QCQP: objective matrix is not positive semidefinite");
  }

  std::vector<double> budgets;
  for (std::size_t i = 0; i < p.constraints.size(); ++i) {
    const auto &con = p.constraints[i];
    if (con.form.A.rows() != n || con.form.A.cols() != n)
      throw SolverError("QCQP: constraint " + std::to_string(i) + " has wrong dimension");
    const double beta = con.budget - con.form.c;
    if (!(beta > 0.0))
      throw SolverError("QCQP: constraint " + std::to_string(i) + " has no strictly feasible point");
    budgets.push_back(beta);
  }

  const CVec &b = p.objective.b;
  const CMat &A = p.objective.A;
  QcqpResult out;
  out.multipliers.assign(p.constraints.size(), 0.0);

  auto finish = [&](CVec x) {
    out.objective = p.objective(x);
    out.x = std::move(x);
    return out;
  };

  if (p.constraints.empty()) return finish(detail::psd_solve(A, b));

  // Inner constraint: one with a PD matrix if available.
  std::size_t inner = 0;
  bool pencil_ok = false;
  for (std::size_t i = 0; i < p.constraints.size(); ++i) {
    if (detail::positive_definite(p.constraints[i].form.A)) {
      inner = i;
      pencil_ok = true;
      break;
    }
  }
  const CMat &A_in = p.constraints[inner].form.A;
  const double beta_in = budgets[inner];

  // Every matrix involved is block diagonal on these index sets.
  std::vector<const CMat *> mats{&A};
  for (const auto &con : p.constraints) mats.push_back(&con.form.A);
  const auto blocks = detail::block_partition(mats, n);

  // Minimizer over the inner constraint for objective matrix M.
  auto solve_inner = [&](const CMat &M, double &mu_in) -> CVec {
    if (pencil_ok) {
      const detail::BlockPencil pencil(M, A_in, b, blocks);
      mu_in = detail::find_multiplier(
          [&](double mu) { return pencil.metric_value(mu) - beta_in; }, beta_in, tol);
      return pencil.solve(mu_in);
    }
    auto x_of = [&](double mu) { return detail::psd_solve(M + mu * A_in, b, blocks); };
    mu_in = detail::find_multiplier(
        [&](double mu) { return detail::hermitian_form(A_in, x_of(mu)) - beta_in; }, beta_in, tol);
    return x_of(mu_in);
  };

  double mu_in = 0.0;
  if (p.constraints.size() == 1) {
    CVec x = solve_inner(A, mu_in);
    out.multipliers[inner] = mu_in;
    return finish(std::move(x));
  }

  const std::size_t outer = 1 - inner;
  const CMat &A_out = p.constraints[outer].form.A;
  const double beta_out = budgets[outer];
  CVec x = solve_inner(A, mu_in);
  if (detail::hermitian_form(A_out, x) <= beta_out) {
    out.multipliers[inner] = mu_in;
    return finish(std::move(x));
  }
  const double mu_out = detail::find_multiplier(
      [&](double mu) {
        double unused = 0.0;
        return detail::hermitian_form(A_out, solve_inner(A + mu * A_out, unused)) - beta_out;
      },
      beta_out, tol);
  x = solve_inner(A + mu_out * A_out, mu_in);
  out.multipliers[inner] = mu_in;
  out.multipliers[outer] = mu_out;
  return finish(std::move(x));
}

}  // namespace mcsr

#endif  // MCSR_QCQP_HPP
