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

#ifndef MCSR_TYPES_HPP
#define MCSR_TYPES_HPP

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace mcsr {

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;

// Error hierarchy. Everything the library throws on bad input derives from
// mcsr::Error so callers can catch one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid or missing configuration field. field() names the offending key.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, std::string reason)
      : Error("config field '" + field + "': " + reason),
        field_(std::move(field)),
        reason_(std::move(reason)) {}
  const std::string &field() const noexcept { return field_; }
  const std::string &reason() const noexcept { return reason_; }

 private:
  std::string field_;
  std::string reason_;
};

// Dimension mismatch between a state, a channel set and a config.
class ModelError : public Error {
 public:
  using Error::Error;
};

// The receive filter is orthogonal to the effective useful link (u^H q = 0).
class DegenerateLinkError : public Error {
 public:
  using Error::Error;
};

// QCQP failure: non-PSD data, no multiplier bracket, infeasible budget.
class SolverError : public Error {
 public:
  using Error::Error;
};

// Requested operation is not defined for the configured transmission mode.
class UnsupportedModeError : public Error {
 public:
  using Error::Error;
};

inline constexpr double kLn2 = 0.69314718055994530941723212145818;

}  // namespace mcsr

#endif  // MCSR_TYPES_HPP
