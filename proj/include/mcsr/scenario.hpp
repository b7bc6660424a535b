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

// Scenario configuration, MS-to-BS assignment and i.i.d. Rayleigh channel
// generation for the multi-cell downlink.
//
// Indices are zero-based throughout the library: BS k in [0, K), MS m in
// [0, K*M), relay r in [0, R). MS m is served by BS m / M and is the
// (m % M)-th stream (column) of that BS's transmit filter.

#ifndef MCSR_SCENARIO_HPP
#define MCSR_SCENARIO_HPP

#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mcsr/types.hpp"

namespace mcsr {

enum class Mode { kTwoHop, kSingleHop };

inline std::string_view to_string(Mode mode) {
  return mode == Mode::kTwoHop ? "two-hop" : "single-hop";
}

struct ScenarioConfig {
  int cells = 2;           // K
  int ms_per_cell = 3;     // M
  int relays = 4;          // R (ignored in single-hop mode)
  int bs_antennas = 3;     // N_B
  int relay_antennas = 2;  // N_R
  int ms_antennas = 2;     // N_M
  double symbol_power = 1.0;        // P_d, average power of every data symbol
  double bs_power_budget = 1.0;     // P_B, sum over all BSs
  double relay_power_budget = 1.0;  // P_R, sum over all relays
  double noise_var = 1.0;           // sigma^2, at relays and MSs
  Mode mode = Mode::kTwoHop;

  int num_ms() const { return cells * ms_per_cell; }
  bool two_hop() const { return mode == Mode::kTwoHop; }

  // Throws ConfigError naming the first violated field.
  void validate() const {
    auto positive_int = [](int v, const char *name) {
      if (v < 1) throw ConfigError(name, "must be >= 1, got " + std::to_string(v));
    };
    auto positive_real = [](double v, const char *name) {
      if (!(v > 0.0) || !std::isfinite(v))
        throw ConfigError(name, "must be finite and > 0, got " + std::to_string(v));
    };
    positive_int(cells, "K");
    positive_int(ms_per_cell, "M");
    positive_int(bs_antennas, "N_B");
    positive_int(ms_antennas, "N_M");
    if (ms_per_cell > bs_antennas)
      throw ConfigError("M", "M <= N_B required (M=" + std::to_string(ms_per_cell) +
                                 ", N_B=" + std::to_string(bs_antennas) + ")");
    positive_real(symbol_power, "P_d");
    positive_real(bs_power_budget, "P_B");
    positive_real(noise_var, "sigma2");
    if (two_hop()) {
      positive_int(relays, "R");
      positive_int(relay_antennas, "N_R");
      positive_real(relay_power_budget, "P_R");
    }
  }
};

// Serving BS of MS m (zero-based). MSs [kM, (k+1)M) belong to BS k.
inline int serving_bs(int m, const ScenarioConfig &cfg) {
  if (m < 0 || m >= cfg.num_ms())
    throw std::out_of_range("MS index " + std::to_string(m) + " outside [0, " +
                            std::to_string(cfg.num_ms()) + ")");
  return m / cfg.ms_per_cell;
}

// Stream (column of V^(k)) carrying MS m's symbol.
inline int stream_index(int m, const ScenarioConfig &cfg) {
  (void)serving_bs(m, cfg);
  return m % cfg.ms_per_cell;
}

// ---------------------------------------------------------------------------
// Random streams

// SplitMix64 finalizer; used to derive independent substream seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Seed of the substream identified by (base, a, b, c). Pure function, so any
// (trial, matrix) stream can be regenerated regardless of evaluation order.
inline std::uint64_t substream_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0,
                                    std::uint64_t c = 0) {
  std::uint64_t h = splitmix64(base);
  h = splitmix64(h ^ splitmix64(a + 0x1234567ULL));
  h = splitmix64(h ^ splitmix64(b + 0x89ABCDEULL));
  h = splitmix64(h ^ splitmix64(c + 0xF0F0F0FULL));
  return h;
}

using Rng = std::mt19937_64;

// Circularly-symmetric complex Gaussian matrix, unit variance per entry.
inline CMat complex_gaussian(Eigen::Index rows, Eigen::Index cols, Rng &rng) {
  std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
  CMat out(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double re = nd(rng);
      const double im = nd(rng);
      out(i, j) = cplx(re, im);
    }
  return out;
}

// ---------------------------------------------------------------------------
// Channels

// All channel matrices of one snapshot. Immutable after construction.
class ChannelSet {
 public:
  // Two-hop: relay_from_bs[r*K + k] is H_RB^(r,k) (N_R x N_B),
  // ms_from_relay[m*R + r] is H_MR^(m,r) (N_M x N_R).
  static ChannelSet two_hop(const ScenarioConfig &cfg, std::vector<CMat> relay_from_bs,
                            std::vector<CMat> ms_from_relay, std::uint64_t seed = 0) {
    if (!cfg.two_hop()) throw ModelError("two_hop channel set for a single-hop config");
    const auto K = static_cast<std::size_t>(cfg.cells);
    const auto R = static_cast<std::size_t>(cfg.relays);
    const auto KM = static_cast<std::size_t>(cfg.num_ms());
    check_family(relay_from_bs, R * K, cfg.relay_antennas, cfg.bs_antennas, "H_RB");
    check_family(ms_from_relay, KM * R, cfg.ms_antennas, cfg.relay_antennas, "H_MR");
    ChannelSet out(cfg, seed);
    out.rb_ = std::move(relay_from_bs);
    out.mr_ = std::move(ms_from_relay);
    return out;
  }

  // Single-hop: ms_from_bs[m*K + k] is H_MB^(m,k) (N_M x N_B).
  static ChannelSet single_hop(const ScenarioConfig &cfg, std::vector<CMat> ms_from_bs,
                               std::uint64_t seed = 0) {
    if (cfg.two_hop()) throw ModelError("single_hop channel set for a two-hop config");
    const auto K = static_cast<std::size_t>(cfg.cells);
    const auto KM = static_cast<std::size_t>(cfg.num_ms());
    check_family(ms_from_bs, KM * K, cfg.ms_antennas, cfg.bs_antennas, "H_MB");
    ChannelSet out(cfg, seed);
    out.mb_ = std::move(ms_from_bs);
    return out;
  }

  const CMat &relay_from_bs(int r, int k) const { return rb_.at(idx(r, k, cells_)); }
  const CMat &ms_from_relay(int m, int r) const { return mr_.at(idx(m, r, relays_)); }
  const CMat &ms_from_bs(int m, int k) const { return mb_.at(idx(m, k, cells_)); }

  Mode mode() const { return mode_; }
  std::uint64_t seed() const { return seed_; }

  // Throws ModelError unless the family sizes match cfg.
  void check_against(const ScenarioConfig &cfg) const {
    if (cfg.mode != mode_ || cfg.cells != cells_ || cfg.num_ms() != num_ms_ ||
        (cfg.two_hop() && cfg.relays != relays_))
      throw ModelError("channel set does not match scenario configuration");
    if (cfg.two_hop()) {
      if (rb_.front().rows() != cfg.relay_antennas || rb_.front().cols() != cfg.bs_antennas ||
          mr_.front().rows() != cfg.ms_antennas)
        throw ModelError("channel antenna counts do not match configuration");
    } else if (mb_.front().rows() != cfg.ms_antennas || mb_.front().cols() != cfg.bs_antennas) {
      throw ModelError("channel antenna counts do not match configuration");
    }
  }

  // FNV-1a over the raw matrix bytes; identifies a snapshot in reports.
  std::uint64_t fingerprint() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](const std::vector<CMat> &family) {
      for (const auto &mat : family) {
        const auto *bytes = reinterpret_cast<const unsigned char *>(mat.data());
        const auto n = static_cast<std::size_t>(mat.size()) * sizeof(cplx);
        for (std::size_t i = 0; i < n; ++i) {
          h ^= bytes[i];
          h *= 0x100000001b3ULL;
        }
      }
    };
    mix(rb_);
    mix(mr_);
    mix(mb_);
    return h;
  }

 private:
  ChannelSet(const ScenarioConfig &cfg, std::uint64_t seed)
      : mode_(cfg.mode), cells_(cfg.cells), relays_(cfg.relays), num_ms_(cfg.num_ms()),
        seed_(seed) {}

  static std::size_t idx(int a, int b, int stride) {
    return static_cast<std::size_t>(a) * static_cast<std::size_t>(stride) +
           static_cast<std::size_t>(b);
  }

  static void check_family(const std::vector<CMat> &family, std::size_t count, int rows, int cols,
                           const char *name) {
    if (family.size() != count)
      throw ModelError(std::string(name) + ": expected " + std::to_string(count) +
                       " matrices, got " + std::to_string(family.size()));
    for (const auto &mat : family)
      if (mat.rows() != rows || mat.cols() != cols)
        throw ModelError(std::string(name) + ": expected " + std::to_string(rows) + "x" +
                         std::to_string(cols) + " matrices");
  }

  Mode mode_;
  int cells_;
  int relays_;
  int num_ms_;
  std::uint64_t seed_;
  std::vector<CMat> rb_;
  std::vector<CMat> mr_;
  std::vector<CMat> mb_;
};

namespace detail {
enum ChannelFamily : std::uint64_t { kRelayFromBs = 1, kMsFromRelay = 2, kMsFromBs = 3 };
}  // namespace detail

// Draws every channel entry i.i.d. CN(0, 1). Each matrix uses its own
// substream keyed by (seed, family, a, b), so the result is a pure function
// of (cfg, seed).
inline ChannelSet draw_channels(const ScenarioConfig &cfg, std::uint64_t seed) {
  cfg.validate();
  auto draw = [seed](std::uint64_t family, int a, int b, int rows, int cols) {
    Rng rng(substream_seed(seed, family, static_cast<std::uint64_t>(a),
                           static_cast<std::uint64_t>(b)));
    return complex_gaussian(rows, cols, rng);
  };
  if (cfg.two_hop()) {
    std::vector<CMat> rb, mr;
    for (int r = 0; r < cfg.relays; ++r)
      for (int k = 0; k < cfg.cells; ++k)
        rb.push_back(draw(detail::kRelayFromBs, r, k, cfg.relay_antennas, cfg.bs_antennas));
    for (int m = 0; m < cfg.num_ms(); ++m)
      for (int r = 0; r < cfg.relays; ++r)
        mr.push_back(draw(detail::kMsFromRelay, m, r, cfg.ms_antennas, cfg.relay_antennas));
    return ChannelSet::two_hop(cfg, std::move(rb), std::move(mr), seed);
  }
  std::vector<CMat> mb;
  for (int m = 0; m < cfg.num_ms(); ++m)
    for (int k = 0; k < cfg.cells; ++k)
      mb.push_back(draw(detail::kMsFromBs, m, k, cfg.ms_antennas, cfg.bs_antennas));
  return ChannelSet::single_hop(cfg, std::move(mb), seed);
}

// ---------------------------------------------------------------------------
// Pseudo-SNR

// Sets P_B (and P_R in two-hop mode) so that (P_B + P_R) / sigma^2 equals
// 10^(psnr_db/10). rho is the fraction of the total given to the BSs; it is
// ignored in single-hop mode where P_B receives the whole total.
inline ScenarioConfig apply_psnr(ScenarioConfig cfg, double psnr_db, double rho) {
  if (!std::isfinite(psnr_db)) throw ConfigError("psnr_db", "must be finite");
  const double total = std::pow(10.0, psnr_db / 10.0) * cfg.noise_var;
  if (cfg.two_hop()) {
    if (!(rho > 0.0 && rho < 1.0)) throw ConfigError("rho", "must lie in (0, 1)");
    cfg.bs_power_budget = rho * total;
    cfg.relay_power_budget = (1.0 - rho) * total;
  } else {
    cfg.bs_power_budget = total;
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// Config files

// Flat key/value text, one "key = value" (or "key: value") per line, '#'
// starts a comment. Recognized keys:
//   K, M, R, N_B, N_R, N_M       integers (R, N_R only needed in two-hop mode)
//   mode                          "two-hop" (default) | "single-hop"
//   P_d, sigma2                   reals, default 1.0
//   P_B, P_R                      explicit budgets, or
//   psnr_db [, rho]               pseudo-SNR in dB and BS power fraction (default 0.5)
inline ScenarioConfig load_config(std::istream &in) {
  std::map<std::string, std::string> kv;
  std::string line;
  int line_no = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto sep = line.find('=');
    if (sep == std::string::npos) sep = line.find(':');
    if (sep == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no), "expected 'key = value'");
    auto key = trim(line.substr(0, sep));
    auto value = trim(line.substr(sep + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no), "empty key");
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
      value = value.substr(1, value.size() - 2);
    if (!kv.emplace(key, value).second) throw ConfigError(key, "given more than once");
  }

  static const char *const kKnown[] = {"K",   "M",      "R",    "N_B", "N_R",     "N_M", "mode",
                                       "P_d", "sigma2", "P_B",  "P_R", "psnr_db", "rho"};
  for (const auto &[key, value] : kv) {
    bool known = false;
    for (const char *k : kKnown) known = known || key == k;
    if (!known) throw ConfigError(key, "unknown key");
  }

  auto get_real = [&kv](const std::string &key) -> std::optional<double> {
    const auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    double v{};
    const auto &s = it->second;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
      throw ConfigError(key, "not a number: '" + s + "'");
    return v;
  };
  auto get_int = [&kv](const std::string &key, bool required) -> std::optional<int> {
    const auto it = kv.find(key);
    if (it == kv.end()) {
      if (required) throw ConfigError(key, "missing");
      return std::nullopt;
    }
    int v{};
    const auto &s = it->second;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
      throw ConfigError(key, "not an integer: '" + s + "'");
    return v;
  };

  ScenarioConfig cfg;
  if (const auto it = kv.find("mode"); it != kv.end()) {
    if (it->second == "two-hop")
      cfg.mode = Mode::kTwoHop;
    else if (it->second == "single-hop")
      cfg.mode = Mode::kSingleHop;
    else
      throw ConfigError("mode", "expected 'two-hop' or 'single-hop', got '" + it->second + "'");
  }
  cfg.cells = *get_int("K", true);
  cfg.ms_per_cell = *get_int("M", true);
  cfg.bs_antennas = *get_int("N_B", true);
  cfg.ms_antennas = *get_int("N_M", true);
  if (cfg.two_hop()) {
    cfg.relays = *get_int("R", true);
    cfg.relay_antennas = *get_int("N_R", true);
  } else {
    cfg.relays = get_int("R", false).value_or(0);
    cfg.relay_antennas = get_int("N_R", false).value_or(0);
  }
  cfg.symbol_power = get_real("P_d").value_or(1.0);
  cfg.noise_var = get_real("sigma2").value_or(1.0);
  if (!(cfg.noise_var > 0.0)) throw ConfigError("sigma2", "must be > 0");

  const auto psnr = get_real("psnr_db");
  const auto pb = get_real("P_B");
  const auto pr = get_real("P_R");
  if (psnr) {
    if (pb || pr) throw ConfigError("psnr_db", "give either psnr_db or explicit P_B/P_R");
    cfg = apply_psnr(cfg, *psnr, get_real("rho").value_or(0.5));
  } else {
    if (!pb) throw ConfigError("P_B", "missing (or give psnr_db)");
    cfg.bs_power_budget = *pb;
    if (cfg.two_hop()) {
      if (!pr) throw ConfigError("P_R", "missing (or give psnr_db)");
      cfg.relay_power_budget = *pr;
    }
  }
  cfg.validate();
  return cfg;
}

inline ScenarioConfig load_config(const std::string &text) {
  std::istringstream in(text);
  return load_config(in);
}

// Reference two-hop cellular scenario: K=2, M=3, N_B=3, R=4, N_R=N_M=2.
inline ScenarioConfig reference_scenario(double psnr_db = 30.0, double rho = 0.5) {
  ScenarioConfig cfg;
  cfg.cells = 2;
  cfg.ms_per_cell = 3;
  cfg.bs_antennas = 3;
  cfg.relays = 4;
  cfg.relay_antennas = 2;
  cfg.ms_antennas = 2;
  cfg.mode = Mode::kTwoHop;
  return apply_psnr(cfg, psnr_db, rho);
}

}  // namespace mcsr

#endif  // MCSR_SCENARIO_HPP
