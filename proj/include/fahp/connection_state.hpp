// SPDX-License-Identifier: Apache-2.0
//
// fahp: energy-efficient hybrid precoding for fully-adaptive-connected arrays
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

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "fahp/config.hpp"
#include "fahp/errors.hpp"

namespace fahp {

// Switch states between M_T antennas (rows) and N_RF RF chains (columns).
// Entries are stored as bytes so that a malformed matrix can be represented
// and reported; every numerical routine rejects non-binary entries.
class ConnectionState {
 public:
  ConnectionState() = default;
  ConnectionState(std::size_t m_t, std::size_t n_rf) : m_t_(m_t), n_rf_(n_rf), d_(m_t * n_rf, 0) {}

  static ConnectionState zeros(std::size_t m_t, std::size_t n_rf) { return {m_t, n_rf}; }

  static ConnectionState ones(std::size_t m_t, std::size_t n_rf) {
    ConnectionState d(m_t, n_rf);
    std::fill(d.d_.begin(), d.d_.end(), std::uint8_t{1});
    return d;
  }

  // Antennas split into N_RF equal consecutive groups; group j feeds chain j.
  static ConnectionState sub_connected(std::size_t m_t, std::size_t n_rf) {
    if (n_rf == 0 || m_t % n_rf != 0)
      throw InvalidInput("sub-connected layout needs n_rf to divide m_t (m_t=" + std::to_string(m_t) +
                         ", n_rf=" + std::to_string(n_rf) + ")");
    ConnectionState d(m_t, n_rf);
    const std::size_t group = m_t / n_rf;
    for (std::size_t i = 0; i < m_t; ++i) d.set(i, i / group, 1);
    return d;
  }

  // Row-major entries, any byte value accepted (see class comment).
  static ConnectionState from_entries(std::size_t m_t, std::size_t n_rf, const std::vector<int>& entries) {
    if (entries.size() != m_t * n_rf) throw InvalidInput("ConnectionState: entry count does not match shape");
    ConnectionState d(m_t, n_rf);
    for (std::size_t k = 0; k < entries.size(); ++k) {
      if (entries[k] < 0 || entries[k] > 255) throw InvalidInput("ConnectionState: entry out of byte range");
      d.d_[k] = static_cast<std::uint8_t>(entries[k]);
    }
    return d;
  }

  // Bit k of `bits` (k = i*n_rf + j, row-major) becomes d(i,j).
  static ConnectionState from_bits(std::size_t m_t, std::size_t n_rf, std::uint64_t bits) {
    ConnectionState d(m_t, n_rf);
    for (std::size_t k = 0; k < m_t * n_rf; ++k) d.d_[k] = static_cast<std::uint8_t>((bits >> k) & 1u);
    return d;
  }

  std::size_t rows() const noexcept { return m_t_; }
  std::size_t cols() const noexcept { return n_rf_; }

  int operator()(std::size_t i, std::size_t j) const noexcept { return d_[i * n_rf_ + j]; }
  void set(std::size_t i, std::size_t j, int v) { d_[i * n_rf_ + j] = static_cast<std::uint8_t>(v); }

  bool is_binary() const noexcept {
    return std::all_of(d_.begin(), d_.end(), [](std::uint8_t v) { return v <= 1; });
  }

  // ||D||_F^2 for a binary matrix: the number of working phase shifters.
  std::size_t count_ones() const noexcept {
    return static_cast<std::size_t>(std::count(d_.begin(), d_.end(), std::uint8_t{1}));
  }

  std::size_t row_sum(std::size_t i) const noexcept {
    std::size_t s = 0;
    for (std::size_t j = 0; j < n_rf_; ++j) s += d_[i * n_rf_ + j];
    return s;
  }

  std::size_t col_sum(std::size_t j) const noexcept {
    std::size_t s = 0;
    for (std::size_t i = 0; i < m_t_; ++i) s += d_[i * n_rf_ + j];
    return s;
  }

  // RF chains connected to at least one antenna.
  std::size_t working_rf_chains() const noexcept {
    std::size_t n = 0;
    for (std::size_t j = 0; j < n_rf_; ++j) n += col_sum(j) > 0 ? 1 : 0;
    return n;
  }

  // Canonical bit-packed row-major encoding, used as a cache key.
  std::vector<std::uint64_t> packed() const {
    std::vector<std::uint64_t> words((d_.size() + 63) / 64 + 1, 0);
    words.back() = (static_cast<std::uint64_t>(m_t_) << 32) | static_cast<std::uint64_t>(n_rf_);
    for (std::size_t k = 0; k < d_.size(); ++k)
      if (d_[k] != 0) words[k / 64] |= std::uint64_t{1} << (k % 64);
    return words;
  }

  friend bool operator==(const ConnectionState&, const ConnectionState&) = default;

  std::string to_string() const {
    std::string s;
    for (std::size_t i = 0; i < m_t_; ++i) {
      for (std::size_t j = 0; j < n_rf_; ++j) s += static_cast<char>('0' + d_[i * n_rf_ + j]);
      if (i + 1 < m_t_) s += '/';
    }
    return s;
  }

 private:
  std::size_t m_t_ = 0;
  std::size_t n_rf_ = 0;
  std::vector<std::uint8_t> d_;
};

struct ConstraintViolation {
  enum class Kind { non_binary, row_cap, col_cap, shape };
  Kind kind;
  std::size_t row = 0;
  std::size_t col = 0;
  std::size_t value = 0;  // offending sum or entry
  std::size_t cap = 0;
  std::string message;
};

struct ValidationReport {
  std::vector<ConstraintViolation> violations;
  bool ok() const noexcept { return violations.empty(); }
};

// Checks binary entries and the per-antenna and per-chain caps; reports all
// violations rather than stopping at the first.
inline ValidationReport validate_connection_state(const ConnectionState& d, const SystemConfig& cfg) {
  using Kind = ConstraintViolation::Kind;
  ValidationReport report;
  if (d.rows() != cfg.m_t || d.cols() != cfg.n_rf) {
    report.violations.push_back({Kind::shape, d.rows(), d.cols(), 0, 0,
                                 "shape " + std::to_string(d.rows()) + "x" + std::to_string(d.cols()) +
                                     " does not match " + std::to_string(cfg.m_t) + "x" +
                                     std::to_string(cfg.n_rf)});
    return report;
  }
  for (std::size_t i = 0; i < d.rows(); ++i)
    for (std::size_t j = 0; j < d.cols(); ++j)
      if (d(i, j) > 1)
        report.violations.push_back({Kind::non_binary, i, j, static_cast<std::size_t>(d(i, j)), 1,
                                     "entry (" + std::to_string(i) + "," + std::to_string(j) +
                                         ") is not binary"});
  for (std::size_t i = 0; i < d.rows(); ++i) {
    const std::size_t s = d.row_sum(i);
    const std::size_t cap = i < cfg.row_caps.size() ? cfg.row_caps[i] : cfg.n_rf;
    if (s > cap)
      report.violations.push_back({Kind::row_cap, i, 0, s, cap,
                                   "antenna " + std::to_string(i) + " uses " + std::to_string(s) +
                                       " RF chains, cap " + std::to_string(cap)});
  }
  for (std::size_t j = 0; j < d.cols(); ++j) {
    const std::size_t s = d.col_sum(j);
    const std::size_t cap = j < cfg.col_caps.size() ? cfg.col_caps[j] : cfg.m_t;
    if (s > cap)
      report.violations.push_back({Kind::col_cap, 0, j, s, cap,
                                   "RF chain " + std::to_string(j) + " feeds " + std::to_string(s) +
                                       " antennas, cap " + std::to_string(cap)});
  }
  return report;
}

}  // namespace fahp
