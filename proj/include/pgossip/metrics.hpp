/*
 * Copyright 2026 The pgossip Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Run statistics and the closed forms they are checked against.
//
//   nu_t     used slots (sends + receives) in step t
//   lambda   number of steps
//   U        sum of nu_t
//   sigma    (n+1) * lambda available slots
//   mu       U / lambda
//   epsilon  U / sigma

#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/rational.hpp>

#include "pgossip/engine.hpp"

namespace pgossip {

using Rational = boost::rational<std::int64_t>;

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct UtilizationString {
  std::vector<std::int32_t> values;

  bool operator==(const UtilizationString&) const = default;
};

struct Metrics {
  std::int64_t lambda = 0;
  std::int64_t used = 0;
  std::int64_t sigma = 0;
  Rational mu{0};
  Rational epsilon{0};
  std::optional<Rational> steps_per_gossip;  // multi-session runs only
};

inline UtilizationString utilization_string(const RunTable& rt) {
  UtilizationString u;
  u.values.assign(static_cast<std::size_t>(rt.length()), 0);
  for (const auto& row : rt.grid)
    for (std::size_t t = 0; t < row.size(); ++t)
      if (row[t].used()) ++u.values[t];
  return u;
}

inline bool is_palindrome(const UtilizationString& u) {
  return std::equal(u.values.begin(), u.values.begin() + u.values.size() / 2,
                    u.values.rbegin());
}

inline std::int64_t four_slot_columns(const RunTable& rt) {
  const auto u = utilization_string(rt);
  return std::count(u.values.begin(), u.values.end(), 4);
}

/// 3/4 n^2 + 5/4 n + 1/2 floor(n/2)
inline std::int64_t lambda_identity(std::int64_t n) {
  if (n < 1) throw DomainError("lambda_identity requires n >= 1");
  const std::int64_t num = 3 * n * n + 5 * n + 2 * (n / 2);
  return num / 4;
}

inline std::int64_t lambda_pipelined(std::int64_t n) {
  if (n < 2) throw DomainError("lambda_pipelined requires n >= 2");
  return 3 * n;
}

/// Number of nu_t = 4 columns of an identity run: sum_{i<n} floor(i/2).
inline std::int64_t u4_closed(std::int64_t n) {
  if (n < 1) throw DomainError("u4_closed requires n >= 1");
  const std::int64_t h = n / 2;
  // pairs (2h', 2h'+1) contribute 2h' each, plus floor((n-1)/2) for odd n
  return h * (h - 1) + ((n % 2 == 1) ? h : 0);
}

struct PipelinedOracles {
  std::int64_t used = 0;
  Rational mu{0};
  Rational epsilon{0};
};

inline PipelinedOracles pipelined_oracles(std::int64_t n) {
  if (n < 2) throw DomainError("pipelined_oracles requires n >= 2");
  return {2 * n * (n + 1), Rational(2 * (n + 1), 3), Rational(2, 3)};
}

struct IdentityAsymptotics {
  Rational mu{0};
  Rational epsilon{0};
};

/// Exact mu and epsilon of the identity run of size n (limits 8/3 and 0).
inline IdentityAsymptotics identity_asymptotics(std::int64_t n) {
  const auto lambda = lambda_identity(n);
  return {Rational(2 * n * (n + 1), lambda), Rational(2 * n, lambda)};
}

/// Decimal rendering of a non-negative rational, rounded half-up.
inline std::string to_fixed(const Rational& r, int places) {
  if (r < Rational(0)) return "-" + to_fixed(-r, places);
  std::int64_t scale = 1;
  for (int k = 0; k < places; ++k) scale *= 10;
  const auto num = r.numerator();
  const auto den = r.denominator();
  // floor(num * scale / den + 1/2), split to keep the product in range
  const std::int64_t whole = num / den;
  const std::int64_t rem = num % den;
  const std::int64_t frac = (2 * rem * scale + den) / (2 * den);
  std::int64_t int_part = whole + frac / scale;
  std::int64_t frac_part = frac % scale;
  std::string out = std::to_string(int_part);
  if (places > 0) {
    std::string digits = std::to_string(frac_part);
    out += "." + std::string(static_cast<std::size_t>(places) - digits.size(), '0') + digits;
  }
  return out;
}

inline std::string percent(const Rational& r, int places = 2) {
  return to_fixed(r * 100, places);
}

/// A processor finishes a session when it receives the n-th value of it.
struct SessionCompletion {
  std::int32_t processor = 0;
  std::int64_t step = 0;  // 1-based
  std::int32_t session = 0;
};

inline std::vector<SessionCompletion> session_completions(const RunTable& rt) {
  std::vector<SessionCompletion> out;
  for (std::int32_t i = 0; i < rt.processors(); ++i) {
    std::int64_t received = 0;
    for (std::int64_t t = 0; t < rt.length(); ++t) {
      if (rt.at(i, t).kind != ActionKind::Recv) continue;
      if (++received % rt.n == 0)
        out.push_back({i, t + 1, static_cast<std::int32_t>(received / rt.n - 1)});
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.step != b.step ? a.step < b.step : a.processor < b.processor;
  });
  return out;
}

/// Bounds of the steady region of a multi-session run: columns
/// [margin, lambda - margin] (1-based, inclusive). A negative margin selects
/// 2n+2, which skips the fill and drain phases.
struct SteadyWindowConfig {
  std::int64_t margin = -1;
};

struct SteadyWindowStats {
  std::int64_t first = 0;  // 1-based, inclusive
  std::int64_t last = 0;
  std::int64_t used = 0;
  Rational efficiency{0};
  std::int64_t zone_width = 0;  // 2(n+1) steps, one session per processor
  std::vector<std::int64_t> completions_per_zone;
  Rational steps_per_gossip{0};
};

inline std::optional<SteadyWindowStats> steady_window(const RunTable& rt,
                                                      SteadyWindowConfig cfg = {}) {
  const std::int64_t margin = cfg.margin >= 0 ? cfg.margin : 2 * std::int64_t{rt.n} + 2;
  SteadyWindowStats s;
  s.first = margin;
  s.last = rt.length() - margin;
  if (s.first < 1) s.first = 1;
  if (s.last < s.first) return std::nullopt;
  const auto u = utilization_string(rt);
  for (auto t = s.first; t <= s.last; ++t) s.used += u.values[static_cast<std::size_t>(t - 1)];
  s.efficiency = Rational(s.used, (s.last - s.first + 1) * rt.processors());

  s.zone_width = 2 * std::int64_t{rt.processors()};
  const auto zones = (s.last - s.first + 1) / s.zone_width;
  if (zones == 0) return s;
  s.completions_per_zone.assign(static_cast<std::size_t>(zones), 0);
  for (const auto& c : session_completions(rt)) {
    const auto off = c.step - s.first;
    if (off < 0) continue;
    const auto z = off / s.zone_width;
    if (z < zones) ++s.completions_per_zone[static_cast<std::size_t>(z)];
  }
  std::int64_t total = 0;
  for (auto c : s.completions_per_zone) total += c;
  if (total > 0) s.steps_per_gossip = Rational(zones * s.zone_width, total);
  return s;
}

inline Metrics compute_metrics(const RunTable& rt) {
  Metrics m;
  m.lambda = rt.length();
  for (auto v : utilization_string(rt).values) m.used += v;
  m.sigma = m.lambda * rt.processors();
  if (m.lambda > 0) {
    m.mu = Rational(m.used, m.lambda);
    m.epsilon = Rational(m.used, m.sigma);
  }
  if (rt.sessions > 1)
    if (auto s = steady_window(rt); s && s->steps_per_gossip != Rational(0))
      m.steps_per_gossip = s->steps_per_gossip;
  return m;
}

}  // namespace pgossip
