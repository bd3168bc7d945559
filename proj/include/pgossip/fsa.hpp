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

// Processor identities, broadcast-order permutations and the per-processor
// state programs of the gossiping family.
//
// Every processor i of a system with n+1 members runs the same three-phase
// program: i (WR, R) pairs, then n (WS, S) pairs addressed in the order given
// by its permutation, then n-i more (WR, R) pairs. Only the permutation varies
// between members of the family.

#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <istream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pgossip {

/// Raised when an operation is called outside its domain.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ProcessorId {
  std::int32_t value = 0;

  constexpr auto operator<=>(const ProcessorId&) const = default;
};

inline constexpr ProcessorId pid(std::int32_t v) { return ProcessorId{v}; }

/// Ordered broadcast targets of one processor: every id in {0..n} except the
/// owner, each exactly once.
struct Permutation {
  ProcessorId owner;
  std::int32_t n = 0;
  std::vector<ProcessorId> targets;

  bool operator==(const Permutation&) const = default;
};

enum class StateKind : std::uint8_t { WaitRecv, Recv, WaitSend, Send };

struct StateTemplate {
  StateKind kind = StateKind::WaitRecv;
  std::optional<ProcessorId> target;  // set for WaitSend/Send only

  bool operator==(const StateTemplate&) const = default;
};

/// START and STOP are the program's boundaries and are not stored.
struct FsaProgram {
  ProcessorId owner;
  std::vector<StateTemplate> states;

  bool operator==(const FsaProgram&) const = default;
};

namespace detail {

inline void check_owner(std::int32_t i, std::int32_t n) {
  if (n < 1) throw ParameterError("n must be >= 1");
  if (i < 0 || i > n)
    throw ParameterError("processor id " + std::to_string(i) +
                         " outside [0, " + std::to_string(n) + "]");
}

inline std::vector<ProcessorId> others_ascending(std::int32_t i,
                                                 std::int32_t n) {
  std::vector<ProcessorId> out;
  out.reserve(static_cast<std::size_t>(n));
  for (std::int32_t j = 0; j <= n; ++j)
    if (j != i) out.push_back(pid(j));
  return out;
}

}  // namespace detail

inline Permutation identity_permutation(ProcessorId i, std::int32_t n) {
  detail::check_owner(i.value, n);
  return Permutation{i, n, detail::others_ascending(i.value, n)};
}

/// i+1, ..., n, 0, ..., i-1
inline Permutation pipelined_permutation(ProcessorId i, std::int32_t n) {
  detail::check_owner(i.value, n);
  std::vector<ProcessorId> targets;
  targets.reserve(static_cast<std::size_t>(n));
  for (std::int32_t k = 1; k <= n; ++k) targets.push_back(pid((i.value + k) % (n + 1)));
  return Permutation{i, n, std::move(targets)};
}

/// 64-bit LCG (Knuth's MMIX constants) returning the top 33 bits of the state.
class Lcg64 {
 public:
  static constexpr std::uint64_t kMultiplier = 6364136223846793005ULL;
  static constexpr std::uint64_t kIncrement = 1442695040888963407ULL;
  static constexpr std::uint64_t kOutputRange = std::uint64_t{1} << 33;

  explicit constexpr Lcg64(std::uint64_t state) : state_(state) {}

  constexpr std::uint64_t next() {
    state_ = state_ * kMultiplier + kIncrement;
    return state_ >> 31;
  }

  /// Uniform integer in [0, bound), bound in [1, 2^33]; rejection removes the
  /// modulo bias.
  constexpr std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = kOutputRange - kOutputRange % bound;
    for (;;) {
      const std::uint64_t r = next();
      if (r < limit) return r % bound;
    }
  }

  constexpr std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_;
};

/// Seed for processor i's stream; distinct owners and system sizes draw from
/// distinct starting states under one user seed.
inline constexpr std::uint64_t permutation_stream_seed(std::int32_t i,
                                                       std::int32_t n,
                                                       std::uint64_t seed) {
  return seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(i) + 1) +
         0xD1B54A32D192ED03ULL * static_cast<std::uint64_t>(n);
}

/// Fisher-Yates shuffle of the ascending target list.
inline Permutation random_permutation(ProcessorId i, std::int32_t n,
                                      std::uint64_t seed) {
  detail::check_owner(i.value, n);
  auto targets = detail::others_ascending(i.value, n);
  Lcg64 rng(permutation_stream_seed(i.value, n, seed));
  for (std::size_t k = targets.size(); k > 1; --k) {
    const auto j = static_cast<std::size_t>(rng.below(k));
    std::swap(targets[k - 1], targets[j]);
  }
  return Permutation{i, n, std::move(targets)};
}

enum class PermutationViolation : std::uint8_t {
  BadSystemSize,
  BadOwner,
  WrongLength,
  OutOfRange,
  ContainsOwner,
  Duplicate,
};

struct PermutationReport {
  PermutationViolation kind;
  std::string message;
};

/// Returns nullopt when `p` is a valid permutation, otherwise the first
/// violation found.
inline std::optional<PermutationReport> validate_permutation(
    const Permutation& p) {
  auto fail = [](PermutationViolation kind, std::string msg) {
    return std::optional<PermutationReport>(
        PermutationReport{kind, std::move(msg)});
  };
  if (p.n < 1) return fail(PermutationViolation::BadSystemSize, "n must be >= 1");
  if (p.owner.value < 0 || p.owner.value > p.n)
    return fail(PermutationViolation::BadOwner,
                "owner " + std::to_string(p.owner.value) + " outside [0, n]");
  if (p.targets.size() != static_cast<std::size_t>(p.n))
    return fail(PermutationViolation::WrongLength,
                "wrong length: expected " + std::to_string(p.n) + " targets, got " +
                    std::to_string(p.targets.size()));
  std::vector<bool> seen(static_cast<std::size_t>(p.n) + 1, false);
  for (std::size_t k = 0; k < p.targets.size(); ++k) {
    const auto t = p.targets[k].value;
    const auto where = " at position " + std::to_string(k + 1);
    if (t < 0 || t > p.n)
      return fail(PermutationViolation::OutOfRange,
                  "target " + std::to_string(t) + " out of range" + where);
    if (t == p.owner.value)
      return fail(PermutationViolation::ContainsOwner, "contains owner" + where);
    if (seen[static_cast<std::size_t>(t)])
      return fail(PermutationViolation::Duplicate,
                  "duplicate target " + std::to_string(t) + where);
    seen[static_cast<std::size_t>(t)] = true;
  }
  return std::nullopt;
}

inline FsaProgram compose_fsa(ProcessorId i, std::int32_t n,
                              const Permutation& p) {
  detail::check_owner(i.value, n);
  if (p.owner != i || p.n != n)
    throw ParameterError("permutation owner/size does not match processor " +
                         std::to_string(i.value));
  if (auto bad = validate_permutation(p)) throw ParameterError(bad->message);

  FsaProgram prog{i, {}};
  prog.states.reserve(4 * static_cast<std::size_t>(n));
  auto receive = [&prog] {
    prog.states.push_back({StateKind::WaitRecv, std::nullopt});
    prog.states.push_back({StateKind::Recv, std::nullopt});
  };
  for (std::int32_t j = 0; j < i.value; ++j) receive();
  for (const auto t : p.targets) {
    prog.states.push_back({StateKind::WaitSend, t});
    prog.states.push_back({StateKind::Send, t});
  }
  for (std::int32_t j = i.value + 1; j <= n; ++j) receive();
  return prog;
}

inline constexpr std::int32_t kMaxCustomProcessors = 1 << 16;

/// Reads a custom permutation set: one line per processor, `i: t1,t2,...,tN`.
/// Blank lines and lines starting with '#' are ignored. Lines may come in any
/// order but must cover 0..n exactly once.
inline std::vector<Permutation> parse_permutations(std::istream& in) {
  std::vector<std::optional<std::vector<ProcessorId>>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto colon = line.find(':');
    auto bad = [&](const std::string& why) {
      return ParameterError("permutation line " + std::to_string(lineno) + ": " + why);
    };
    if (colon == std::string::npos) throw bad("missing ':'");
    std::int32_t owner = 0;
    try {
      std::size_t used = 0;
      const auto label = line.substr(0, colon);
      owner = std::stoi(label, &used);
      if (label.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw bad("bad processor id");
    }
    if (owner < 0 || owner > kMaxCustomProcessors) throw bad("processor id out of range");
    std::vector<ProcessorId> targets;
    std::stringstream ss(line.substr(colon + 1));
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      try {
        std::size_t used = 0;
        const int v = std::stoi(tok, &used);
        if (tok.find_first_not_of(" \t\r", used) != std::string::npos)
          throw bad("bad target '" + tok + "'");
        targets.push_back(pid(v));
      } catch (const ParameterError&) {
        throw;
      } catch (const std::exception&) {
        throw bad("bad target '" + tok + "'");
      }
    }
    if (rows.size() <= static_cast<std::size_t>(owner)) rows.resize(owner + 1);
    if (rows[owner]) throw bad("processor " + std::to_string(owner) + " listed twice");
    rows[owner] = std::move(targets);
  }
  if (rows.size() < 2) throw ParameterError("permutation file needs at least 2 processors");
  const auto n = static_cast<std::int32_t>(rows.size()) - 1;
  std::vector<Permutation> perms;
  perms.reserve(rows.size());
  for (std::int32_t i = 0; i <= n; ++i) {
    if (!rows[i]) throw ParameterError("permutation file has no line for processor " + std::to_string(i));
    Permutation p{pid(i), n, std::move(*rows[i])};
    if (auto v = validate_permutation(p))
      throw ParameterError("processor " + std::to_string(i) + ": " + v->message);
    perms.push_back(std::move(p));
  }
  return perms;
}

inline std::string format_permutations(const std::vector<Permutation>& perms) {
  std::string out;
  for (const auto& p : perms) {
    out += std::to_string(p.owner.value) + ":";
    for (std::size_t k = 0; k < p.targets.size(); ++k) {
      out += (k == 0 ? " " : ",");
      out += std::to_string(p.targets[k].value);
    }
    out += '\n';
  }
  return out;
}

}  // namespace pgossip
