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

// Discrete-time executor for n+1 state programs over a crossbar.
//
// Each time step every unfinished processor exposes one pending operation:
// a send to a named target or a receive from any sender. A send completes only
// when its target is receiving in the same step (rendezvous). Matching is
// computed once per step from the start-of-step state, so a processor freed by
// a match cannot be matched again in that step.
//
// Receives are tagged with the session (program repetition) they belong to and
// only accept sends of that same session.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pgossip/fsa.hpp"

namespace pgossip {

enum class ActionKind : std::uint8_t { WaitRecv, Send, Recv, WaitSend };

struct Action {
  ActionKind kind = ActionKind::WaitRecv;
  std::int32_t peer = -1;  // valid for Send/Recv only

  static constexpr Action send(std::int32_t to) { return {ActionKind::Send, to}; }
  static constexpr Action recv(std::int32_t from) { return {ActionKind::Recv, from}; }
  static constexpr Action wait_recv() { return {ActionKind::WaitRecv, -1}; }
  static constexpr Action wait_send() { return {ActionKind::WaitSend, -1}; }

  constexpr bool used() const {
    return kind == ActionKind::Send || kind == ActionKind::Recv;
  }

  constexpr bool operator==(const Action&) const = default;
};

/// The (n+1) x length grid of a run. grid[i][t] is processor i's action at
/// time step t+1.
struct RunTable {
  std::int32_t n = 0;
  std::int32_t sessions = 1;
  std::vector<std::vector<Action>> grid;

  std::int64_t length() const {
    return grid.empty() ? 0 : static_cast<std::int64_t>(grid.front().size());
  }
  std::int32_t processors() const { return static_cast<std::int32_t>(grid.size()); }
  const Action& at(std::int32_t i, std::int64_t t) const {
    return grid[static_cast<std::size_t>(i)][static_cast<std::size_t>(t)];
  }

  bool operator==(const RunTable&) const = default;
};

enum class TieBreak : std::uint8_t { LowestSenderId };

struct SimConfig {
  TieBreak tie_break = TieBreak::LowestSenderId;
  bool optimizer = false;
  std::int32_t sessions = 1;
  std::int64_t max_steps = 0;  // 0 selects default_max_steps()
};

inline std::int64_t default_max_steps(std::int32_t n, std::int32_t sessions) {
  const std::int64_t nn = n;
  return 4 * (nn + 1) * (nn + static_cast<std::int64_t>(sessions) * nn);
}

/// Base for run failures; carries the table built up to the failing step.
class SimulationError : public std::runtime_error {
 public:
  SimulationError(const std::string& what, RunTable partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const RunTable& partial() const { return partial_; }

 private:
  RunTable partial_;
};

class DeadlockError : public SimulationError {
 public:
  using SimulationError::SimulationError;
};

class RunawayError : public SimulationError {
 public:
  using SimulationError::SimulationError;
};

namespace detail {

struct Op {
  bool is_send = false;
  std::int32_t target = -1;
};

/// One session's worth of operations for one processor, plus for every send
/// the bounds of the contiguous send block it belongs to.
struct Body {
  std::vector<Op> ops;
  std::vector<std::int32_t> block_begin;
  std::vector<std::int32_t> block_end;
};

inline Body lower_program(const FsaProgram& prog, std::int32_t n) {
  Body body;
  for (const auto& st : prog.states) {
    if (st.kind == StateKind::Recv) {
      body.ops.push_back({false, -1});
    } else if (st.kind == StateKind::Send) {
      if (!st.target) throw ParameterError("send state without a target");
      const auto t = st.target->value;
      if (t < 0 || t > n || t == prog.owner.value)
        throw ParameterError("processor " + std::to_string(prog.owner.value) +
                             " sends to invalid target " + std::to_string(t));
      body.ops.push_back({true, t});
    }
  }
  const auto len = static_cast<std::int32_t>(body.ops.size());
  body.block_begin.assign(body.ops.size(), -1);
  body.block_end.assign(body.ops.size(), -1);
  for (std::int32_t k = 0; k < len;) {
    if (!body.ops[k].is_send) {
      ++k;
      continue;
    }
    std::int32_t end = k;
    while (end < len && body.ops[end].is_send) ++end;
    for (std::int32_t q = k; q < end; ++q) {
      body.block_begin[q] = k;
      body.block_end[q] = end;
    }
    k = end;
  }
  return body;
}

class Executor {
 public:
  Executor(std::span<const FsaProgram> programs, const SimConfig& cfg)
      : cfg_(cfg) {
    if (programs.size() < 2)
      throw ParameterError("a run needs at least 2 processors");
    if (cfg.sessions < 1) throw ParameterError("sessions must be >= 1");
    if (cfg.max_steps < 0) throw ParameterError("max_steps must be >= 1");
    n_ = static_cast<std::int32_t>(programs.size()) - 1;
    for (std::int32_t i = 0; i <= n_; ++i) {
      if (programs[i].owner.value != i)
        throw ParameterError("program " + std::to_string(i) + " is owned by " +
                             std::to_string(programs[i].owner.value));
      bodies_.push_back(lower_program(programs[i], n_));
    }
    max_steps_ = cfg.max_steps > 0 ? cfg.max_steps : default_max_steps(n_, cfg.sessions);
    const auto procs = static_cast<std::size_t>(n_) + 1;
    pc_.assign(procs, 0);
    served_.resize(procs);
    for (std::size_t i = 0; i < procs; ++i) served_[i].assign(bodies_[i].ops.size(), 0);
    pending_.resize(procs);
    claimed_.assign(procs, 0);
    choice_.assign(procs, -1);
    table_.n = n_;
    table_.sessions = cfg.sessions;
    table_.grid.resize(procs);
  }

  RunTable run() {
    std::int64_t step = 0;
    while (collect_pending()) {
      if (step >= max_steps_)
        throw RunawayError("run exceeded " + std::to_string(max_steps_) + " steps",
                           table_);
      if (match() == 0)
        throw DeadlockError("deadlock at step " + std::to_string(step + 1), table_);
      emit();
      ++step;
    }
    return std::move(table_);
  }

 private:
  struct Pending {
    bool finished = true;
    bool is_send = false;
    std::int32_t target = -1;
    std::int64_t session = 0;
    std::int32_t local = 0;  // index into the session body
  };

  std::int64_t total_ops(std::size_t i) const {
    return static_cast<std::int64_t>(bodies_[i].ops.size()) * cfg_.sessions;
  }

  bool collect_pending() {
    bool any = false;
    for (std::size_t i = 0; i < pending_.size(); ++i) {
      auto& p = pending_[i];
      const auto& body = bodies_[i];
      if (pc_[i] >= total_ops(i)) {
        p = Pending{};
        continue;
      }
      any = true;
      const auto len = static_cast<std::int64_t>(body.ops.size());
      p.finished = false;
      p.session = pc_[i] / len;
      p.local = static_cast<std::int32_t>(pc_[i] % len);
      p.is_send = body.ops[p.local].is_send;
      p.target = body.ops[p.local].target;
    }
    return any;
  }

  bool receivable(std::int32_t j, std::int64_t session) const {
    const auto& p = pending_[j];
    return !p.finished && !p.is_send && p.session == session && !claimed_[j];
  }

  // Target substitution: keep the permutation order when the current target
  // is ready, otherwise take the first unserved target of the block that is.
  std::int32_t choose_optimized(std::size_t s) {
    const auto& p = pending_[s];
    const auto& body = bodies_[s];
    auto& served = served_[s];
    const auto begin = body.block_begin[p.local];
    const auto end = body.block_end[p.local];
    if (p.local == begin)
      std::fill(served.begin() + begin, served.begin() + end, 0);
    // Sends already done in this block == p.local - begin, so the nominal
    // next position is p.local itself.
    if (!served[p.local] && receivable(body.ops[p.local].target, p.session))
      return p.local;
    for (std::int32_t l = begin; l < end; ++l)
      if (!served[l] && receivable(body.ops[l].target, p.session)) return l;
    return -1;
  }

  std::size_t match() {
    std::fill(claimed_.begin(), claimed_.end(), 0);
    std::fill(choice_.begin(), choice_.end(), -1);
    std::size_t matched = 0;
    // Ascending sender id realises the lowest-id tie-break in both modes.
    for (std::size_t s = 0; s < pending_.size(); ++s) {
      const auto& p = pending_[s];
      if (p.finished || !p.is_send) continue;
      std::int32_t target = -1;
      if (cfg_.optimizer) {
        const auto pos = choose_optimized(s);
        if (pos >= 0) {
          served_[s][pos] = 1;
          target = bodies_[s].ops[pos].target;
        }
      } else if (receivable(p.target, p.session)) {
        target = p.target;
      }
      if (target >= 0) {
        claimed_[target] = 1;
        choice_[s] = target;
        ++matched;
      }
    }
    return matched;
  }

  void emit() {
    std::vector<Action> column(pending_.size(), Action::wait_recv());
    for (std::size_t s = 0; s < pending_.size(); ++s) {
      const auto& p = pending_[s];
      if (p.finished || !p.is_send) continue;
      const auto t = choice_[s];
      if (t < 0) {
        column[s] = Action::wait_send();
        continue;
      }
      column[s] = Action::send(t);
      column[t] = Action::recv(static_cast<std::int32_t>(s));
      ++pc_[s];
      ++pc_[t];
    }
    for (std::size_t i = 0; i < column.size(); ++i) table_.grid[i].push_back(column[i]);
  }

  SimConfig cfg_;
  std::int32_t n_ = 0;
  std::int64_t max_steps_ = 0;
  std::vector<Body> bodies_;
  std::vector<std::int64_t> pc_;
  std::vector<std::vector<char>> served_;
  std::vector<Pending> pending_;
  std::vector<char> claimed_;
  std::vector<std::int32_t> choice_;
  RunTable table_;
};

inline std::vector<FsaProgram> compose_all(std::int32_t n,
                                           std::span<const Permutation> perms) {
  if (n < 1) throw ParameterError("n must be >= 1");
  if (perms.size() != static_cast<std::size_t>(n) + 1)
    throw ParameterError("expected " + std::to_string(n + 1) + " permutations, got " +
                         std::to_string(perms.size()));
  std::vector<FsaProgram> programs;
  programs.reserve(perms.size());
  for (std::int32_t i = 0; i <= n; ++i) programs.push_back(compose_fsa(pid(i), n, perms[i]));
  return programs;
}

}  // namespace detail

/// Executes arbitrary programs (one per processor, indexed by owner), each
/// repeated cfg.sessions times. compose_fsa programs never deadlock; hand-built
/// ones may.
inline RunTable run_programs(std::span<const FsaProgram> programs,
                             const SimConfig& cfg) {
  return detail::Executor(programs, cfg).run();
}

/// Plain run: every processor follows its permutation strictly.
inline RunTable simulate(std::int32_t n, std::span<const Permutation> perms,
                         const SimConfig& cfg = {}) {
  if (cfg.optimizer) throw ParameterError("simulate requires optimizer = false");
  const auto programs = detail::compose_all(n, perms);
  return run_programs(programs, cfg);
}

/// Run with on-the-fly target substitution: a broadcaster whose current
/// target cannot receive this step sends to the first unserved target, in
/// permutation order, that can. Broadcasters decide in ascending id order,
/// each seeing the claims made before it.
inline RunTable simulate_optimized(std::int32_t n,
                                   std::span<const Permutation> perms,
                                   const SimConfig& cfg) {
  if (!cfg.optimizer) throw ParameterError("simulate_optimized requires optimizer = true");
  const auto programs = detail::compose_all(n, perms);
  return run_programs(programs, cfg);
}

/// Runs g back-to-back gossiping sessions; each processor repeats its
/// program body g times.
inline RunTable simulate_sessions(std::int32_t n,
                                  std::span<const Permutation> perms,
                                  std::int32_t g, SimConfig cfg = {}) {
  if (g < 1) throw ParameterError("sessions must be >= 1");
  cfg.sessions = g;
  return cfg.optimizer ? simulate_optimized(n, perms, cfg) : simulate(n, perms, cfg);
}

enum class RunViolationKind : std::uint8_t {
  Malformed,
  InvalidPeer,
  BrokenRendezvous,
  DuplicateMessage,
  SessionMismatch,
  ProgramOrder,
  MissingMessage,
  IdleColumn,
};

struct RunViolation {
  RunViolationKind kind;
  std::string message;
};

/// Checks a run-table against the model: rendezvous pairing, the three-phase
/// program shape per session (which includes the broadcast gate: processor i
/// sends only after i receives of the current session), session consistency
/// of every message, exactly `sessions` messages per ordered pair and no
/// all-wait column. Returns the first violation, or nullopt.
inline std::optional<RunViolation> verify_run(const RunTable& rt) {
  auto fail = [](RunViolationKind k, std::string msg) {
    return std::optional<RunViolation>(RunViolation{k, std::move(msg)});
  };
  const auto n = rt.n;
  if (n < 1 || rt.sessions < 1 ||
      rt.grid.size() != static_cast<std::size_t>(n) + 1)
    return fail(RunViolationKind::Malformed, "grid does not have n+1 rows");
  const auto len = rt.length();
  for (const auto& row : rt.grid)
    if (static_cast<std::int64_t>(row.size()) != len)
      return fail(RunViolationKind::Malformed, "rows have different lengths");

  auto cell = [](std::int32_t i, std::int64_t t) {
    return "(" + std::to_string(i) + ", " + std::to_string(t + 1) + ")";
  };

  for (std::int64_t t = 0; t < len; ++t) {
    for (std::int32_t i = 0; i <= n; ++i) {
      const auto& a = rt.at(i, t);
      if (!a.used()) continue;
      if (a.peer < 0 || a.peer > n || a.peer == i)
        return fail(RunViolationKind::InvalidPeer, "invalid peer at " + cell(i, t));
      const auto& b = rt.at(a.peer, t);
      const auto want = a.kind == ActionKind::Send ? ActionKind::Recv : ActionKind::Send;
      if (b.kind != want || b.peer != i)
        return fail(RunViolationKind::BrokenRendezvous,
                    "broken rendezvous at " + cell(i, t));
    }
  }

  const std::int64_t per_session = 2 * static_cast<std::int64_t>(n);
  // session index of every used cell, for the cross-row consistency check
  std::vector<std::vector<std::int32_t>> session_of(
      static_cast<std::size_t>(n) + 1, std::vector<std::int32_t>(static_cast<std::size_t>(len), -1));
  // pair_count[i*(n+1)+j][k]: messages i->j in session k
  std::vector<std::int32_t> pair_count(
      static_cast<std::size_t>(n + 1) * static_cast<std::size_t>(n + 1) *
          static_cast<std::size_t>(rt.sessions),
      0);
  auto pair_slot = [&](std::int32_t i, std::int32_t j, std::int64_t k) -> std::int32_t& {
    return pair_count[(static_cast<std::size_t>(i) * (n + 1) + j) * rt.sessions +
                      static_cast<std::size_t>(k)];
  };

  for (std::int32_t i = 0; i <= n; ++i) {
    std::int64_t done = 0;
    for (std::int64_t t = 0; t < len; ++t) {
      const auto& a = rt.at(i, t);
      if (!a.used()) continue;
      const auto k = done / per_session;
      const auto local = done % per_session;
      if (k >= rt.sessions)
        return fail(RunViolationKind::ProgramOrder,
                    "processor " + std::to_string(i) + " acts after its last session at " +
                        cell(i, t));
      session_of[i][t] = static_cast<std::int32_t>(k);
      if (a.kind == ActionKind::Send) {
        if (++pair_slot(i, a.peer, k) > 1)
          return fail(RunViolationKind::DuplicateMessage,
                      "duplicate message " + std::to_string(i) + "->" +
                          std::to_string(a.peer) + " in session " + std::to_string(k + 1) +
                          " at " + cell(i, t));
      }
      const bool should_send = local >= i && local < i + n;
      if ((a.kind == ActionKind::Send) != should_send)
        return fail(RunViolationKind::ProgramOrder,
                    std::string(should_send ? "receive" : "send") +
                        " out of program order at " + cell(i, t));
      ++done;
    }
    if (done != per_session * rt.sessions)
      return fail(RunViolationKind::MissingMessage,
                  "processor " + std::to_string(i) + " completed " + std::to_string(done) +
                      " of " + std::to_string(per_session * rt.sessions) + " operations");
  }

  for (std::int64_t t = 0; t < len; ++t)
    for (std::int32_t i = 0; i <= n; ++i) {
      const auto& a = rt.at(i, t);
      if (a.kind == ActionKind::Send && session_of[i][t] != session_of[a.peer][t])
        return fail(RunViolationKind::SessionMismatch,
                    "session " + std::to_string(session_of[i][t] + 1) +
                        " message received in session " +
                        std::to_string(session_of[a.peer][t] + 1) + " at " + cell(i, t));
    }

  for (std::int32_t i = 0; i <= n; ++i)
    for (std::int32_t j = 0; j <= n; ++j)
      for (std::int32_t k = 0; i != j && k < rt.sessions; ++k)
        if (pair_slot(i, j, k) != 1)
          return fail(RunViolationKind::MissingMessage,
                      "no message " + std::to_string(i) + "->" + std::to_string(j) +
                          " in session " + std::to_string(k + 1));

  for (std::int64_t t = 0; t < len; ++t) {
    bool any = false;
    for (std::int32_t i = 0; i <= n && !any; ++i) any = rt.at(i, t).used();
    if (!any)
      return fail(RunViolationKind::IdleColumn,
                  "column " + std::to_string(t + 1) + " has no communication");
  }
  return std::nullopt;
}

}  // namespace pgossip
