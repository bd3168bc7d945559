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

// Run-table serialization.
//
// Text (round-trippable):
//
//   # run-table n=1 sessions=1
//   0: S1 R1
//   1: R0 S0
//
// Cells are S<j> (send to j), R<j> (receive from j), '-' (waiting to receive)
// and '*' (waiting to send). Lines starting with '#' are comments; key=value
// tokens found in them are exposed as attributes by parse_text_document().
//
// PGM output is binary P5, one pixel per slot: send 0, receive 128, wait 220.

#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "pgossip/engine.hpp"
#include "pgossip/metrics.hpp"

namespace pgossip::io {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string cell_text(const Action& a) {
  switch (a.kind) {
    case ActionKind::Send: return "S" + std::to_string(a.peer);
    case ActionKind::Recv: return "R" + std::to_string(a.peer);
    case ActionKind::WaitSend: return "*";
    case ActionKind::WaitRecv: break;
  }
  return "-";
}

inline Action parse_cell(const std::string& tok) {
  if (tok == "-") return Action::wait_recv();
  if (tok == "*") return Action::wait_send();
  if (tok.size() >= 2 && (tok[0] == 'S' || tok[0] == 'R')) {
    std::int32_t peer = 0;
    for (std::size_t k = 1; k < tok.size(); ++k) {
      if (tok[k] < '0' || tok[k] > '9' || peer > 100000000)
        throw FormatError("bad cell '" + tok + "'");
      peer = peer * 10 + (tok[k] - '0');
    }
    return tok[0] == 'S' ? Action::send(peer) : Action::recv(peer);
  }
  throw FormatError("bad cell '" + tok + "'");
}

inline std::string render_text(const RunTable& rt) {
  std::string out = "# run-table n=" + std::to_string(rt.n) +
                    " sessions=" + std::to_string(rt.sessions) + "\n";
  for (std::int32_t i = 0; i < rt.processors(); ++i) {
    out += std::to_string(i) + ":";
    for (const auto& a : rt.grid[i]) out += " " + cell_text(a);
    out += '\n';
  }
  return out;
}

struct TextDocument {
  RunTable table;
  std::map<std::string, std::string> attributes;
};

inline TextDocument parse_text_document(std::istream& in) {
  TextDocument doc;
  std::vector<std::vector<Action>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    if (line[first] == '#') {
      std::istringstream ss(line.substr(first + 1));
      std::string tok;
      while (ss >> tok)
        if (auto eq = tok.find('='); eq != std::string::npos && eq > 0)
          doc.attributes[tok.substr(0, eq)] = tok.substr(eq + 1);
      continue;
    }
    const auto colon = line.find(':');
    if (colon == std::string::npos)
      throw FormatError("line " + std::to_string(lineno) + ": missing ':'");
    const auto label = line.substr(first, colon - first);
    if (label != std::to_string(rows.size()))
      throw FormatError("line " + std::to_string(lineno) + ": expected row " +
                        std::to_string(rows.size()));
    std::istringstream ss(line.substr(colon + 1));
    std::vector<Action> row;
    std::string tok;
    while (ss >> tok) row.push_back(parse_cell(tok));
    if (!rows.empty() && row.size() != rows.front().size())
      throw FormatError("line " + std::to_string(lineno) + ": row length differs");
    rows.push_back(std::move(row));
  }
  if (rows.size() < 2) throw FormatError("run-table needs at least 2 rows");
  doc.table.n = static_cast<std::int32_t>(rows.size()) - 1;
  doc.table.grid = std::move(rows);
  auto int_attr = [&](const std::string& key, std::int32_t fallback) {
    auto it = doc.attributes.find(key);
    if (it == doc.attributes.end()) return fallback;
    try {
      return static_cast<std::int32_t>(std::stoi(it->second));
    } catch (const std::exception&) {
      throw FormatError("bad " + key + " attribute '" + it->second + "'");
    }
  };
  if (int_attr("n", doc.table.n) != doc.table.n)
    throw FormatError("header n does not match the number of rows");
  doc.table.sessions = int_attr("sessions", 1);
  if (doc.table.sessions < 1) throw FormatError("sessions must be >= 1");
  return doc;
}

inline RunTable parse_text(std::istream& in) { return parse_text_document(in).table; }

inline RunTable parse_text(const std::string& s) {
  std::istringstream in(s);
  return parse_text(in);
}

inline std::string render_nu(const UtilizationString& u, char sep = ',') {
  std::string out;
  for (std::size_t t = 0; t < u.values.size(); ++t) {
    if (t) out += sep;
    out += std::to_string(u.values[t]);
  }
  return out;
}

/// "lambda=18 mu=2.22 epsilon=44.44%" followed by the nu line; each line is
/// prefixed with "# " so the output stays parseable.
inline std::string metrics_footer(const RunTable& rt) {
  const auto m = compute_metrics(rt);
  std::string out = "# lambda=" + std::to_string(m.lambda) + " mu=" + to_fixed(m.mu, 2) +
                    " epsilon=" + percent(m.epsilon) + "%";
  if (m.steps_per_gossip) out += " steps_per_gossip=" + to_fixed(*m.steps_per_gossip, 2);
  out += "\n# nu=" + render_nu(utilization_string(rt)) + "\n";
  return out;
}

inline std::string render_csv(const RunTable& rt) {
  std::string out = "id";
  for (std::int64_t t = 1; t <= rt.length(); ++t) out += "," + std::to_string(t);
  out += '\n';
  for (std::int32_t i = 0; i < rt.processors(); ++i) {
    out += std::to_string(i);
    for (const auto& a : rt.grid[i]) out += "," + cell_text(a);
    out += '\n';
  }
  return out;
}

inline nlohmann::json to_json(const RunTable& rt) {
  using nlohmann::json;
  json grid = json::array();
  for (const auto& row : rt.grid) {
    json jr = json::array();
    for (const auto& a : row) {
      json c;
      switch (a.kind) {
        case ActionKind::Send: c = {{"k", "S"}, {"p", a.peer}}; break;
        case ActionKind::Recv: c = {{"k", "R"}, {"p", a.peer}}; break;
        case ActionKind::WaitSend: c = {{"k", "*"}}; break;
        case ActionKind::WaitRecv: c = {{"k", "-"}}; break;
      }
      jr.push_back(std::move(c));
    }
    grid.push_back(std::move(jr));
  }
  const auto m = compute_metrics(rt);
  json metrics = {{"mu", to_fixed(m.mu, 6)}, {"epsilon", to_fixed(m.epsilon, 6)}};
  if (m.steps_per_gossip) metrics["steps_per_gossip"] = to_fixed(*m.steps_per_gossip, 6);
  return json{{"n", rt.n},
              {"sessions", rt.sessions},
              {"lambda", rt.length()},
              {"grid", std::move(grid)},
              {"nu", utilization_string(rt).values},
              {"metrics", std::move(metrics)}};
}

inline std::string render_json(const RunTable& rt) { return to_json(rt).dump() + "\n"; }

inline RunTable from_json(const nlohmann::json& j) {
  try {
    RunTable rt;
    rt.n = j.at("n").get<std::int32_t>();
    rt.sessions = j.at("sessions").get<std::int32_t>();
    for (const auto& jr : j.at("grid")) {
      std::vector<Action> row;
      for (const auto& c : jr) {
        const auto k = c.at("k").get<std::string>();
        row.push_back(k == "S" || k == "R" ? parse_cell(k + std::to_string(c.at("p").get<int>()))
                                           : parse_cell(k));
      }
      rt.grid.push_back(std::move(row));
    }
    return rt;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad run-table json: ") + e.what());
  }
}

inline constexpr unsigned char kPixelSend = 0;
inline constexpr unsigned char kPixelRecv = 128;
inline constexpr unsigned char kPixelWait = 220;

/// Binary P5 image, width = lambda, height = n+1.
inline std::string render_pgm(const RunTable& rt) {
  std::string out = "P5\n" + std::to_string(rt.length()) + " " +
                    std::to_string(rt.processors()) + "\n255\n";
  out.reserve(out.size() + static_cast<std::size_t>(rt.length() * rt.processors()));
  for (const auto& row : rt.grid)
    for (const auto& a : row) {
      const auto px = a.kind == ActionKind::Send   ? kPixelSend
                      : a.kind == ActionKind::Recv ? kPixelRecv
                                                   : kPixelWait;
      out.push_back(static_cast<char>(px));
    }
  return out;
}

}  // namespace pgossip::io
