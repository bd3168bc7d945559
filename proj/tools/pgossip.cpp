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

// pgossip command-line driver.
//
// Exit codes: 0 success, 1 validation failure, 2 bad flags or input,
// 3 deadlock or runaway run, 4 output I/O error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pgossip/engine.hpp"
#include "pgossip/fsa.hpp"
#include "pgossip/io.hpp"
#include "pgossip/metrics.hpp"
#include "pgossip/validate.hpp"

namespace {

namespace pv = pgossip::validate;

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitRunFailed = 3;
constexpr int kExitIo = 4;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Writes to `path`, or standard output for "" / "-".
void write_output(const std::string& path, const std::string& data, bool binary = false) {
  if (path.empty() || path == "-") {
    std::cout << data;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << data;
  if (!out) throw IoError("write to '" + path + "' failed");
}

struct RunOptions {
  std::int32_t n = -1;
  std::string strategy = "identity";
  std::uint64_t seed = 1;
  bool optimize = false;
  std::int32_t sessions = 1;
  std::string format = "text";
  std::string out;
  std::int64_t max_steps = 0;
};

std::vector<pgossip::Permutation> build_permutations(RunOptions& opt) {
  constexpr std::string_view kCustom = "custom:";
  if (opt.strategy.starts_with(kCustom)) {
    const auto path = opt.strategy.substr(kCustom.size());
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read permutation file '" + path + "'");
    auto perms = pgossip::parse_permutations(in);
    const auto n = static_cast<std::int32_t>(perms.size()) - 1;
    if (opt.n >= 0 && opt.n != n)
      throw UsageError("--n " + std::to_string(opt.n) + " does not match the " +
                       std::to_string(n + 1) + " processors in '" + path + "'");
    opt.n = n;
    return perms;
  }
  const auto s = pv::parse_strategy(opt.strategy);
  if (!s || s->optimized) throw UsageError("unknown strategy '" + opt.strategy + "'");
  if (opt.n < 0) throw UsageError("--n is required");
  if (opt.n < 1) throw UsageError("n must be ≥ 1");
  return pv::make_permutations(s->family, opt.n, opt.seed);
}

std::string write_partial(const pgossip::SimulationError& e) {
  std::error_code ec;
  auto path = std::filesystem::temp_directory_path(ec) / "pgossip-partial.txt";
  try {
    std::ofstream out(path);
    out << pgossip::io::render_text(e.partial());
    if (out) return path.string();
  } catch (const std::exception&) {
  }
  return "(not saved)";
}

int cmd_run(RunOptions opt) {
  if (opt.format == "pgm" && (opt.out.empty() || opt.out == "-"))
    throw UsageError("--format pgm requires --out <file>");
  if (opt.sessions < 1) throw UsageError("sessions must be ≥ 1");
  const auto perms = build_permutations(opt);

  pgossip::SimConfig cfg;
  cfg.optimizer = opt.optimize;
  cfg.max_steps = opt.max_steps;
  pgossip::RunTable rt;
  try {
    rt = pgossip::simulate_sessions(opt.n, perms, opt.sessions, cfg);
  } catch (const pgossip::SimulationError& e) {
    std::cerr << "pgossip: " << e.what() << "; partial run-table written to "
              << write_partial(e) << "\n";
    return kExitRunFailed;
  }
  if (auto v = pgossip::verify_run(rt)) {
    std::cerr << "pgossip: run failed verification: " << v->message << "\n";
    return kExitRunFailed;
  }

  if (opt.format == "text") {
    write_output(opt.out, pgossip::io::render_text(rt) + pgossip::io::metrics_footer(rt));
  } else if (opt.format == "csv") {
    write_output(opt.out, pgossip::io::render_csv(rt) + pgossip::io::metrics_footer(rt));
  } else if (opt.format == "json") {
    write_output(opt.out, pgossip::io::render_json(rt));
  } else {
    write_output(opt.out, pgossip::io::render_pgm(rt), true);
    std::cerr << pgossip::io::metrics_footer(rt);
  }
  return kExitOk;
}

struct SweepOptions {
  std::string strategy = "identity";
  bool optimize = false;
  std::int32_t n_min = 1;
  std::int32_t n_max = 10;
  std::int32_t n_step = 1;
  std::vector<std::uint64_t> seeds;
  std::string out;
};

int cmd_sweep(const SweepOptions& opt) {
  auto s = pv::parse_strategy(opt.strategy);
  if (!s) throw UsageError("unknown strategy '" + opt.strategy + "'");
  s->optimized = s->optimized || opt.optimize;
  if (opt.n_min < 1 || opt.n_max < opt.n_min)
    throw UsageError("bad range: need 1 ≤ n-min ≤ n-max");
  if (opt.n_step < 1) throw UsageError("n-step must be ≥ 1");
  const auto records = pv::sweep(*s, opt.n_min, opt.n_max, opt.seeds, opt.n_step);
  write_output(opt.out, pv::render_sweep_csv(records));
  return kExitOk;
}

struct ValidateOptions {
  std::int32_t n_max = 50;
  bool golden = false;
  bool conjecture = false;
  std::string fixtures = PGOSSIP_GOLDEN_DIR;
};

int cmd_validate(const ValidateOptions& opt) {
  bool ok = true;
  if (opt.n_max >= 2) {
    const auto rep = pv::check_propositions(opt.n_max);
    std::cout << pv::render_report(rep);
    ok = ok && rep.ok();
  } else {
    std::cout << "closed-form checks skipped (n-max < 2)\n";
  }
  if (opt.golden) {
    const auto rep = pv::golden_tables(opt.fixtures);
    std::cout << "golden run-tables (" << rep.results.size() << " comparisons):\n"
              << pv::render_report(rep);
    ok = ok && rep.ok();
  }
  if (opt.conjecture) {
    const auto n_max = std::max(opt.n_max, 2);
    // exploratory: never affects the exit status
    std::cout << pv::render_report(pv::conjecture_scan(
        {{pv::Family::Identity, false}, {pv::Family::Pipelined, false},
         {pv::Family::Identity, true}, {pv::Family::Random, false}},
        n_max));
  }
  std::cout << (ok ? "all checks passed\n" : "CHECKS FAILED\n");
  return ok ? kExitOk : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synchronous gossiping simulator"};
  app.require_subcommand(1);

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "simulate one run and print its run-table");
  run_cmd->add_option("--n", run.n, "largest processor id (n+1 processors)");
  run_cmd->add_option("--strategy", run.strategy,
                      "identity | pipelined | random | custom:<file>");
  run_cmd->add_option("--seed", run.seed, "seed for the random strategy");
  run_cmd->add_flag("--optimize", run.optimize, "enable target substitution");
  run_cmd->add_option("--sessions", run.sessions, "back-to-back gossiping sessions");
  run_cmd->add_option("--format", run.format, "output format")
      ->check(CLI::IsMember({"text", "csv", "json", "pgm"}));
  run_cmd->add_option("--out", run.out, "output file (default: standard output)");
  run_cmd->add_option("--max-steps", run.max_steps, "safety bound on run length (0 = default)");

  SweepOptions sw;
  auto* sweep_cmd = app.add_subcommand("sweep", "emit CSV metrics over a range of n");
  sweep_cmd->add_option("--strategy", sw.strategy, "identity | pipelined | random [+opt]");
  sweep_cmd->add_flag("--optimize", sw.optimize, "enable target substitution");
  sweep_cmd->add_option("--n-min", sw.n_min)->required();
  sweep_cmd->add_option("--n-max", sw.n_max)->required();
  sweep_cmd->add_option("--n-step", sw.n_step);
  sweep_cmd->add_option("--seeds", sw.seeds, "comma-separated seeds (random strategy)")
      ->delimiter(',');
  sweep_cmd->add_option("--out", sw.out, "output file (default: standard output)");

  ValidateOptions val;
  auto* val_cmd = app.add_subcommand("validate", "check runs against closed forms and fixtures");
  val_cmd->add_option("--n-max", val.n_max, "largest n for the closed-form checks");
  val_cmd->add_flag("--golden", val.golden, "regenerate the reference run-tables");
  val_cmd->add_flag("--conjecture", val.conjecture, "scan efficiency against 2/3");
  val_cmd->add_option("--fixtures", val.fixtures, "golden fixture directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (run_cmd->parsed()) return cmd_run(run);
    if (sweep_cmd->parsed()) return cmd_sweep(sw);
    return cmd_validate(val);
  } catch (const UsageError& e) {
    std::cerr << "pgossip: " << e.what() << "\n";
    return kExitUsage;
  } catch (const pgossip::ParameterError& e) {
    std::cerr << "pgossip: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IoError& e) {
    std::cerr << "pgossip: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "pgossip: " << e.what() << "\n";
    return kExitRunFailed;
  }
}
