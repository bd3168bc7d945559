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


#include <gtest/gtest.h>

#include "pgossip/validate.hpp"

namespace pgossip::validate {
namespace {

TEST(Strategies, ParseAndName) {
  for (const char* text : {"identity", "pipelined", "random", "identity+opt", "pipelined+opt",
                           "random+opt"}) {
    const auto s = parse_strategy(text);
    ASSERT_TRUE(s.has_value()) << text;
    EXPECT_EQ(to_string(*s), text);
  }
  EXPECT_FALSE(parse_strategy("").has_value());
  EXPECT_FALSE(parse_strategy("+opt").has_value());
  EXPECT_FALSE(parse_strategy("Identity").has_value());
}

TEST(Strategies, MakePermutations) {
  EXPECT_THROW(make_permutations(Family::Identity, 0), ParameterError);
  const auto perms = make_permutations(Family::Random, 6, 9);
  ASSERT_EQ(perms.size(), 7u);
  for (std::int32_t i = 0; i <= 6; ++i) EXPECT_EQ(perms[i], random_permutation(pid(i), 6, 9));
}

TEST(Propositions, HoldUpToTen) {
  const auto rep = check_propositions(10);
  EXPECT_TRUE(rep.ok()) << render_report(rep);
  EXPECT_EQ(rep.identity_max, 10);
  EXPECT_GT(rep.checks, 40);
}

TEST(Propositions, IdentityCap) {
  const auto rep = check_propositions(12, 5);
  EXPECT_TRUE(rep.ok());
  EXPECT_EQ(rep.identity_max, 5);
  EXPECT_THROW(check_propositions(1), ParameterError);
}

TEST(Propositions, ReportWording) {
  PropositionReport rep;
  rep.n_max = 3;
  rep.identity_max = 3;
  rep.checks = 1;
  rep.mismatches.push_back({"identity length", 3, "lambda 12 != 11", "table"});
  const auto text = render_report(rep);
  EXPECT_NE(text.find("1 mismatches"), std::string::npos);
  EXPECT_NE(text.find("lambda 12 != 11"), std::string::npos);
}

TEST(Golden, AllReferenceTablesMatch) {
  const auto rep = golden_tables(PGOSSIP_GOLDEN_DIR);
  ASSERT_EQ(rep.results.size(), 6u);
  EXPECT_TRUE(rep.ok()) << render_report(rep);
  for (const auto& r : rep.results) EXPECT_TRUE(r.grid_ok) << r.which.file;
}

TEST(Golden, MissingFixturesFail) {
  const auto rep = golden_tables("/nonexistent/fixtures");
  EXPECT_FALSE(rep.ok());
  for (const auto& r : rep.results) EXPECT_FALSE(r.loaded);
}

TEST(Golden, GridDiffPointsAtCells) {
  const auto a = run_strategy({Family::Identity, false}, 2);
  auto b = a;
  b.grid[1][1] = Action::wait_recv();
  const auto diff = grid_diff(a, b);
  EXPECT_NE(diff.find("*"), std::string::npos);
  EXPECT_EQ(grid_diff(a, a), "");
  EXPECT_NE(grid_diff(a, run_strategy({Family::Identity, false}, 3)).find("shape"),
            std::string::npos);
}

TEST(Sweep, RecordsAndCsv) {
  const auto recs = sweep({Family::Pipelined, false}, 2, 6, {}, 2);
  ASSERT_EQ(recs.size(), 3u);
  EXPECT_EQ(recs[0].n, 2);
  EXPECT_EQ(recs[2].n, 6);
  EXPECT_EQ(recs[1].lambda, 12);
  EXPECT_FALSE(recs[0].seed.has_value());
  EXPECT_EQ(render_sweep_csv(recs),
            "strategy,n,seed,lambda,mu,epsilon\n"
            "pipelined,2,,6,2.000000,0.666667\n"
            "pipelined,4,,12,3.333333,0.666667\n"
            "pipelined,6,,18,4.666667,0.666667\n");
}

TEST(Sweep, DeterministicAndSortedForRandom) {
  const auto a = sweep({Family::Random, false}, 3, 8, {5, 2, 9});
  const auto b = sweep({Family::Random, false}, 3, 8, {5, 2, 9});
  EXPECT_EQ(render_sweep_csv(a), render_sweep_csv(b));
  ASSERT_EQ(a.size(), 18u);
  for (std::size_t k = 1; k < a.size(); ++k)
    EXPECT_TRUE(a[k - 1].n < a[k].n || (a[k - 1].n == a[k].n && *a[k - 1].seed < *a[k].seed));
  EXPECT_EQ(sweep({Family::Random, false}, 3, 3).front().seed, std::optional<std::uint64_t>(1));
}

TEST(Sweep, RejectsBadRanges) {
  EXPECT_THROW(sweep({Family::Identity, false}, 0, 3), ParameterError);
  EXPECT_THROW(sweep({Family::Identity, false}, 4, 3), ParameterError);
  EXPECT_THROW(sweep({Family::Identity, false}, 1, 3, {}, 0), ParameterError);
}

TEST(Sweep, OptimizedPowersOfTwoMinusOne) {
  const std::vector<std::int64_t> lambda = {2, 7, 19, 42, 89, 185, 376, 760};
  const std::vector<std::string> eps = {"100.00", "85.71", "73.68", "71.43",
                                        "69.66",  "68.11", "67.55", "67.11"};
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    const auto n = static_cast<std::int32_t>((1 << (i + 1)) - 1);
    const auto m = compute_metrics(run_strategy({Family::Identity, true}, n));
    EXPECT_EQ(m.lambda, lambda[i]) << "n=" << n;
    EXPECT_EQ(percent(m.epsilon), eps[i]) << "n=" << n;
  }
}

TEST(Conjecture, ScanPoints) {
  const Strategy s{Family::Random, false};
  auto r = scan_points(s, {{3, Rational(1, 2)}, {1, Rational(1)}, {2, Rational(2, 3)}});
  EXPECT_EQ(r.points.front().first, 1);
  EXPECT_EQ(r.last_above, std::optional<std::int32_t>(1));
  EXPECT_EQ(r.m, std::optional<std::int32_t>(1));
  EXPECT_FALSE(r.tail_equals_bound);

  r = scan_points(s, {{1, Rational(1, 2)}, {2, Rational(1)}});
  EXPECT_FALSE(r.m.has_value());

  r = scan_points(s, {{4, Rational(1, 2)}, {5, Rational(1, 3)}});
  EXPECT_EQ(r.m, std::optional<std::int32_t>(3));
  EXPECT_FALSE(r.last_above.has_value());

  EXPECT_FALSE(scan_points(s, {}).m.has_value());
}

TEST(Conjecture, PlainFamilies) {
  const auto res = conjecture_scan({{Family::Identity, false}, {Family::Pipelined, false}}, 40);
  ASSERT_EQ(res.size(), 2u);
  EXPECT_EQ(res[0].m, std::optional<std::int32_t>(1));
  EXPECT_FALSE(res[0].tail_equals_bound);
  EXPECT_EQ(res[1].m, std::optional<std::int32_t>(1));
  EXPECT_TRUE(res[1].tail_equals_bound);
  EXPECT_EQ(res[1].points.size(), 40u);
  const auto text = render_report(res);
  EXPECT_NE(text.find("not a proof"), std::string::npos);
}

TEST(Conjecture, OptimizedIdentityStaysAboveTwoThirds) {
  const auto res = conjecture_scan({{Family::Identity, true}}, 511, {1, 3, 7, 15, 31, 63, 127, 255, 511});
  ASSERT_EQ(res.size(), 1u);
  EXPECT_FALSE(res[0].m.has_value());
  EXPECT_EQ(res[0].last_above, std::optional<std::int32_t>(511));
  EXPECT_EQ(percent(res[0].points.back().second), "66.88");
}

TEST(Conjecture, RespectsIdentityCap) {
  const auto res = conjecture_scan({{Family::Identity, false}}, 400, {100, 200, 400});
  ASSERT_EQ(res[0].points.size(), 1u);
  EXPECT_THROW(conjecture_scan({}, 1), ParameterError);
}

}  // namespace
}  // namespace pgossip::validate
