// Copyright 2026 The GCA Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "gca/harness.hpp"
#include "gca/io.hpp"

#include "reference.hpp"
#include "test_support.hpp"

#include "gtest/gtest.h"

#include <cmath>

using namespace gca;
using gca::testing::i1;
using gca::testing::i2;
using gca::testing::i3;
using gca::testing::random_corpus;
using gca::testing::read_fixture;

TEST(RngTest, BoundedDraws)
{
  Rng rng(7);
  for (int k = 0; k < 1000; ++k)
  {
    EXPECT_EQ(rng.below(1), 0u);
    auto const v = rng.between(3, 5);
    EXPECT_GE(v, 3u);
    EXPECT_LE(v, 5u);
    auto const u = rng.unit();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
  EXPECT_THROW(rng.below(0), std::invalid_argument);
}

TEST(GenRandomInstanceTest, EmptyAndDeterministic)
{
  EXPECT_TRUE(gen_random_instance(GenParams{0, 3, 2, 1.0, 2.0, 9}).empty());

  GenParams const params{12, 7, 3, 1.0, 100.0, 1234};
  EXPECT_EQ(gen_random_instance(params), gen_random_instance(params));
  auto other = params;
  other.seed = 1235;
  EXPECT_NE(gen_random_instance(params), gen_random_instance(other));
}

TEST(GenRandomInstanceTest, RespectsParameters)
{
  for (std::uint64_t seed = 0; seed < 100; ++seed)
  {
    GenParams const params{10, 6, 4, 2.5, 7.5, seed};
    auto const      instance = gen_random_instance(params);
    ASSERT_EQ(instance.size(), 10u);
    EXPECT_EQ(instance.num_experts(), 6u);
    for (auto const &bid : instance.bids())
    {
      EXPECT_GE(bid.demand.size(), 1u);
      EXPECT_LE(bid.demand.size(), 4u);
      EXPECT_GE(bid.valuation, 2.5);
      EXPECT_LE(bid.valuation, 7.5);
      EXPECT_NEAR(bid.valuation * 1e6, std::round(bid.valuation * 1e6), 1e-6);
    }
  }
}

TEST(GenRandomInstanceTest, RejectsInvalidParameters)
{
  EXPECT_THROW(gen_random_instance(GenParams{3, 4, 0, 1.0, 2.0, 0}), std::invalid_argument);
  EXPECT_THROW(gen_random_instance(GenParams{3, 4, 5, 1.0, 2.0, 0}), std::invalid_argument);
  EXPECT_THROW(gen_random_instance(GenParams{3, 4, 2, -1.0, 2.0, 0}), std::invalid_argument);
  EXPECT_THROW(gen_random_instance(GenParams{3, 4, 2, 2.0, 2.0, 0}), std::invalid_argument);
}

TEST(GenRandomInstanceTest, GoldenInstanceReplays)
{
  auto const instance = gen_random_instance(GenParams{5, 4, 2, 1.0, 10.0, 42});
  EXPECT_EQ(instance, parse_instance(read_fixture("gen_n5_m4_b2_s42.gca")));

  auto const greedy = run_mechanism(instance, PaymentRule::kPaperLiteral).welfare;
  auto const opt    = optimal_welfare(instance).opt_welfare;
  EXPECT_LE(greedy, opt + 1e-9);
  EXPECT_GE(greedy, opt / 2.0 - 1e-9);
  EXPECT_TRUE(verify_conflict_free(instance, greedy_allocate(instance).winners));
}

TEST(CorpusTest, ParamsFollowShape)
{
  CorpusShape const shape{1, 10, 2, 8, 1.0, 100.0};
  auto const        corpus = make_corpus(1, 500, shape);
  ASSERT_EQ(corpus.size(), 500u);
  for (auto const &params : corpus)
  {
    EXPECT_GE(params.n, 1u);
    EXPECT_LE(params.n, 10u);
    EXPECT_GE(params.m, 2u);
    EXPECT_LE(params.m, 8u);
    EXPECT_GE(params.max_bundle, 1u);
    EXPECT_LE(params.max_bundle, params.m);
  }
  EXPECT_EQ(corpus.front().seed, 1u);
  EXPECT_EQ(corpus.back().seed, 500u);
  EXPECT_EQ(make_corpus(5, 5, shape).size(), 1u);
}

TEST(CheckIcTest, CriticalRuleHasNoViolations)
{
  for (auto const &instance : random_corpus(40, 8000))
  {
    for (auto const &report : check_ic(instance, PaymentRule::kCritical, 5))
    {
      EXPECT_FALSE(report.violation);
    }
  }
}

TEST(CheckIcTest, ConflictChainBreaksLiteralRule)
{
  auto const reports = check_ic(i3(), PaymentRule::kPaperLiteral, 5);
  EXPECT_GT(reports.size(), 4u * 6u);
  EXPECT_TRUE(std::any_of(reports.begin(), reports.end(), [](auto const &r) { return r.violation; }));
}

TEST(CheckIcTest, SinglePatientNeverGains)
{
  auto const single = Instance(3, {make_bid(0, {0, 2}, 4.0)});
  for (auto rule : {PaymentRule::kPaperLiteral, PaymentRule::kCritical})
  {
    for (auto const &report : check_ic(single, rule, 5))
    {
      EXPECT_FALSE(report.violation);
      EXPECT_EQ(report.truthful_utility, report.true_value);
    }
  }
}

TEST(CheckMonotonicityTest, Examples)
{
  EXPECT_TRUE(wins_at(i2(), 0, 12.0));
  EXPECT_TRUE(greedy_allocate(i1().with_demand(0, {ExpertId{0}})).is_winner(0));
  EXPECT_TRUE(check_monotonicity(i1(), 8).empty());
  EXPECT_TRUE(check_monotonicity(i3(), 8).empty());
}

TEST(CheckMonotonicityTest, RandomCorpus)
{
  for (auto const &instance : random_corpus(200, 31))
  {
    EXPECT_TRUE(check_monotonicity(instance, 6, 31).empty());
  }
}

TEST(CheckIndividualRationalityTest, FlagsOvercharges)
{
  auto result = run_mechanism(i2(), PaymentRule::kCritical);
  EXPECT_TRUE(check_individual_rationality(i2(), result).empty());
  result.payments.charges[1] = 0.5;
  result.payments.charges[0] = 11.0;
  EXPECT_EQ(check_individual_rationality(i2(), result).size(), 2u);
}

TEST(CheckApproxRatioTest, Examples)
{
  EXPECT_DOUBLE_EQ(check_approx_ratio(i1()), 1.0);
  EXPECT_DOUBLE_EQ(check_approx_ratio(Instance(2, {make_bid(0, {1}, 3.0)})), 1.0);
  EXPECT_DOUBLE_EQ(check_approx_ratio(Instance(2, {make_bid(0, {1}, 0.0)})), 1.0);
  EXPECT_NEAR(check_approx_ratio(tight_family(4)), 0.525, 1e-9);
}

TEST(TightFamilyTest, Shape)
{
  auto const instance = tight_family(9);
  EXPECT_EQ(instance.size(), 10u);
  EXPECT_EQ(instance.bid(0).demand.size(), 9u);
  EXPECT_NEAR(optimal_welfare(instance).opt_welfare, 9.0, 1e-12);
  EXPECT_EQ(greedy_allocate(instance).winners, (std::vector<PatientId>{0}));
}

TEST(CriticalAgreementTest, RandomCorpus)
{
  for (auto const &instance : random_corpus(150, 1700))
  {
    EXPECT_TRUE(check_critical_agreement(instance).empty());
  }
}

TEST(PropertySetTest, Parse)
{
  auto const set = PropertySet::parse("ic,mono");
  EXPECT_TRUE(set.contains(Property::kIc));
  EXPECT_TRUE(set.contains(Property::kMono));
  EXPECT_FALSE(set.contains(Property::kRatio));
  EXPECT_EQ(PropertySet::parse("all").enabled, PropertySet::all().enabled);
  EXPECT_THROW(PropertySet::parse("ic,bogus"), std::invalid_argument);
}

TEST(RunBatchTest, EmptyBatch)
{
  auto const report = run_batch({}, PropertySet::all(), PaymentRule::kCritical);
  EXPECT_EQ(report.instances_run, 0u);
  EXPECT_EQ(report.total_violations(), 0u);
  EXPECT_EQ(report.ratio_min, 1.0);
  EXPECT_EQ(report.rule_divergences, 0u);
}

TEST(RunBatchTest, CriticalRuleIsClean)
{
  auto const corpus = make_corpus(1, 150, CorpusShape{1, 8, 2, 6, 1.0, 100.0});
  auto const report = run_batch(corpus, PropertySet::all(), PaymentRule::kCritical);
  EXPECT_EQ(report.instances_run, 150u);
  EXPECT_EQ(report.total_violations(), 0u) << write_fuzz_text(report);
  EXPECT_GE(report.ratio_min, 1.0 / std::sqrt(6.0) - 1e-9);
  EXPECT_EQ(report[Property::kIc].checked, 150u);
}

TEST(RunBatchTest, LiteralRuleDivergesWithoutBreakingAllocationProperties)
{
  auto const corpus = make_corpus(1, 300, CorpusShape{1, 8, 2, 6, 1.0, 100.0});
  auto const report = run_batch(corpus, PropertySet::all(), PaymentRule::kPaperLiteral);
  EXPECT_GT(report.rule_divergences, 0u);
  EXPECT_EQ(report[Property::kIr].violations, 0u);
  EXPECT_EQ(report[Property::kMono].violations, 0u);
  EXPECT_EQ(report[Property::kRatio].violations, 0u);
  EXPECT_GT(report[Property::kIc].violations, 0u);
  ASSERT_TRUE(report[Property::kIc].first_witness);
  EXPECT_FALSE(report[Property::kIc].first_witness->detail.empty());
}

TEST(RunBatchTest, ReproducibleAcrossRunsAndThreadCounts)
{
  auto const corpus = make_corpus(40, 140, CorpusShape{1, 8, 2, 6, 1.0, 100.0});
  auto const serial = write_fuzz_summary(
      run_batch(corpus, PropertySet::all(), PaymentRule::kPaperLiteral, BatchOptions{5, 4, 1}));
  auto const parallel = write_fuzz_summary(
      run_batch(corpus, PropertySet::all(), PaymentRule::kPaperLiteral, BatchOptions{5, 4, 4}));
  EXPECT_EQ(serial, parallel);
  EXPECT_EQ(serial, write_fuzz_summary(run_batch(corpus, PropertySet::all(), PaymentRule::kPaperLiteral,
                                                 BatchOptions{5, 4, 1})));
}

TEST(BenchTest, DoublingFactor)
{
  std::vector<BenchRow> const rows{{1000, 1.0, 2.0}, {2000, 3.0, 4.0}, {4000, 6.0, 16.0}};
  EXPECT_DOUBLE_EQ(worst_doubling_factor(rows), 4.0);
  std::vector<BenchRow> const quad{{1000, 1.0, 1.0}, {4000, 16.0, 4.0}};
  EXPECT_DOUBLE_EQ(worst_doubling_factor(quad), 4.0);

  std::vector<std::size_t> const sizes{50, 100};
  auto const                     measured = run_bench(sizes, 16, 4, 3);
  ASSERT_EQ(measured.size(), 2u);
  EXPECT_GT(measured[1].critical_seconds, 0.0);
}
