#include "rlfdc/generation.hpp"

#include <gtest/gtest.h>

#include <algorithm>

#include "rlfdc/datagen.hpp"
#include "golden_example.hpp"
#include "toyenv.hpp"

using namespace rlfdc;

namespace {

Scorer cover_scorer() {
  ScorerSpec spec;
  spec.kind = ScorerKind::Cover;
  return Scorer(spec);
}

Scorer tfd_scorer() {
  ScorerSpec spec;
  spec.kind = ScorerKind::Tfd;
  return Scorer(spec);
}

TEST(GaGenerate, FixedPointWithoutOperators) {
  const Dataset d = golden::toy_environment();
  GenConfig cfg;
  cfg.population = 4;
  cfg.generations = 5;
  cfg.mutation_rate = 0.0;
  cfg.crossover_prob = 0.0;
  cfg.output_count = 4;
  Scorer fitness = cover_scorer();
  const std::vector<BitVec> initial(4, d.tests[1].coverage);
  const auto out = ga_generate(d, 0, fitness, cfg, nullptr, &initial);
  ASSERT_EQ(out.size(), 1u);  // all identical, deduplicated
  EXPECT_EQ(out[0], d.tests[1].coverage);
}

TEST(GaGenerate, ElitismKeepsPlantedOptimum) {
  const Dataset d = golden::toy_environment();
  GenConfig cfg;
  cfg.population = 6;
  cfg.generations = 20;
  cfg.output_count = 3;
  cfg.seed = 9;
  Scorer fitness = cover_scorer();
  // Planted individual with strictly maximal cover (identical to failing);
  // everything else covers nothing.
  std::vector<BitVec> initial(6, BitVec(static_cast<std::size_t>(d.num_elements()), 0));
  initial[3] = d.tests[0].coverage;
  GaTrace trace;
  const auto out = ga_generate(d, 0, fitness, cfg, &trace, &initial);
  for (double elite : trace.elite_fitness) EXPECT_DOUBLE_EQ(elite, 1.0);
  EXPECT_NE(std::find(out.begin(), out.end(), d.tests[0].coverage), out.end());
}

TEST(GaGenerate, EliteFitnessNonDecreasing) {
  SyntheticSpec spec;
  spec.seed = 31;
  const Dataset d = generate_program(spec, 0);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    GenConfig cfg;
    cfg.population = 20;
    cfg.generations = 30;
    cfg.seed = seed;
    Scorer fitness = tfd_scorer();
    GaTrace trace;
    ga_generate(d, d.initial_failing.front(), fitness, cfg, &trace);
    ASSERT_EQ(trace.elite_fitness.size(), 31u);
    for (std::size_t g = 1; g < trace.elite_fitness.size(); ++g)
      EXPECT_GE(trace.elite_fitness[g], trace.elite_fitness[g - 1]) << "generation " << g;
  }
}

TEST(GaGenerate, OutputDistinctAndSized) {
  const Dataset d = golden::worked_example_dataset();
  GenConfig cfg;
  cfg.population = 24;
  cfg.generations = 10;
  cfg.output_count = 8;
  cfg.seed = 4;
  Scorer fitness = tfd_scorer();
  const auto out = ga_generate(d, 0, fitness, cfg);
  EXPECT_LE(out.size(), 8u);
  EXPECT_GE(out.size(), 1u);
  for (std::size_t i = 0; i < out.size(); ++i) {
    EXPECT_EQ(out[i].size(), 28u);
    for (std::size_t j = i + 1; j < out.size(); ++j) EXPECT_NE(out[i], out[j]);
  }
}

TEST(GaGenerate, DeterministicPerSeed) {
  const Dataset d = golden::worked_example_dataset();
  GenConfig cfg;
  cfg.population = 16;
  cfg.generations = 12;
  cfg.seed = 77;
  Scorer f1 = tfd_scorer();
  Scorer f2 = tfd_scorer();
  EXPECT_EQ(ga_generate(d, 0, f1, cfg), ga_generate(d, 0, f2, cfg));
}

TEST(LabelGenerated, OutcomeRule) {
  const Dataset d = golden::toy_environment();
  BitVec covers_fault(10, 0);
  covers_fault[4] = 1;
  BitVec misses_fault(10, 1);
  misses_fault[4] = 0;
  misses_fault[5] = 0;

  const auto certain = label_generated(d, {covers_fault, misses_fault}, 1.0, 5);
  EXPECT_EQ(certain[0], Outcome::Fail);
  EXPECT_EQ(certain[1], Outcome::Pass);

  const auto never = label_generated(d, {covers_fault}, 0.0, 5);
  EXPECT_EQ(never[0], Outcome::Pass);
}

TEST(LabelGenerated, DeterministicAndOrderIndependent) {
  const Dataset d = golden::toy_environment();
  std::vector<BitVec> vecs;
  for (int i = 0; i < 8; ++i) {
    BitVec v(10, 0);
    for (int j = 0; j <= i; ++j) v[static_cast<std::size_t>(j)] = 1;
    vecs.push_back(v);
  }
  const auto a = label_generated(d, vecs, 0.5, 99);
  const auto b = label_generated(d, vecs, 0.5, 99);
  EXPECT_EQ(a, b);
  std::vector<BitVec> reversed(vecs.rbegin(), vecs.rend());
  const auto c = label_generated(d, reversed, 0.5, 99);
  for (std::size_t i = 0; i < vecs.size(); ++i) EXPECT_EQ(a[i], c[vecs.size() - 1 - i]);
  EXPECT_NE(label_generated(d, vecs, 0.5, 100), a);  // different seed, different coins
}

TEST(LabelGenerated, RequiresFaults) {
  Dataset d = golden::toy_environment();
  d.faults.clear();
  EXPECT_THROW(label_generated(d, {BitVec(10, 1)}, 0.5, 1), std::runtime_error);
}

TEST(SerializeGenerated, FragmentShape) {
  const std::vector<BitVec> vecs = {bits_from_string("10"), bits_from_string("01")};
  const std::vector<Outcome> outs = {Outcome::Fail, Outcome::Pass};
  const std::string doc = serialize_generated(vecs, outs);
  const auto j = nlohmann::json::parse(doc);
  ASSERT_EQ(j.at("tests").size(), 2u);
  EXPECT_EQ(j["tests"][0]["coverage"], "10");
  EXPECT_EQ(j["tests"][0]["outcome"], "fail");
  EXPECT_EQ(j["tests"][1]["name"], "gen_1");
}

}  // namespace
