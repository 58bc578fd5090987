#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rlfdc/ambiguity.hpp"
#include "rlfdc/dataset.hpp"
#include "rlfdc/metrics.hpp"
#include "rlfdc/rng.hpp"

namespace rlfdc {

struct GenConfig {
  int population = 50;
  int generations = 60;
  double mutation_rate = -1.0;  // < 0 means 1/n
  double crossover_prob = 0.5;  // per-bit exchange probability
  int elitism = 1;
  std::uint64_t seed = 0;
  int output_count = 10;

  void validate() const {
    if (population < 2) throw std::runtime_error("gen config: population must be >= 2");
    if (generations < 1) throw std::runtime_error("gen config: generations must be >= 1");
    if (elitism < 0 || elitism > population)
      throw std::runtime_error("gen config: elitism out of range");
    if (output_count < 1) throw std::runtime_error("gen config: output count must be >= 1");
    if (mutation_rate > 1.0) throw std::runtime_error("gen config: mutation rate > 1");
    if (crossover_prob < 0.0 || crossover_prob > 1.0)
      throw std::runtime_error("gen config: crossover probability must be in [0,1]");
  }
};

struct GaTrace {
  std::vector<double> elite_fitness;  // entry per evaluated population (initial first)
  std::vector<double> mean_fitness;
};

// Generational loop over coverage-vector individuals. The initial population
// is half mutated copies of the failing test's coverage, half uniform random,
// unless an explicit population is injected. Returns the top distinct
// individuals by final fitness.
inline std::vector<BitVec> ga_generate(const Dataset& d, TestId failing, Scorer& fitness,
                                       const GenConfig& cfg, GaTrace* trace = nullptr,
                                       const std::vector<BitVec>* initial = nullptr) {
  cfg.validate();
  const std::size_t n = static_cast<std::size_t>(d.num_elements());
  if (n == 0) throw std::runtime_error("ga_generate: dataset has no elements");
  if (failing < 0 || failing >= d.num_tests() ||
      d.tests[static_cast<std::size_t>(failing)].outcome != Outcome::Fail)
    throw std::runtime_error("ga_generate: seed test must be a failing test");
  const double mrate = cfg.mutation_rate < 0.0 ? 1.0 / static_cast<double>(n) : cfg.mutation_rate;
  SuiteContext ctx(d, failing);
  Rng rng(cfg.seed);

  std::vector<BitVec> pop;
  if (initial) {
    if (initial->size() < 2) throw std::runtime_error("ga_generate: initial population too small");
    for (const auto& v : *initial)
      if (v.size() != n) throw std::runtime_error("ga_generate: individual length mismatch");
    pop = *initial;
  } else {
    const BitVec& base = d.tests[static_cast<std::size_t>(failing)].coverage;
    pop.reserve(static_cast<std::size_t>(cfg.population));
    for (int i = 0; i < cfg.population / 2; ++i) {
      BitVec v = base;
      for (auto& bit : v)
        if (rng.bernoulli(mrate)) bit = bit ? 0 : 1;
      pop.push_back(std::move(v));
    }
    while (pop.size() < static_cast<std::size_t>(cfg.population)) {
      BitVec v(n, 0);
      for (auto& bit : v) bit = rng.bernoulli(0.5) ? 1 : 0;
      pop.push_back(std::move(v));
    }
  }
  const std::size_t pop_size = pop.size();

  std::vector<double> fit(pop_size);
  std::vector<std::size_t> order(pop_size);
  auto evaluate_population = [&] {
    for (std::size_t i = 0; i < pop_size; ++i) fit[i] = fitness.score(ctx, pop[i]);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return fit[a] > fit[b]; });
    if (trace) {
      trace->elite_fitness.push_back(fit[order.front()]);
      trace->mean_fitness.push_back(std::accumulate(fit.begin(), fit.end(), 0.0) /
                                    static_cast<double>(pop_size));
    }
  };

  evaluate_population();
  for (int gen = 0; gen < cfg.generations; ++gen) {
    std::vector<BitVec> next;
    next.reserve(pop_size);
    for (int e = 0; e < cfg.elitism && next.size() < pop_size; ++e)
      next.push_back(pop[order[static_cast<std::size_t>(e)]]);
    const std::size_t parent_pool = std::max<std::size_t>(2, (pop_size + 1) / 2);
    while (next.size() < pop_size) {
      const BitVec& p1 = pop[order[rng.next_index(parent_pool)]];
      const BitVec& p2 = pop[order[rng.next_index(parent_pool)]];
      BitVec child = p1;
      for (std::size_t j = 0; j < n; ++j)
        if (rng.bernoulli(cfg.crossover_prob)) child[j] = p2[j];
      for (auto& bit : child)
        if (rng.bernoulli(mrate)) bit = bit ? 0 : 1;
      next.push_back(std::move(child));
    }
    pop = std::move(next);
    evaluate_population();
  }

  std::vector<BitVec> out;
  for (std::size_t i : order) {
    bool dup = false;
    for (const auto& v : out) dup = dup || v == pop[i];
    if (!dup) out.push_back(pop[i]);
    if (static_cast<int>(out.size()) == cfg.output_count) break;
  }
  return out;
}

// Simulated oracle: a generated test fails iff it covers a buggy element and
// a coin derived from (vector, seed) fires. Independent of list order.
inline std::vector<Outcome> label_generated(const Dataset& d, const std::vector<BitVec>& vectors,
                                            double trigger_probability, std::uint64_t seed) {
  if (d.faults.empty()) throw std::runtime_error("label_generated: dataset has no fault labels");
  if (trigger_probability < 0.0 || trigger_probability > 1.0)
    throw std::runtime_error("label_generated: trigger probability must be in [0,1]");
  std::vector<Outcome> out;
  out.reserve(vectors.size());
  for (const BitVec& v : vectors) {
    if (v.size() != static_cast<std::size_t>(d.num_elements()))
      throw std::runtime_error("label_generated: vector length mismatch");
    bool covers_fault = false;
    for (ElementId f : d.faults) covers_fault = covers_fault || v[static_cast<std::size_t>(f)];
    if (!covers_fault) {
      out.push_back(Outcome::Pass);
      continue;
    }
    std::uint64_t h = 0xcbf29ce484222325ULL ^ seed;
    for (std::size_t i = 0; i < v.size(); ++i)
      h = (h ^ (v[i] ? 0x9DULL : 0x3BULL) ^ (i << 8)) * 0x100000001b3ULL;
    const double coin =
        static_cast<double>(splitmix64_next(h) >> 11) * (1.0 / 9007199254740992.0);
    out.push_back(coin < trigger_probability ? Outcome::Fail : Outcome::Pass);
  }
  return out;
}

// Dataset-format fragment carrying the generated tests.
inline std::string serialize_generated(const std::vector<BitVec>& vectors,
                                       const std::vector<Outcome>& outcomes) {
  if (vectors.size() != outcomes.size())
    throw std::runtime_error("serialize_generated: size mismatch");
  nlohmann::ordered_json doc;
  doc["version"] = 1;
  doc["tests"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    nlohmann::ordered_json jt;
    jt["id"] = static_cast<int>(i);
    jt["name"] = "gen_" + std::to_string(i);
    jt["coverage"] = bits_to_string(vectors[i]);
    jt["outcome"] = outcome_name(outcomes[i]);
    doc["tests"].push_back(std::move(jt));
  }
  return doc.dump(2) + "\n";
}

}  // namespace rlfdc
