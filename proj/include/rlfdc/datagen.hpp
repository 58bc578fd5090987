#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "rlfdc/dataset.hpp"
#include "rlfdc/rng.hpp"

namespace rlfdc {

// Synthetic fault-localization benchmark family. One generated program =
// one labeled Dataset.
struct SyntheticSpec {
  int methods = 6;
  int stmts_min = 2;
  int stmts_max = 6;
  int tests = 40;
  double method_prob = 0.35;   // per-test probability of entering a method
  double stmt_prob = 0.7;      // per-statement coverage within an entered method
  int fault_count = 1;         // buggy statements per program
  double trigger_prob = 0.8;   // probability a fault-covering test fails
  std::uint64_t seed = 0;
  int max_retries = 100;

  void validate() const {
    if (methods < 1 || tests < 1 || fault_count < 1 || stmts_min < 1 || stmts_max < stmts_min)
      throw std::runtime_error("synthetic spec: counts must be >= 1 and range ordered");
    for (double p : {method_prob, stmt_prob, trigger_prob})
      if (p < 0.0 || p > 1.0)
        throw std::runtime_error("synthetic spec: probabilities must be in [0,1]");
    if (max_retries < 1) throw std::runtime_error("synthetic spec: retry budget must be >= 1");
  }
};

// Deterministic per (spec, seed, program index). A test entering a method
// always covers the method's entry statement, so methods carry internal
// ambiguity structure. Resamples until at least one test fails.
inline Dataset generate_program(const SyntheticSpec& spec, int program_index) {
  spec.validate();
  Rng rng(mix_seed(spec.seed, static_cast<std::uint64_t>(program_index)));

  for (int attempt = 0; attempt < spec.max_retries; ++attempt) {
    Dataset d;
    std::vector<ElementId> entry;  // entry statement per method
    for (int m = 0; m < spec.methods; ++m) {
      d.methods.push_back("m" + std::to_string(m));
      const int count = spec.stmts_min +
                        static_cast<int>(rng.next_index(
                            static_cast<std::size_t>(spec.stmts_max - spec.stmts_min + 1)));
      entry.push_back(d.num_elements());
      for (int s = 0; s < count; ++s)
        d.elements.push_back(Element{m, "m" + std::to_string(m) + ".s" + std::to_string(s)});
    }
    const std::size_t n = static_cast<std::size_t>(d.num_elements());

    for (int t = 0; t < spec.tests; ++t) {
      TestCase tc;
      tc.name = "t" + std::to_string(t);
      tc.coverage.assign(n, 0);
      for (int m = 0; m < spec.methods; ++m) {
        if (!rng.bernoulli(spec.method_prob)) continue;
        const ElementId lo = entry[static_cast<std::size_t>(m)];
        const ElementId hi =
            m + 1 < spec.methods ? entry[static_cast<std::size_t>(m + 1)] : d.num_elements();
        tc.coverage[static_cast<std::size_t>(lo)] = 1;
        for (ElementId e = lo + 1; e < hi; ++e)
          if (rng.bernoulli(spec.stmt_prob)) tc.coverage[static_cast<std::size_t>(e)] = 1;
      }
      tc.outcome = Outcome::Pass;
      d.tests.push_back(std::move(tc));
    }

    const auto fault_pick = rng.sample_indices(n, static_cast<std::size_t>(spec.fault_count));
    for (std::size_t f : fault_pick) d.faults.push_back(static_cast<ElementId>(f));
    std::sort(d.faults.begin(), d.faults.end());

    for (auto& tc : d.tests) {
      bool covers_fault = false;
      for (ElementId f : d.faults)
        covers_fault = covers_fault || tc.coverage[static_cast<std::size_t>(f)];
      if (covers_fault && rng.bernoulli(spec.trigger_prob)) tc.outcome = Outcome::Fail;
    }
    for (TestId t = 0; t < d.num_tests(); ++t) {
      if (d.tests[static_cast<std::size_t>(t)].outcome == Outcome::Fail) {
        d.initial_failing.push_back(t);
        break;
      }
    }
    if (d.initial_failing.empty()) continue;
    d.validate();
    return d;
  }
  throw std::runtime_error("generate_program: no failing test after " +
                           std::to_string(spec.max_retries) + " attempts (program " +
                           std::to_string(program_index) + ")");
}

inline std::vector<Dataset> generate_benchmark(const SyntheticSpec& spec, int count) {
  if (count < 1) throw std::runtime_error("generate_benchmark: count must be >= 1");
  std::vector<Dataset> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) out.push_back(generate_program(spec, i));
  return out;
}

}  // namespace rlfdc
