#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "rlfdc/ambiguity.hpp"
#include "rlfdc/dataset.hpp"

namespace rlfdc {

struct SpectrumCounts {
  int ef = 0;  // failing tests covering the element
  int ep = 0;  // passing tests covering the element
  int nf = 0;  // failing tests not covering it
  int np = 0;  // passing tests not covering it
};

// Per-element counts over the given test subset. Unknown-outcome tests
// contribute nothing.
inline std::vector<SpectrumCounts> spectrum_counts(const Dataset& d,
                                                   const std::vector<TestId>& tests) {
  std::vector<SpectrumCounts> counts(static_cast<std::size_t>(d.num_elements()));
  for (TestId t : tests) {
    const TestCase& tc = d.tests[static_cast<std::size_t>(t)];
    if (tc.outcome == Outcome::Unknown) continue;
    const bool failing = tc.outcome == Outcome::Fail;
    for (std::size_t e = 0; e < counts.size(); ++e) {
      const bool cov = tc.coverage[e] != 0;
      if (failing) {
        cov ? ++counts[e].ef : ++counts[e].nf;
      } else {
        cov ? ++counts[e].ep : ++counts[e].np;
      }
    }
  }
  return counts;
}

inline double ochiai(const SpectrumCounts& c) {
  if (c.ef == 0) return 0.0;
  const double denom = static_cast<double>(c.ef + c.nf) * static_cast<double>(c.ef + c.ep);
  if (denom <= 0.0) return 0.0;
  return static_cast<double>(c.ef) / std::sqrt(denom);
}

// score(e) = ef / sqrt((ef+nf)(ef+ep)); requires at least one failing test
// in the subset.
inline std::vector<double> ochiai_statement_scores(const Dataset& d,
                                                   const std::vector<TestId>& tests) {
  bool any_fail = false;
  for (TestId t : tests)
    any_fail = any_fail || d.tests[static_cast<std::size_t>(t)].outcome == Outcome::Fail;
  if (tests.empty() || !any_fail)
    throw std::runtime_error("ochiai: test subset contains no failing test");
  const auto counts = spectrum_counts(d, tests);
  std::vector<double> scores(counts.size());
  for (std::size_t e = 0; e < counts.size(); ++e) scores[e] = ochiai(counts[e]);
  return scores;
}

// Method score = max over its in-scope elements; methods with no element in
// scope score 0.
inline std::vector<double> aggregate_to_methods(const std::vector<double>& statement_scores,
                                                const Dataset& d,
                                                const std::vector<ElementId>& scope) {
  std::vector<double> method_scores(static_cast<std::size_t>(d.num_methods()), 0.0);
  for (ElementId e : scope) {
    const MethodId m = d.elements[static_cast<std::size_t>(e)].method;
    method_scores[static_cast<std::size_t>(m)] =
        std::max(method_scores[static_cast<std::size_t>(m)], statement_scores[static_cast<std::size_t>(e)]);
  }
  return method_scores;
}

// Max tie-break: rank(m) = |{m' : score(m') >= score(m)}|.
struct Ranking {
  struct Entry {
    MethodId method = 0;
    double score = 0.0;
    int rank = 0;
  };
  std::vector<Entry> entries;      // ordered by (rank, method)
  std::vector<int> rank_by_method; // indexed by method id
};

inline Ranking rank_max_tiebreak(const std::vector<double>& method_scores) {
  const std::size_t n = method_scores.size();
  Ranking r;
  r.rank_by_method.assign(n, 0);
  r.entries.resize(n);
  for (std::size_t m = 0; m < n; ++m) {
    int rank = 0;
    for (std::size_t o = 0; o < n; ++o)
      if (method_scores[o] >= method_scores[m]) ++rank;
    r.rank_by_method[m] = rank;
    r.entries[m] = Ranking::Entry{static_cast<MethodId>(m), method_scores[m], rank};
  }
  std::sort(r.entries.begin(), r.entries.end(), [](const auto& a, const auto& b) {
    return a.rank != b.rank ? a.rank < b.rank : a.method < b.method;
  });
  return r;
}

// Best (smallest) rank among the methods that contain a buggy element.
inline int best_buggy_rank(const Ranking& ranking, const std::vector<MethodId>& buggy_methods) {
  if (buggy_methods.empty()) throw std::runtime_error("best_buggy_rank: no buggy methods");
  int best = 0;
  bool first = true;
  for (MethodId m : buggy_methods) {
    if (m < 0 || static_cast<std::size_t>(m) >= ranking.rank_by_method.size())
      throw std::runtime_error("best_buggy_rank: buggy method not ranked");
    const int rank = ranking.rank_by_method[static_cast<std::size_t>(m)];
    if (first || rank < best) best = rank;
    first = false;
  }
  return best;
}

// Ochiai-agg + max tie-break over the context's suite and scope.
inline Ranking localize(const SuiteContext& ctx) {
  const auto scores = ochiai_statement_scores(*ctx.data, ctx.suite_tests());
  return rank_max_tiebreak(aggregate_to_methods(scores, *ctx.data, ctx.scope()));
}

// (init - cur) / init; always relative to the episode's initial suite.
inline double reward(int init_rank, int cur_rank) {
  if (init_rank < 1 || cur_rank < 1) throw std::runtime_error("reward: ranks must be >= 1");
  return static_cast<double>(init_rank - cur_rank) / static_cast<double>(init_rank);
}

inline int acc_at_n(const std::vector<int>& per_fault_best_ranks, int n) {
  if (n < 1) throw std::runtime_error("acc_at_n: n must be >= 1");
  int count = 0;
  for (int r : per_fault_best_ranks)
    if (r <= n) ++count;
  return count;
}

// Mean over faults of (1/|f_B|) * sum_b (#buggy ranked at or above b) / rank(b),
// using the same max-tie-break ranks.
inline double mean_average_precision(const std::vector<Ranking>& per_fault_rankings,
                                     const std::vector<std::vector<MethodId>>& per_fault_buggy) {
  if (per_fault_rankings.size() != per_fault_buggy.size())
    throw std::runtime_error("mean_average_precision: size mismatch");
  if (per_fault_rankings.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t f = 0; f < per_fault_rankings.size(); ++f) {
    const auto& ranking = per_fault_rankings[f];
    const auto& buggy = per_fault_buggy[f];
    if (buggy.empty())
      throw std::runtime_error("mean_average_precision: empty fault set");
    double ap = 0.0;
    for (MethodId b : buggy) {
      if (b < 0 || static_cast<std::size_t>(b) >= ranking.rank_by_method.size())
        throw std::runtime_error("mean_average_precision: buggy method not ranked");
      const int rank_b = ranking.rank_by_method[static_cast<std::size_t>(b)];
      int at_or_above = 0;
      for (MethodId other : buggy)
        if (ranking.rank_by_method[static_cast<std::size_t>(other)] <= rank_b) ++at_or_above;
      ap += static_cast<double>(at_or_above) / static_cast<double>(rank_b);
    }
    total += ap / static_cast<double>(buggy.size());
  }
  return total / static_cast<double>(per_fault_rankings.size());
}

}  // namespace rlfdc
