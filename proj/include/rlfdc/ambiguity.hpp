#pragma once

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "rlfdc/dataset.hpp"

namespace rlfdc {

enum class ScopePolicy { FailingCovered, AllElements };

// One selection session rooted at a failing test. Single-owner mutable;
// clone to branch. The dataset must outlive the context.
struct SuiteContext {
  const Dataset* data = nullptr;
  TestId failing = 0;
  std::vector<TestId> selected;  // excludes failing, no duplicates
  ScopePolicy scope_policy = ScopePolicy::FailingCovered;

  SuiteContext() = default;
  SuiteContext(const Dataset& d, TestId failing_test,
               ScopePolicy policy = ScopePolicy::FailingCovered)
      : data(&d), failing(failing_test), scope_policy(policy) {
    if (failing < 0 || failing >= d.num_tests())
      throw std::runtime_error("failing test id out of range");
    rebuild_scope();
  }

  const std::vector<ElementId>& scope() const { return scope_; }

  std::vector<TestId> suite_tests() const {
    std::vector<TestId> out;
    out.reserve(selected.size() + 1);
    out.push_back(failing);
    out.insert(out.end(), selected.begin(), selected.end());
    return out;
  }

  bool in_suite(TestId t) const {
    if (t == failing) return true;
    return std::find(selected.begin(), selected.end(), t) != selected.end();
  }

  void add(TestId t) {
    if (in_suite(t)) throw std::runtime_error("test " + std::to_string(t) + " already in suite");
    selected.push_back(t);
  }

 private:
  void rebuild_scope() {
    scope_.clear();
    const int n = data->num_elements();
    if (scope_policy == ScopePolicy::AllElements) {
      for (ElementId e = 0; e < n; ++e) scope_.push_back(e);
    } else {
      for (ElementId e = 0; e < n; ++e)
        if (data->covers(failing, e)) scope_.push_back(e);
    }
  }

  std::vector<ElementId> scope_;
};

// Elements grouped by identical execution vector under defining_tests.
// Groups are disjoint, cover exactly `scope`, and are ordered by smallest
// contained element id; members are ascending.
struct AmbiguityPartition {
  std::vector<std::vector<ElementId>> groups;
  std::vector<ElementId> scope;
  std::vector<TestId> defining_tests;
};

inline AmbiguityPartition partition_elements(const Dataset& d,
                                             const std::vector<TestId>& tests,
                                             const std::vector<ElementId>& scope) {
  AmbiguityPartition p;
  p.scope = scope;
  p.defining_tests = tests;
  std::map<std::string, std::size_t> by_vector;
  for (ElementId e : scope) {
    std::string key(tests.size(), '0');
    for (std::size_t i = 0; i < tests.size(); ++i)
      if (d.covers(tests[i], e)) key[i] = '1';
    auto it = by_vector.find(key);
    if (it == by_vector.end()) {
      it = by_vector.emplace(key, p.groups.size()).first;
      p.groups.emplace_back();
    }
    p.groups[it->second].push_back(e);  // scope iterated ascending
  }
  std::sort(p.groups.begin(), p.groups.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return p;
}

inline AmbiguityPartition ambiguity_partition(const SuiteContext& ctx) {
  return partition_elements(*ctx.data, ctx.suite_tests(), ctx.scope());
}

struct StateVector {
  int num_tests = 0;
  int num_ag = 0;
};

inline StateVector state_features(const SuiteContext& ctx) {
  StateVector s;
  s.num_tests = 1 + static_cast<int>(ctx.selected.size());
  s.num_ag = static_cast<int>(ambiguity_partition(ctx).groups.size());
  return s;
}

// |a & b| / |a | b|; 0 when both vectors are all-zero.
inline double jaccard_similarity(const BitVec& a, const BitVec& b) {
  if (a.size() != b.size())
    throw std::runtime_error("jaccard: vector length mismatch");
  int inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    inter += (a[i] && b[i]) ? 1 : 0;
    uni += (a[i] || b[i]) ? 1 : 0;
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / uni;
}

struct ActionVector {
  double cover = 0.0;
  double split = 0.0;       // raw
  double split_norm = 0.0;  // raw / per-partition maximum
};

inline double cover_feature(const SuiteContext& ctx, const BitVec& cov) {
  return jaccard_similarity(cov, ctx.data->tests[static_cast<std::size_t>(ctx.failing)].coverage);
}

inline double cover_feature(const SuiteContext& ctx, TestId candidate) {
  if (ctx.in_suite(candidate))
    throw std::runtime_error("cover_feature: candidate already in suite");
  return cover_feature(ctx, ctx.data->tests[static_cast<std::size_t>(candidate)].coverage);
}

// sum over groups of |ag| * min(#covered, #uncovered)
inline double split_raw(const AmbiguityPartition& p, const BitVec& cov) {
  double total = 0.0;
  for (const auto& group : p.groups) {
    int covered = 0;
    for (ElementId e : group) covered += cov[static_cast<std::size_t>(e)] ? 1 : 0;
    const int uncovered = static_cast<int>(group.size()) - covered;
    total += static_cast<double>(group.size()) * std::min(covered, uncovered);
  }
  return total;
}

// Largest raw split any candidate could attain against this partition:
// sum over groups of |ag| * floor(|ag| / 2).
inline double split_max(const AmbiguityPartition& p) {
  double total = 0.0;
  for (const auto& group : p.groups) {
    const auto sz = static_cast<double>(group.size());
    total += sz * static_cast<double>(group.size() / 2);
  }
  return total;
}

inline ActionVector split_against(const AmbiguityPartition& p, const BitVec& cov) {
  ActionVector a;
  a.split = split_raw(p, cov);
  const double denom = split_max(p);
  a.split_norm = denom > 0.0 ? a.split / denom : 0.0;
  return a;
}

inline ActionVector split_feature(const SuiteContext& ctx, const BitVec& cov) {
  return split_against(ambiguity_partition(ctx), cov);
}

inline ActionVector split_feature(const SuiteContext& ctx, TestId candidate) {
  if (ctx.in_suite(candidate))
    throw std::runtime_error("split_feature: candidate already in suite");
  return split_feature(ctx, ctx.data->tests[static_cast<std::size_t>(candidate)].coverage);
}

inline ActionVector action_features(const SuiteContext& ctx, const BitVec& cov) {
  ActionVector a = split_feature(ctx, cov);
  a.cover = cover_feature(ctx, cov);
  return a;
}

}  // namespace rlfdc
