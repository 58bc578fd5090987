#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rlfdc/ambiguity.hpp"
#include "rlfdc/dataset.hpp"
#include "rlfdc/network.hpp"
#include "rlfdc/rng.hpp"
#include "rlfdc/sbfl.hpp"
#include "rlfdc/trainer.hpp"

namespace rlfdc {

namespace detail {

// Fraction of 1-bits across the given rows.
inline double density_rows(const std::vector<const BitVec*>& rows, std::size_t n) {
  if (rows.empty() || n == 0) throw std::runtime_error("metric over an empty matrix");
  long ones = 0;
  for (const BitVec* r : rows)
    for (std::size_t j = 0; j < n; ++j) ones += (*r)[j] ? 1 : 0;
  return static_cast<double>(ones) / (static_cast<double>(rows.size()) * static_cast<double>(n));
}

// Gini-Simpson index among rows; 0 when fewer than two rows.
inline double diversity_rows(const std::vector<const BitVec*>& rows) {
  const std::size_t m = rows.size();
  if (m < 2) return 0.0;
  std::map<std::string, long> groups;
  for (const BitVec* r : rows) groups[bits_to_string(*r)] += 1;
  double same = 0.0;
  for (const auto& [key, count] : groups)
    same += static_cast<double>(count) * static_cast<double>(count - 1);
  return 1.0 - same / (static_cast<double>(m) * static_cast<double>(m - 1));
}

// Ambiguity groups of the scope columns under the given rows.
inline int count_groups_rows(const std::vector<const BitVec*>& rows,
                             const std::vector<ElementId>& scope) {
  std::map<std::string, int> groups;
  for (ElementId e : scope) {
    std::string key(rows.size(), '0');
    for (std::size_t i = 0; i < rows.size(); ++i)
      if ((*rows[i])[static_cast<std::size_t>(e)]) key[i] = '1';
    groups[key] = 1;
  }
  return static_cast<int>(groups.size());
}

inline std::vector<const BitVec*> rows_of(const Dataset& d, const std::vector<TestId>& tests) {
  std::vector<const BitVec*> rows;
  rows.reserve(tests.size());
  for (TestId t : tests) rows.push_back(&d.tests[static_cast<std::size_t>(t)].coverage);
  return rows;
}

inline std::vector<ElementId> all_elements(const Dataset& d) {
  std::vector<ElementId> scope(static_cast<std::size_t>(d.num_elements()));
  for (int e = 0; e < d.num_elements(); ++e) scope[static_cast<std::size_t>(e)] = e;
  return scope;
}

inline double entbug_rows(const std::vector<const BitVec*>& rows, std::size_t n) {
  const double rho = density_rows(rows, n);
  return 1.0 - std::abs(1.0 - 2.0 * rho);
}

inline double ddu_rows(const std::vector<const BitVec*>& rows,
                       const std::vector<ElementId>& elements, std::size_t n) {
  const double density = density_rows(rows, n);
  const double diversity = diversity_rows(rows);
  const double uniqueness =
      static_cast<double>(count_groups_rows(rows, elements)) / static_cast<double>(n);
  return density * diversity * uniqueness;
}

}  // namespace detail

// EntBug(T) = 1 - |1 - 2 rho(T)|
inline double entbug(const Dataset& d, const std::vector<TestId>& tests) {
  return detail::entbug_rows(detail::rows_of(d, tests),
                             static_cast<std::size_t>(d.num_elements()));
}

// DDU(T) = density * diversity * uniqueness over all elements.
inline double ddu(const Dataset& d, const std::vector<TestId>& tests) {
  return detail::ddu_rows(detail::rows_of(d, tests), detail::all_elements(d),
                          static_cast<std::size_t>(d.num_elements()));
}

// TfD(T) = |AG(T)| over the chosen scope.
inline int tfd(const Dataset& d, const std::vector<TestId>& tests,
               const std::vector<ElementId>& scope) {
  return detail::count_groups_rows(detail::rows_of(d, tests), scope);
}

// FDG with suspiciousness weights from the current suite (known outcomes
// only); the ambiguity term uses AG(T u {t}).
inline double fdg(const SuiteContext& ctx, const BitVec& cov, double alpha) {
  if (alpha < 0.0 || alpha > 1.0) throw std::runtime_error("fdg: alpha must be in [0,1]");
  const auto& scope = ctx.scope();
  const std::size_t n = scope.size();
  if (n == 0) return 0.0;
  const auto scores = ochiai_statement_scores(*ctx.data, ctx.suite_tests());
  double wsum = 0.0;
  for (ElementId e : scope) wsum += scores[static_cast<std::size_t>(e)];

  double covered_mass = 0.0;
  for (ElementId e : scope)
    if (cov[static_cast<std::size_t>(e)]) covered_mass += scores[static_cast<std::size_t>(e)];
  const double cover_term = covered_mass / static_cast<double>(n);

  double first_term = 0.0;
  if (wsum > 0.0) {
    double paren = 1.0;
    if (n > 1) {
      auto rows = detail::rows_of(*ctx.data, ctx.suite_tests());
      rows.push_back(&cov);
      std::map<std::string, std::pair<double, int>> groups;  // mass, size
      for (ElementId e : scope) {
        std::string key(rows.size(), '0');
        for (std::size_t i = 0; i < rows.size(); ++i)
          if ((*rows[i])[static_cast<std::size_t>(e)]) key[i] = '1';
        auto& g = groups[key];
        g.first += scores[static_cast<std::size_t>(e)] / wsum;
        g.second += 1;
      }
      double ambiguity = 0.0;
      for (const auto& [key, g] : groups) ambiguity += g.first * (g.second - 1);
      paren = 1.0 - ambiguity / static_cast<double>(n - 1);
    }
    first_term = alpha * paren;
  }
  return first_term + (1.0 - alpha) * cover_term;
}

inline double weighted_cover_split(const SuiteContext& ctx, const BitVec& cov, double alpha) {
  if (alpha < 0.0 || alpha > 1.0)
    throw std::runtime_error("weighted_cover_split: alpha must be in [0,1]");
  const ActionVector a = action_features(ctx, cov);
  return alpha * a.split_norm + (1.0 - alpha) * a.cover;
}

// --- scorer interface --------------------------------------------------------

enum class ScorerKind { Rlfdc, Tfd, Ddu, Entbug, Fdg, Cover, Split, Weighted, Random };

inline const char* scorer_kind_name(ScorerKind k) {
  switch (k) {
    case ScorerKind::Rlfdc: return "rlfdc";
    case ScorerKind::Tfd: return "tfd";
    case ScorerKind::Ddu: return "ddu";
    case ScorerKind::Entbug: return "entbug";
    case ScorerKind::Fdg: return "fdg";
    case ScorerKind::Cover: return "cover";
    case ScorerKind::Split: return "split";
    case ScorerKind::Weighted: return "weighted";
    default: return "random";
  }
}

inline ScorerKind scorer_kind_from_name(const std::string& s) {
  for (ScorerKind k : {ScorerKind::Rlfdc, ScorerKind::Tfd, ScorerKind::Ddu, ScorerKind::Entbug,
                       ScorerKind::Fdg, ScorerKind::Cover, ScorerKind::Split,
                       ScorerKind::Weighted, ScorerKind::Random})
    if (s == scorer_kind_name(k)) return k;
  throw std::runtime_error("unknown metric kind: '" + s + "'");
}

struct ScorerSpec {
  ScorerKind kind = ScorerKind::Random;
  std::optional<double> alpha;                 // fdg / weighted only
  std::shared_ptr<const QModel> model;         // rlfdc only
  std::optional<std::uint64_t> seed;           // random only

  void validate() const {
    const bool needs_alpha = kind == ScorerKind::Fdg || kind == ScorerKind::Weighted;
    if (needs_alpha && !alpha)
      throw std::runtime_error(std::string(scorer_kind_name(kind)) + " scorer requires alpha");
    if (!needs_alpha && alpha)
      throw std::runtime_error(std::string(scorer_kind_name(kind)) + " scorer takes no alpha");
    if (kind == ScorerKind::Rlfdc && !model)
      throw std::runtime_error("rlfdc scorer requires a model");
    if (kind != ScorerKind::Rlfdc && model)
      throw std::runtime_error(std::string(scorer_kind_name(kind)) + " scorer takes no model");
    if (kind == ScorerKind::Random && !seed)
      throw std::runtime_error("random scorer requires a seed");
  }
};

// Deterministic per-candidate scorer. Suite-level metrics are adapted as
// metric(T u {candidate}) so greedy selection maximizes the post-addition
// suite value. The random scorer owns seeded state; use one instance per
// concurrent trace.
class Scorer {
 public:
  explicit Scorer(const ScorerSpec& spec) : spec_(spec), rng_(0) {
    spec_.validate();
    if (spec_.kind == ScorerKind::Random) rng_ = Rng(*spec_.seed);
  }

  ScorerKind kind() const { return spec_.kind; }

  double score(const SuiteContext& ctx, const BitVec& cov) {
    switch (spec_.kind) {
      case ScorerKind::Rlfdc:
        return predict_fdc(*spec_.model, ctx, cov);
      case ScorerKind::Cover:
        return cover_feature(ctx, cov);
      case ScorerKind::Split:
        return split_feature(ctx, cov).split_norm;
      case ScorerKind::Weighted:
        return weighted_cover_split(ctx, cov, *spec_.alpha);
      case ScorerKind::Fdg:
        return fdg(ctx, cov, *spec_.alpha);
      case ScorerKind::Tfd: {
        auto rows = detail::rows_of(*ctx.data, ctx.suite_tests());
        rows.push_back(&cov);
        return static_cast<double>(detail::count_groups_rows(rows, ctx.scope()));
      }
      case ScorerKind::Ddu: {
        auto rows = detail::rows_of(*ctx.data, ctx.suite_tests());
        rows.push_back(&cov);
        return detail::ddu_rows(rows, detail::all_elements(*ctx.data),
                                static_cast<std::size_t>(ctx.data->num_elements()));
      }
      case ScorerKind::Entbug: {
        auto rows = detail::rows_of(*ctx.data, ctx.suite_tests());
        rows.push_back(&cov);
        return detail::entbug_rows(rows, static_cast<std::size_t>(ctx.data->num_elements()));
      }
      default:
        return rng_.next_double();
    }
  }

  double score(const SuiteContext& ctx, TestId candidate) {
    if (ctx.in_suite(candidate))
      throw std::runtime_error("scorer: candidate already in suite");
    return score(ctx, ctx.data->tests[static_cast<std::size_t>(candidate)].coverage);
  }

 private:
  ScorerSpec spec_;
  Rng rng_;
};

inline Scorer make_scorer(const ScorerSpec& spec) { return Scorer(spec); }

}  // namespace rlfdc
