#pragma once

#include <atomic>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "rlfdc/ambiguity.hpp"
#include "rlfdc/dataset.hpp"
#include "rlfdc/metrics.hpp"
#include "rlfdc/sbfl.hpp"

namespace rlfdc {

inline std::string format_fixed(double v, int decimals = 6) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

struct SelectionStep {
  int k = 0;
  TestId selected = -1;  // -1 at k = 0
  std::vector<double> method_scores;
  int best_rank = 0;
  double reward_so_far = 0.0;  // vs. the initial suite
};

struct SelectionTrace {
  TestId failing = 0;
  int init_rank = 0;
  std::vector<SelectionStep> steps;  // length k_steps + 1
};

inline std::string trace_to_csv(const SelectionTrace& trace) {
  std::string out = "k,test,best_rank,reward,method_scores\n";
  for (const auto& step : trace.steps) {
    out += std::to_string(step.k) + ",";
    if (step.selected >= 0) out += std::to_string(step.selected);
    out += "," + std::to_string(step.best_rank) + "," + format_fixed(step.reward_so_far) + ",";
    for (std::size_t m = 0; m < step.method_scores.size(); ++m) {
      if (m) out += ";";
      out += format_fixed(step.method_scores[m]);
    }
    out += "\n";
  }
  return out;
}

// Greedy metric-guided selection with FL tracing. Ties between equal scores
// go to the lowest test id.
inline SelectionTrace select(const Dataset& d, TestId failing, Scorer& scorer, int k_steps) {
  if (failing < 0 || failing >= d.num_tests())
    throw std::runtime_error("select: failing test id out of range");
  if (d.tests[static_cast<std::size_t>(failing)].outcome != Outcome::Fail)
    throw std::runtime_error("select: test " + std::to_string(failing) + " is not failing");
  std::vector<TestId> candidates;
  for (TestId t = 0; t < d.num_tests(); ++t)
    if (t != failing) candidates.push_back(t);
  if (static_cast<int>(candidates.size()) < k_steps)
    throw std::runtime_error("select: fewer than K candidate tests");

  SuiteContext ctx(d, failing);
  const auto buggy = d.fault_methods();

  SelectionTrace trace;
  trace.failing = failing;
  auto record = [&](int k, TestId picked) {
    const auto scores = ochiai_statement_scores(d, ctx.suite_tests());
    const auto method_scores = aggregate_to_methods(scores, d, ctx.scope());
    const Ranking ranking = rank_max_tiebreak(method_scores);
    SelectionStep step;
    step.k = k;
    step.selected = picked;
    step.method_scores = method_scores;
    step.best_rank = buggy.empty() ? 0 : best_buggy_rank(ranking, buggy);
    step.reward_so_far =
        (k == 0 || buggy.empty()) ? 0.0 : reward(trace.init_rank, step.best_rank);
    trace.steps.push_back(std::move(step));
  };

  record(0, -1);
  trace.init_rank = trace.steps.front().best_rank;

  for (int k = 1; k <= k_steps; ++k) {
    std::size_t best_idx = 0;
    double best_score = 0.0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      const double s = scorer.score(ctx, candidates[i]);
      if (i == 0 || s > best_score) {
        best_score = s;
        best_idx = i;
      }
    }
    const TestId picked = candidates[best_idx];
    ctx.add(picked);
    candidates.erase(candidates.begin() + static_cast<long>(best_idx));
    record(k, picked);
  }
  return trace;
}

struct EvalRow {
  std::string metric;
  int k = 0;
  int acc1 = 0, acc3 = 0, acc5 = 0, acc10 = 0;
  double map = 0.0;
};

struct EvalReport {
  std::vector<EvalRow> rows;
  std::vector<std::string> skipped;  // "metric/fault: reason"
};

inline std::string report_to_csv(const EvalReport& report) {
  std::string out = "metric,k,acc1,acc3,acc5,acc10,map\n";
  for (const auto& r : report.rows) {
    out += r.metric + "," + std::to_string(r.k) + "," + std::to_string(r.acc1) + "," +
           std::to_string(r.acc3) + "," + std::to_string(r.acc5) + "," +
           std::to_string(r.acc10) + "," + format_fixed(r.map) + "\n";
  }
  return out;
}

// Multi-metric sweep over labeled faults. Per-fault traces are independent
// and fan out over `jobs` threads; assembly order is fixed by (metric, fault).
inline EvalReport evaluate(const std::vector<Dataset>& datasets,
                           const std::vector<std::string>& labels,
                           const std::vector<ScorerSpec>& specs, int k_steps, int jobs = 1) {
  if (datasets.size() != labels.size())
    throw std::runtime_error("evaluate: dataset/label size mismatch");
  struct Cell {
    bool ok = false;
    std::string error;
    SelectionTrace trace;
  };
  const std::size_t n_cells = specs.size() * datasets.size();
  std::vector<Cell> cells(n_cells);

  auto run_cell = [&](std::size_t ci) {
    const std::size_t si = ci / datasets.size();
    const std::size_t di = ci % datasets.size();
    Cell& cell = cells[ci];
    try {
      const Dataset& d = datasets[di];
      if (d.initial_failing.empty())
        throw std::runtime_error("dataset has no initial failing test");
      if (d.faults.empty()) throw std::runtime_error("dataset has no fault labels");
      const TestId failing = d.initial_failing.front();
      bool covers_any = false;
      for (int e = 0; e < d.num_elements(); ++e) covers_any = covers_any || d.covers(failing, e);
      if (!covers_any) throw std::runtime_error("initial failing test covers no element");
      ScorerSpec spec = specs[si];
      if (spec.kind == ScorerKind::Random)
        spec.seed = mix_seed(spec.seed.value_or(0), static_cast<std::uint64_t>(di));
      Scorer scorer(spec);
      cell.trace = select(d, failing, scorer, k_steps);
      cell.ok = true;
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
  };

  if (jobs <= 1) {
    for (std::size_t ci = 0; ci < n_cells; ++ci) run_cell(ci);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    const std::size_t n_workers = std::min<std::size_t>(static_cast<std::size_t>(jobs), n_cells);
    for (std::size_t w = 0; w < n_workers; ++w)
      workers.emplace_back([&] {
        for (std::size_t ci = next.fetch_add(1); ci < n_cells; ci = next.fetch_add(1))
          run_cell(ci);
      });
    for (auto& t : workers) t.join();
  }

  EvalReport report;
  for (std::size_t si = 0; si < specs.size(); ++si) {
    const std::string metric = scorer_kind_name(specs[si].kind);
    std::vector<const SelectionTrace*> traces;
    for (std::size_t di = 0; di < datasets.size(); ++di) {
      const Cell& cell = cells[si * datasets.size() + di];
      if (cell.ok) {
        traces.push_back(&cell.trace);
      } else {
        report.skipped.push_back(metric + "/" + labels[di] + ": " + cell.error);
      }
    }
    std::vector<std::vector<MethodId>> buggy_sets;
    for (std::size_t di = 0; di < datasets.size(); ++di)
      if (cells[si * datasets.size() + di].ok)
        buggy_sets.push_back(datasets[di].fault_methods());
    for (int k = 0; k <= k_steps; ++k) {
      EvalRow row;
      row.metric = metric;
      row.k = k;
      std::vector<int> best_ranks;
      std::vector<Ranking> rankings;
      for (std::size_t ti = 0; ti < traces.size(); ++ti) {
        const auto& step = traces[ti]->steps[static_cast<std::size_t>(k)];
        best_ranks.push_back(step.best_rank);
        rankings.push_back(rank_max_tiebreak(step.method_scores));
      }
      row.acc1 = acc_at_n(best_ranks, 1);
      row.acc3 = acc_at_n(best_ranks, 3);
      row.acc5 = acc_at_n(best_ranks, 5);
      row.acc10 = acc_at_n(best_ranks, 10);
      row.map = rankings.empty() ? 0.0 : mean_average_precision(rankings, buggy_sets);
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

inline EvalReport evaluate(const std::vector<Dataset>& datasets,
                           const std::vector<ScorerSpec>& specs, int k_steps, int jobs = 1) {
  std::vector<std::string> labels(datasets.size());
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = std::to_string(i);
  return evaluate(datasets, labels, specs, k_steps, jobs);
}

}  // namespace rlfdc
