#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rlfdc/ambiguity.hpp"
#include "rlfdc/config.hpp"
#include "rlfdc/dataset.hpp"
#include "rlfdc/network.hpp"
#include "rlfdc/replay.hpp"
#include "rlfdc/sbfl.hpp"

namespace rlfdc {

// num_tests is divided by the model's frozen divisor (K+1); num_ag by the
// scope size, which is a property of the evaluation context.
inline std::array<double, kStateDim> normalized_state(const QModel& m, const StateVector& s,
                                                      std::size_t scope_size) {
  const double ag_div = scope_size > 0 ? static_cast<double>(scope_size) : 1.0;
  return {static_cast<double>(s.num_tests) / m.num_tests_divisor,
          static_cast<double>(s.num_ag) / ag_div};
}

inline std::array<double, kActionDim> normalized_action(const ActionVector& a) {
  return {a.cover, a.split_norm};
}

inline Sample make_sample(const std::array<double, kStateDim>& s,
                          const std::array<double, kActionDim>& a) {
  Sample smp;
  smp.state[0] = s[0];
  smp.state[1] = s[1];
  smp.action[0] = a[0];
  smp.action[1] = a[1];
  return smp;
}

inline double predict_fdc(const QModel& m, const SuiteContext& ctx, const BitVec& cov) {
  const auto state = normalized_state(m, state_features(ctx), ctx.scope().size());
  const auto action = normalized_action(action_features(ctx, cov));
  return m.forward(make_sample(state, action));
}

inline double predict_fdc(const QModel& m, const SuiteContext& ctx, TestId candidate) {
  if (ctx.in_suite(candidate))
    throw std::runtime_error("predict_fdc: candidate already in suite");
  return predict_fdc(m, ctx, ctx.data->tests[static_cast<std::size_t>(candidate)].coverage);
}

// Targets for a sampled batch, treated as constants by the gradient step.
// Terminal transitions bypass the value bootstrap entirely.
inline std::vector<double> compute_targets(const QModel& m,
                                           const std::vector<const Transition*>& batch,
                                           const TrainConfig& cfg) {
  std::vector<double> targets;
  targets.reserve(batch.size());
  for (const Transition* t : batch) {
    if (t->terminal || t->next_actions.empty()) {
      targets.push_back(t->reward);
      continue;
    }
    double best = 0.0;
    bool first = true;
    for (const auto& a : t->next_actions) {
      Sample s;
      s.state[0] = t->next_state[0];
      s.state[1] = t->next_state[1];
      s.action[0] = a[0];
      s.action[1] = a[1];
      const double q = cfg.variant.regular_q ? m.forward(s) : m.forward_target(s);
      if (first || q > best) best = q;
      first = false;
    }
    targets.push_back(t->reward + cfg.discount * best);
  }
  return targets;
}

// Adam moment buffers; only allocated when the config asks for Adam.
struct AdamState {
  NetParams m1, m2;
  long steps = 0;
};

inline void apply_gradient_step(QModel& model, const NetParams& grad, const TrainConfig& cfg,
                                AdamState* adam) {
  if (cfg.optimizer == Optimizer::Sgd) {
    auto apply = [&](std::vector<Affine>& params, const std::vector<Affine>& g) {
      for (std::size_t li = 0; li < params.size(); ++li) {
        for (std::size_t i = 0; i < params[li].w.size(); ++i)
          params[li].w[i] -= cfg.learning_rate * g[li].w[i];
        for (std::size_t i = 0; i < params[li].b.size(); ++i)
          params[li].b[i] -= cfg.learning_rate * g[li].b[i];
      }
    };
    apply(model.online.embed, grad.embed);
    apply(model.online.head, grad.head);
    return;
  }
  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  adam->steps += 1;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(adam->steps));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(adam->steps));
  auto apply = [&](std::vector<Affine>& params, const std::vector<Affine>& g,
                   std::vector<Affine>& m1, std::vector<Affine>& m2) {
    for (std::size_t li = 0; li < params.size(); ++li) {
      auto step = [&](std::vector<double>& p, const std::vector<double>& gr,
                      std::vector<double>& s1, std::vector<double>& s2) {
        for (std::size_t i = 0; i < p.size(); ++i) {
          s1[i] = beta1 * s1[i] + (1.0 - beta1) * gr[i];
          s2[i] = beta2 * s2[i] + (1.0 - beta2) * gr[i] * gr[i];
          p[i] -= cfg.learning_rate * (s1[i] / bc1) / (std::sqrt(s2[i] / bc2) + eps);
        }
      };
      step(params[li].w, g[li].w, m1[li].w, m2[li].w);
      step(params[li].b, g[li].b, m1[li].b, m2[li].b);
    }
  };
  apply(model.online.embed, grad.embed, adam->m1.embed, adam->m2.embed);
  apply(model.online.head, grad.head, adam->m1.head, adam->m2.head);
}

// Instrumentation sink for training-mechanics checks.
struct TrainTrace {
  std::vector<long> learn_steps;              // global step counter at each learn event
  std::vector<long> sync_steps;               // global step counter at each target sync
  std::vector<std::size_t> memory_size_at_learn;
  std::vector<long long> evicted_ids;         // order of FIFO evictions
  std::vector<std::pair<double, double>> terminal_target_reward;
  std::vector<int> episodes_per_epoch;
  std::vector<TestId> selections;  // every selected test, in step order
  long total_steps = 0;
};

namespace detail {

struct EpisodePool {
  std::vector<TestId> candidates;  // non-failing tests, ascending
};

inline EpisodePool training_pool(const Dataset& d, TestId episode_failing) {
  EpisodePool pool;
  for (TestId t = 0; t < d.num_tests(); ++t) {
    if (t == episode_failing) continue;
    if (d.tests[static_cast<std::size_t>(t)].outcome == Outcome::Fail) continue;
    pool.candidates.push_back(t);
  }
  return pool;
}

inline void check_trainable(const Dataset& d, int k_steps, const std::string& label) {
  if (d.initial_failing.empty())
    throw std::runtime_error("train: dataset " + label + " has no initial failing test");
  if (d.faults.empty())
    throw std::runtime_error("train: dataset " + label + " has no fault labels");
  const auto pool = training_pool(d, d.initial_failing.front());
  if (static_cast<int>(pool.candidates.size()) < k_steps + 1)
    throw std::runtime_error("train: dataset " + label + " has fewer than K+1 candidate tests");
}

}  // namespace detail

// Double Q-learning with experience replay over one episode per fault per
// epoch. Deterministic given (datasets, config, seed).
inline QModel train(const std::vector<Dataset>& datasets, const TrainConfig& cfg,
                    TrainTrace* trace = nullptr) {
  cfg.validate();
  if (datasets.empty()) throw std::runtime_error("train: no training datasets");
  for (std::size_t i = 0; i < datasets.size(); ++i)
    detail::check_trainable(datasets[i], cfg.steps_per_episode, std::to_string(i));

  QModel model = init_model(cfg, cfg.seed);
  AdamState adam;
  if (cfg.optimizer == Optimizer::Adam) {
    adam.m1 = zeros_like(model.online);
    adam.m2 = zeros_like(model.online);
  }
  ReplayMemory memory(static_cast<std::size_t>(cfg.memory_capacity));
  Rng rng(mix_seed(cfg.seed, 0x7A41));
  long counter = 0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    int episodes = 0;
    for (const Dataset& data : datasets) {
      const TestId failing = data.initial_failing.front();
      SuiteContext ctx(data, failing);
      auto pool = detail::training_pool(data, failing).candidates;
      const auto buggy = data.fault_methods();
      const int init_rank = best_buggy_rank(localize(ctx), buggy);

      for (int k = 0; k < cfg.steps_per_episode && !pool.empty(); ++k) {
        const auto partition = ambiguity_partition(ctx);
        const double denom = split_max(partition);
        const StateVector sv{1 + static_cast<int>(ctx.selected.size()),
                             static_cast<int>(partition.groups.size())};
        const auto state = normalized_state(model, sv, ctx.scope().size());

        std::vector<std::array<double, kActionDim>> actions(pool.size());
        for (std::size_t i = 0; i < pool.size(); ++i) {
          const BitVec& cov = data.tests[static_cast<std::size_t>(pool[i])].coverage;
          const double raw = split_raw(partition, cov);
          actions[i] = {cover_feature(ctx, cov), denom > 0.0 ? raw / denom : 0.0};
        }

        std::size_t pick;
        if (rng.bernoulli(cfg.explore_prob)) {
          pick = rng.next_index(pool.size());
        } else {
          pick = 0;
          double best = net_forward(model.online, model.variant,
                                    make_sample(state, actions[0]));
          for (std::size_t i = 1; i < pool.size(); ++i) {
            const double q = net_forward(model.online, model.variant,
                                         make_sample(state, actions[i]));
            if (q > best) {
              best = q;
              pick = i;  // pool ascending, so ties stay with the lowest id
            }
          }
        }

        Transition tr;
        tr.input = make_sample(state, actions[pick]);
        if (trace) trace->selections.push_back(pool[static_cast<std::size_t>(pick)]);
        ctx.add(pool[static_cast<std::size_t>(pick)]);
        pool.erase(pool.begin() + static_cast<long>(pick));

        const int cur_rank = best_buggy_rank(localize(ctx), buggy);
        tr.reward = reward(init_rank, cur_rank);

        const auto next_partition = ambiguity_partition(ctx);
        const double next_denom = split_max(next_partition);
        const StateVector nsv{1 + static_cast<int>(ctx.selected.size()),
                              static_cast<int>(next_partition.groups.size())};
        const auto next_state = normalized_state(model, nsv, ctx.scope().size());
        tr.next_state[0] = next_state[0];
        tr.next_state[1] = next_state[1];
        tr.next_actions.reserve(pool.size());
        for (TestId t : pool) {
          const BitVec& cov = data.tests[static_cast<std::size_t>(t)].coverage;
          const double raw = split_raw(next_partition, cov);
          tr.next_actions.push_back(
              {cover_feature(ctx, cov), next_denom > 0.0 ? raw / next_denom : 0.0});
        }
        tr.terminal = (k + 1 == cfg.steps_per_episode) || tr.next_actions.empty();

        const long long evicted = memory.push(std::move(tr));
        if (trace && evicted >= 0) trace->evicted_ids.push_back(evicted);
        ++counter;

        if (memory.full() && counter % cfg.learn_period == 0) {
          const auto idx = rng.sample_indices(memory.size(),
                                              static_cast<std::size_t>(cfg.batch_size));
          std::vector<const Transition*> batch;
          batch.reserve(idx.size());
          for (std::size_t i : idx) batch.push_back(&memory[i]);
          const auto targets = compute_targets(model, batch, cfg);
          if (trace) {
            trace->learn_steps.push_back(counter);
            trace->memory_size_at_learn.push_back(memory.size());
            for (std::size_t j = 0; j < batch.size(); ++j)
              if (batch[j]->terminal)
                trace->terminal_target_reward.emplace_back(targets[j], batch[j]->reward);
          }
          std::vector<Sample> inputs;
          inputs.reserve(batch.size());
          for (const Transition* t : batch) inputs.push_back(t->input);
          double loss = 0.0;
          const NetParams grad =
              batch_gradient(model.online, model.variant, inputs, targets, &loss);
          if (!std::isfinite(loss)) throw std::runtime_error("train: non-finite loss");
          apply_gradient_step(model, grad, cfg, &adam);
        }

        if (counter % cfg.target_sync_period == 0) {
          model.sync_target();
          if (trace) trace->sync_steps.push_back(counter);
        }
      }
      ++episodes;
    }
    if (trace) trace->episodes_per_epoch.push_back(episodes);
  }
  if (trace) trace->total_steps = counter;
  return model;
}

}  // namespace rlfdc
