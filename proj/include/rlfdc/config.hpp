#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

namespace rlfdc {

struct Variant {
  bool no_embed = false;   // feed (state, action) straight into the head
  bool regular_q = false;  // targets from the online network instead of the target copy

  bool operator==(const Variant&) const = default;
};

enum class Optimizer { Sgd, Adam };

inline const char* optimizer_name(Optimizer o) {
  return o == Optimizer::Sgd ? "sgd" : "adam";
}

inline Optimizer optimizer_from_name(const std::string& s) {
  if (s == "sgd") return Optimizer::Sgd;
  if (s == "adam") return Optimizer::Adam;
  throw std::runtime_error("unknown optimizer: '" + s + "'");
}

struct TrainConfig {
  int steps_per_episode = 10;   // K
  int memory_capacity = 100;    // N
  int target_sync_period = 20;  // C
  int learn_period = 5;         // L
  double discount = 0.9;        // gamma
  double explore_prob = 0.1;    // sigma
  double learning_rate = 0.001;
  int batch_size = 32;
  int epochs = 30;
  std::uint64_t seed = 0;
  Variant variant;
  Optimizer optimizer = Optimizer::Adam;

  void validate() const {
    if (steps_per_episode < 1 || memory_capacity < 1 || target_sync_period < 1 ||
        learn_period < 1 || batch_size < 1 || epochs < 1)
      throw std::runtime_error("train config: counts must be >= 1");
    if (discount < 0.0 || discount > 1.0)
      throw std::runtime_error("train config: discount must be in [0,1]");
    if (explore_prob < 0.0 || explore_prob > 1.0)
      throw std::runtime_error("train config: exploration probability must be in [0,1]");
    if (!(learning_rate > 0.0))
      throw std::runtime_error("train config: learning rate must be positive");
  }
};

inline nlohmann::ordered_json train_config_to_json(const TrainConfig& c) {
  nlohmann::ordered_json j;
  j["steps_per_episode"] = c.steps_per_episode;
  j["memory_capacity"] = c.memory_capacity;
  j["target_sync_period"] = c.target_sync_period;
  j["learn_period"] = c.learn_period;
  j["discount"] = c.discount;
  j["explore_prob"] = c.explore_prob;
  j["learning_rate"] = c.learning_rate;
  j["batch_size"] = c.batch_size;
  j["epochs"] = c.epochs;
  j["seed"] = c.seed;
  j["no_embed"] = c.variant.no_embed;
  j["regular_q"] = c.variant.regular_q;
  j["optimizer"] = optimizer_name(c.optimizer);
  return j;
}

inline TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.steps_per_episode = j.at("steps_per_episode").get<int>();
  c.memory_capacity = j.at("memory_capacity").get<int>();
  c.target_sync_period = j.at("target_sync_period").get<int>();
  c.learn_period = j.at("learn_period").get<int>();
  c.discount = j.at("discount").get<double>();
  c.explore_prob = j.at("explore_prob").get<double>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.batch_size = j.at("batch_size").get<int>();
  c.epochs = j.at("epochs").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.variant.no_embed = j.at("no_embed").get<bool>();
  c.variant.regular_q = j.at("regular_q").get<bool>();
  c.optimizer = optimizer_from_name(j.at("optimizer").get<std::string>());
  c.validate();
  return c;
}

}  // namespace rlfdc
