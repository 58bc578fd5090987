#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rlfdc/config.hpp"
#include "rlfdc/io_util.hpp"
#include "rlfdc/rng.hpp"

namespace rlfdc {

inline constexpr int kStateDim = 2;
inline constexpr int kActionDim = 2;
inline constexpr int kEmbedDims[2] = {16, 16};
inline constexpr int kHeadDims[3] = {16, 32, 1};

struct Affine {
  int out_dim = 0;
  int in_dim = 0;
  std::vector<double> w;  // row-major, out_dim x in_dim
  std::vector<double> b;

  Affine() = default;
  Affine(int out, int in) : out_dim(out), in_dim(in), w(static_cast<std::size_t>(out) * in, 0.0), b(static_cast<std::size_t>(out), 0.0) {}

  void apply(const double* x, double* y) const {
    for (int o = 0; o < out_dim; ++o) {
      double acc = b[static_cast<std::size_t>(o)];
      const double* row = w.data() + static_cast<std::size_t>(o) * in_dim;
      for (int i = 0; i < in_dim; ++i) acc += row[i] * x[i];
      y[o] = acc;
    }
  }
};

struct NetParams {
  std::vector<Affine> embed;  // empty under no_embed
  std::vector<Affine> head;   // always 3 layers

  template <class Fn>
  void for_each_layer(Fn&& fn) {
    for (auto& l : embed) fn(l);
    for (auto& l : head) fn(l);
  }
  template <class Fn>
  void for_each_layer(Fn&& fn) const {
    for (const auto& l : embed) fn(l);
    for (const auto& l : head) fn(l);
  }
};

inline std::vector<double*> param_pointers(NetParams& p) {
  std::vector<double*> out;
  p.for_each_layer([&](Affine& l) {
    for (auto& v : l.w) out.push_back(&v);
    for (auto& v : l.b) out.push_back(&v);
  });
  return out;
}

inline NetParams zeros_like(const NetParams& p) {
  NetParams z;
  for (const auto& l : p.embed) z.embed.emplace_back(l.out_dim, l.in_dim);
  for (const auto& l : p.head) z.head.emplace_back(l.out_dim, l.in_dim);
  return z;
}

inline NetParams layout_for(const Variant& v) {
  NetParams p;
  if (!v.no_embed) {
    p.embed.emplace_back(kEmbedDims[0], kStateDim);
    p.embed.emplace_back(kEmbedDims[1], kEmbedDims[0]);
    p.head.emplace_back(kHeadDims[0], kEmbedDims[1] + kActionDim);
  } else {
    p.head.emplace_back(kHeadDims[0], kStateDim + kActionDim);
  }
  p.head.emplace_back(kHeadDims[1], kHeadDims[0]);
  p.head.emplace_back(kHeadDims[2], kHeadDims[1]);
  return p;
}

struct Sample {
  double state[kStateDim];
  double action[kActionDim];
};

namespace detail {

inline void relu_inplace(std::vector<double>& v) {
  for (auto& x : v)
    if (x < 0.0) x = 0.0;
}

// Pre-activations of every layer, kept for the backward pass.
struct ForwardCache {
  std::vector<std::vector<double>> embed_pre;  // per embed layer
  std::vector<double> joint;                   // head input
  std::vector<std::vector<double>> head_pre;   // per head layer
  double output = 0.0;
};

inline ForwardCache net_forward_cached(const NetParams& p, const Variant& v, const Sample& s) {
  ForwardCache c;
  std::vector<double> cur;
  if (!v.no_embed) {
    cur.assign(s.state, s.state + kStateDim);
    for (const auto& layer : p.embed) {
      std::vector<double> pre(static_cast<std::size_t>(layer.out_dim));
      layer.apply(cur.data(), pre.data());
      c.embed_pre.push_back(pre);
      relu_inplace(pre);
      cur = std::move(pre);
    }
    c.joint = cur;
  } else {
    c.joint.assign(s.state, s.state + kStateDim);
  }
  c.joint.insert(c.joint.end(), s.action, s.action + kActionDim);
  cur = c.joint;
  for (std::size_t li = 0; li < p.head.size(); ++li) {
    const auto& layer = p.head[li];
    std::vector<double> pre(static_cast<std::size_t>(layer.out_dim));
    layer.apply(cur.data(), pre.data());
    c.head_pre.push_back(pre);
    if (li + 1 < p.head.size()) relu_inplace(pre);
    cur = std::move(pre);
  }
  c.output = cur[0];
  return c;
}

}  // namespace detail

inline double net_forward(const NetParams& p, const Variant& v, const Sample& s) {
  for (double x : {s.state[0], s.state[1], s.action[0], s.action[1]})
    if (!std::isfinite(x)) throw std::runtime_error("forward: non-finite input");
  return detail::net_forward_cached(p, v, s).output;
}

// Mean squared error against fixed targets.
inline double batch_loss(const NetParams& p, const Variant& v, std::span<const Sample> samples,
                         std::span<const double> targets) {
  if (samples.empty()) throw std::runtime_error("batch_loss: empty batch");
  double total = 0.0;
  for (std::size_t j = 0; j < samples.size(); ++j) {
    const double diff = targets[j] - net_forward(p, v, samples[j]);
    total += diff * diff;
  }
  return total / static_cast<double>(samples.size());
}

// Analytic gradient of batch_loss with respect to every weight and bias.
// Targets are treated as constants.
inline NetParams batch_gradient(const NetParams& p, const Variant& v,
                                std::span<const Sample> samples, std::span<const double> targets,
                                double* loss_out = nullptr) {
  if (samples.empty()) throw std::runtime_error("batch_gradient: empty batch");
  NetParams grad = zeros_like(p);
  double loss = 0.0;
  const double inv_b = 1.0 / static_cast<double>(samples.size());
  for (std::size_t j = 0; j < samples.size(); ++j) {
    const auto cache = detail::net_forward_cached(p, v, samples[j]);
    const double diff = targets[j] - cache.output;
    loss += diff * diff;
    double upstream = -2.0 * diff * inv_b;  // dL/d(output)

    // Head, last layer to first.
    std::vector<double> d_out{upstream};
    for (int li = static_cast<int>(p.head.size()) - 1; li >= 0; --li) {
      const Affine& layer = p.head[static_cast<std::size_t>(li)];
      Affine& g = grad.head[static_cast<std::size_t>(li)];
      // Input activations of this layer.
      std::vector<double> input;
      if (li == 0) {
        input = cache.joint;
      } else {
        input = cache.head_pre[static_cast<std::size_t>(li - 1)];
        detail::relu_inplace(input);
      }
      std::vector<double> d_in(static_cast<std::size_t>(layer.in_dim), 0.0);
      for (int o = 0; o < layer.out_dim; ++o) {
        const double d = d_out[static_cast<std::size_t>(o)];
        if (d == 0.0) continue;
        g.b[static_cast<std::size_t>(o)] += d;
        double* grow = g.w.data() + static_cast<std::size_t>(o) * layer.in_dim;
        const double* wrow = layer.w.data() + static_cast<std::size_t>(o) * layer.in_dim;
        for (int i = 0; i < layer.in_dim; ++i) {
          grow[i] += d * input[static_cast<std::size_t>(i)];
          d_in[static_cast<std::size_t>(i)] += d * wrow[i];
        }
      }
      if (li > 0) {
        const auto& pre = cache.head_pre[static_cast<std::size_t>(li - 1)];
        for (std::size_t i = 0; i < d_in.size(); ++i)
          if (pre[i] <= 0.0) d_in[i] = 0.0;
      }
      d_out = std::move(d_in);
    }

    // Embedding path: first kEmbedDims[1] entries of the joint input.
    if (!v.no_embed) {
      std::vector<double> d_embed(d_out.begin(), d_out.begin() + kEmbedDims[1]);
      for (int li = static_cast<int>(p.embed.size()) - 1; li >= 0; --li) {
        const Affine& layer = p.embed[static_cast<std::size_t>(li)];
        Affine& g = grad.embed[static_cast<std::size_t>(li)];
        const auto& pre = cache.embed_pre[static_cast<std::size_t>(li)];
        for (std::size_t i = 0; i < d_embed.size(); ++i)
          if (pre[i] <= 0.0) d_embed[i] = 0.0;
        std::vector<double> input;
        if (li == 0) {
          input.assign(samples[j].state, samples[j].state + kStateDim);
        } else {
          input = cache.embed_pre[static_cast<std::size_t>(li - 1)];
          detail::relu_inplace(input);
        }
        std::vector<double> d_in(static_cast<std::size_t>(layer.in_dim), 0.0);
        for (int o = 0; o < layer.out_dim; ++o) {
          const double d = d_embed[static_cast<std::size_t>(o)];
          if (d == 0.0) continue;
          g.b[static_cast<std::size_t>(o)] += d;
          double* grow = g.w.data() + static_cast<std::size_t>(o) * layer.in_dim;
          const double* wrow = layer.w.data() + static_cast<std::size_t>(o) * layer.in_dim;
          for (int i = 0; i < layer.in_dim; ++i) {
            grow[i] += d * input[static_cast<std::size_t>(i)];
            d_in[static_cast<std::size_t>(i)] += d * wrow[i];
          }
        }
        d_embed = std::move(d_in);
      }
    }
  }
  if (loss_out) *loss_out = loss * inv_b;
  return grad;
}

// Online/target parameter pair plus the input normalizer that must travel
// with the trained weights.
struct QModel {
  Variant variant;
  double num_tests_divisor = 11.0;
  NetParams online;
  NetParams target;
  TrainConfig config;  // echoed into the model document

  double forward(const Sample& s) const { return net_forward(online, variant, s); }
  double forward_target(const Sample& s) const { return net_forward(target, variant, s); }
  void sync_target() { target = online; }
};

// Weights uniform in [-sqrt(1/fan_in), +sqrt(1/fan_in)] per layer, drawn in
// a fixed order from a dedicated stream of the config seed. The target copy
// starts equal to the online copy.
inline QModel init_model(const TrainConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  QModel m;
  m.variant = cfg.variant;
  m.config = cfg;
  m.config.seed = seed;
  m.num_tests_divisor = static_cast<double>(cfg.steps_per_episode + 1);
  m.online = layout_for(cfg.variant);
  Rng rng(mix_seed(seed, 0xB00F));
  m.online.for_each_layer([&](Affine& l) {
    const double bound = std::sqrt(1.0 / static_cast<double>(l.in_dim));
    for (auto& x : l.w) x = rng.uniform(-bound, bound);
    for (auto& x : l.b) x = rng.uniform(-bound, bound);
  });
  m.target = m.online;
  return m;
}

// --- persistence ------------------------------------------------------------

inline std::string serialize_model(const QModel& m) {
  nlohmann::ordered_json doc;
  doc["version"] = 1;
  doc["variant"] = {{"no_embed", m.variant.no_embed}, {"regular_q", m.variant.regular_q}};
  nlohmann::ordered_json dims;
  dims["state"] = kStateDim;
  dims["action"] = kActionDim;
  dims["embed"] = m.variant.no_embed ? nlohmann::ordered_json::array()
                                     : nlohmann::ordered_json{kEmbedDims[0], kEmbedDims[1]};
  dims["head"] = {kHeadDims[0], kHeadDims[1], kHeadDims[2]};
  doc["dims"] = dims;
  doc["normalizers"] = {{"num_tests_divisor", m.num_tests_divisor}};
  nlohmann::ordered_json layers = nlohmann::ordered_json::array();
  auto dump_layer = [&](const char* group, int index, const Affine& l) {
    nlohmann::ordered_json jl;
    jl["group"] = group;
    jl["index"] = index;
    jl["rows"] = l.out_dim;
    jl["cols"] = l.in_dim;
    jl["w"] = l.w;
    jl["b"] = l.b;
    layers.push_back(std::move(jl));
  };
  for (std::size_t i = 0; i < m.online.embed.size(); ++i)
    dump_layer("embed", static_cast<int>(i), m.online.embed[i]);
  for (std::size_t i = 0; i < m.online.head.size(); ++i)
    dump_layer("head", static_cast<int>(i), m.online.head[i]);
  doc["layers"] = std::move(layers);
  doc["train_config"] = train_config_to_json(m.config);
  doc["seed"] = m.config.seed;
  return doc.dump(2) + "\n";
}

inline QModel parse_model(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("malformed model document: ") + e.what());
  }
  if (!doc.contains("version") || doc["version"].get<int>() != 1)
    throw std::runtime_error("unsupported model document version");
  QModel m;
  try {
    m.variant.no_embed = doc.at("variant").at("no_embed").get<bool>();
    m.variant.regular_q = doc.at("variant").at("regular_q").get<bool>();
    m.num_tests_divisor = doc.at("normalizers").at("num_tests_divisor").get<double>();
    m.config = train_config_from_json(doc.at("train_config"));
    m.online = layout_for(m.variant);
    const auto& layers = doc.at("layers");
    std::size_t expected = m.online.embed.size() + m.online.head.size();
    if (layers.size() != expected)
      throw std::runtime_error("model document: unexpected layer count");
    for (const auto& jl : layers) {
      const std::string group = jl.at("group").get<std::string>();
      const int index = jl.at("index").get<int>();
      std::vector<Affine>* vec = nullptr;
      if (group == "embed")
        vec = &m.online.embed;
      else if (group == "head")
        vec = &m.online.head;
      else
        throw std::runtime_error("model document: unknown layer group '" + group + "'");
      if (index < 0 || static_cast<std::size_t>(index) >= vec->size())
        throw std::runtime_error("model document: layer index out of range");
      Affine& l = (*vec)[static_cast<std::size_t>(index)];
      if (jl.at("rows").get<int>() != l.out_dim || jl.at("cols").get<int>() != l.in_dim)
        throw std::runtime_error("model document: layer shape mismatch");
      const auto w = jl.at("w").get<std::vector<double>>();
      const auto b = jl.at("b").get<std::vector<double>>();
      if (w.size() != l.w.size() || b.size() != l.b.size())
        throw std::runtime_error("model document: layer array size mismatch");
      l.w = w;
      l.b = b;
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("malformed model document: ") + e.what());
  }
  m.online.for_each_layer([](const Affine& l) {
    for (double x : l.w)
      if (!std::isfinite(x)) throw std::runtime_error("model document: non-finite weight");
    for (double x : l.b)
      if (!std::isfinite(x)) throw std::runtime_error("model document: non-finite bias");
  });
  if (!(m.num_tests_divisor > 0.0))
    throw std::runtime_error("model document: normalizer must be positive");
  m.target = m.online;
  return m;
}

inline void save_model(const QModel& m, const std::string& path) {
  write_file_atomic(path, serialize_model(m));
}

inline QModel load_model(const std::string& path) { return parse_model(read_file(path)); }

}  // namespace rlfdc
