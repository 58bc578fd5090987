#include "rlfdc/network.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "rlfdc/rng.hpp"

using namespace rlfdc;

namespace {

TrainConfig default_config() { return TrainConfig{}; }

void fill_constant(NetParams& p, double w, double b) {
  p.for_each_layer([&](Affine& l) {
    for (auto& x : l.w) x = w;
    for (auto& x : l.b) x = b;
  });
}

void randomize(NetParams& p, Rng& rng, double scale = 0.6) {
  p.for_each_layer([&](Affine& l) {
    for (auto& x : l.w) x = rng.uniform(-scale, scale);
    for (auto& x : l.b) x = rng.uniform(-scale, scale);
  });
}

TEST(InitModel, DeterministicAndShaped) {
  const TrainConfig cfg = default_config();
  const QModel a = init_model(cfg, 42);
  const QModel b = init_model(cfg, 42);
  EXPECT_EQ(serialize_model(a), serialize_model(b));
  const QModel c = init_model(cfg, 43);
  EXPECT_NE(serialize_model(a), serialize_model(c));

  ASSERT_EQ(a.online.embed.size(), 2u);
  EXPECT_EQ(a.online.embed[0].in_dim, 2);
  EXPECT_EQ(a.online.embed[0].out_dim, 16);
  EXPECT_EQ(a.online.head[0].in_dim, 18);
  EXPECT_EQ(a.online.head[2].out_dim, 1);
  EXPECT_DOUBLE_EQ(a.num_tests_divisor, 11.0);

  TrainConfig ne = cfg;
  ne.variant.no_embed = true;
  const QModel d = init_model(ne, 42);
  EXPECT_TRUE(d.online.embed.empty());
  EXPECT_EQ(d.online.head[0].in_dim, 4);
}

TEST(InitModel, TargetEqualsOnline) {
  const QModel m = init_model(default_config(), 9);
  Sample s{{0.4, 0.2}, {0.6, 0.1}};
  EXPECT_DOUBLE_EQ(m.forward(s), m.forward_target(s));
}

TEST(InitModel, WeightsWithinFanInBound) {
  const QModel m = init_model(default_config(), 123);
  m.online.for_each_layer([](const Affine& l) {
    const double bound = std::sqrt(1.0 / static_cast<double>(l.in_dim));
    for (double x : l.w) {
      EXPECT_GE(x, -bound);
      EXPECT_LE(x, bound);
    }
  });
}

TEST(Forward, ZeroWeights) {
  QModel m = init_model(default_config(), 1);
  fill_constant(m.online, 0.0, 0.0);
  Sample s{{0.3, 0.9}, {0.5, 0.2}};
  EXPECT_DOUBLE_EQ(m.forward(s), 0.0);
  m.online.head.back().b[0] = 0.3;
  EXPECT_DOUBLE_EQ(m.forward(s), 0.3);
}

// With every weight equal to c and every bias equal to b the propagation
// collapses to a scalar recurrence that can be followed by hand.
TEST(Forward, UniformWeightClosedForm) {
  QModel m = init_model(default_config(), 1);
  const double c = 0.05, b = 0.01;
  fill_constant(m.online, c, b);
  const Sample s{{0.3, 0.7}, {0.2, 0.9}};
  const double u = std::max(0.0, c * (0.3 + 0.7) + b);
  const double v = std::max(0.0, 16.0 * c * u + b);
  const double w1 = std::max(0.0, c * (16.0 * v + 0.2 + 0.9) + b);
  const double w2 = std::max(0.0, 16.0 * c * w1 + b);
  const double expected = 32.0 * c * w2 + b;
  EXPECT_NEAR(m.forward(s), expected, 1e-12);

  TrainConfig ne = default_config();
  ne.variant.no_embed = true;
  QModel mn = init_model(ne, 1);
  fill_constant(mn.online, c, b);
  const double n1 = std::max(0.0, c * (0.3 + 0.7 + 0.2 + 0.9) + b);
  const double n2 = std::max(0.0, 16.0 * c * n1 + b);
  EXPECT_NEAR(mn.forward(s), 32.0 * c * n2 + b, 1e-12);
}

TEST(Forward, RejectsNonFiniteInput) {
  const QModel m = init_model(default_config(), 7);
  Sample s{{std::nan(""), 0.0}, {0.0, 0.0}};
  EXPECT_THROW(m.forward(s), std::runtime_error);
}

// Central finite differences against the analytic batch gradient across the
// three variants.
TEST(Gradient, MatchesFiniteDifferences) {
  Rng rng(7777);
  for (int round = 0; round < 12; ++round) {
    TrainConfig cfg = default_config();
    cfg.variant.no_embed = round % 3 == 1;
    cfg.variant.regular_q = round % 3 == 2;
    QModel m = init_model(cfg, 100 + static_cast<std::uint64_t>(round));
    randomize(m.online, rng);

    const std::size_t batch = 1 + rng.next_index(6);
    std::vector<Sample> samples(batch);
    std::vector<double> targets(batch);
    for (std::size_t j = 0; j < batch; ++j) {
      samples[j] = Sample{{rng.next_double(), rng.next_double()},
                          {rng.next_double(), rng.next_double()}};
      targets[j] = rng.uniform(-1.0, 1.0);
    }

    NetParams grad = batch_gradient(m.online, m.variant, samples, targets);
    auto grad_ptrs = param_pointers(grad);
    auto ptrs = param_pointers(m.online);
    const double eps = 1e-5;
    double max_rel = 0.0;
    for (std::size_t i = 0; i < ptrs.size(); ++i) {
      const double saved = *ptrs[i];
      *ptrs[i] = saved + eps;
      const double up = batch_loss(m.online, m.variant, samples, targets);
      *ptrs[i] = saved - eps;
      const double down = batch_loss(m.online, m.variant, samples, targets);
      *ptrs[i] = saved;
      const double fd = (up - down) / (2.0 * eps);
      const double a = *grad_ptrs[i];
      const double rel = std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), 1e-6});
      max_rel = std::max(max_rel, rel);
    }
    EXPECT_LT(max_rel, 1e-4) << "round " << round;
  }
}

TEST(Persistence, RoundTripForwardIdentical) {
  QModel m = init_model(default_config(), 51);
  Rng rng(4);
  randomize(m.online, rng);
  const QModel loaded = parse_model(serialize_model(m));
  for (int i = 0; i < 100; ++i) {
    Sample s{{rng.next_double(), rng.next_double()}, {rng.next_double(), rng.next_double()}};
    EXPECT_EQ(m.forward(s), loaded.forward(s));  // bit-identical
  }
  EXPECT_EQ(serialize_model(m), serialize_model(loaded));
}

TEST(Persistence, NoEmbedRoundTrip) {
  TrainConfig cfg = default_config();
  cfg.variant.no_embed = true;
  const QModel m = init_model(cfg, 8);
  const QModel loaded = parse_model(serialize_model(m));
  EXPECT_TRUE(loaded.variant.no_embed);
  EXPECT_EQ(loaded.online.head[0].in_dim, 4);
}

TEST(Persistence, TamperedShapeRejected) {
  const QModel m = init_model(default_config(), 3);
  std::string doc = serialize_model(m);
  const auto pos = doc.find("\"rows\": 16");
  ASSERT_NE(pos, std::string::npos);
  doc.replace(pos, 10, "\"rows\": 17");
  EXPECT_THROW(parse_model(doc), std::runtime_error);
}

TEST(Persistence, VersionMismatchRejected) {
  const QModel m = init_model(default_config(), 3);
  std::string doc = serialize_model(m);
  const auto pos = doc.find("\"version\": 1");
  ASSERT_NE(pos, std::string::npos);
  doc.replace(pos, 12, "\"version\": 2");
  EXPECT_THROW(parse_model(doc), std::runtime_error);
}

TEST(TrainConfigValidation, RejectsBadRanges) {
  TrainConfig bad_sigma;
  bad_sigma.explore_prob = 1.5;
  EXPECT_THROW(bad_sigma.validate(), std::runtime_error);
  TrainConfig bad_batch;
  bad_batch.batch_size = 0;
  EXPECT_THROW(bad_batch.validate(), std::runtime_error);
  TrainConfig bad_gamma;
  bad_gamma.discount = -0.1;
  EXPECT_THROW(bad_gamma.validate(), std::runtime_error);
}

TEST(Persistence, NonFiniteWeightRejected) {
  const QModel m = init_model(default_config(), 3);
  std::string doc = serialize_model(m);
  nlohmann::json j = nlohmann::json::parse(doc);
  // nlohmann serializes NaN as null, which fails the double conversion.
  j["layers"][0]["w"][0] = nullptr;
  EXPECT_THROW(parse_model(j.dump()), std::runtime_error);
}

TEST(SyncTarget, CopiesParameters) {
  QModel m = init_model(default_config(), 11);
  Rng rng(2);
  randomize(m.online, rng);
  Sample s{{0.2, 0.8}, {0.4, 0.1}};
  EXPECT_NE(m.forward(s), m.forward_target(s));
  m.sync_target();
  EXPECT_DOUBLE_EQ(m.forward(s), m.forward_target(s));
}

}  // namespace
