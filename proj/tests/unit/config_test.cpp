#include <gtest/gtest.h>

#include "mtsdp/config.hpp"
#include "mtsdp/error.hpp"

namespace mtsdp {
namespace {

TEST(LoadConfig, EmptyObjectGivesPublishedDefaults) {
  auto c = load_config("{}");
  EXPECT_EQ(c.pretrained_dim, 100);
  EXPECT_EQ(c.word_dim, 25);
  EXPECT_EQ(c.pos_dim, 25);
  EXPECT_EQ(c.rep_dim, 100);
  EXPECT_EQ(c.mlp_layers, 2);
  EXPECT_EQ(c.lstm_layers, 2);
  EXPECT_EQ(c.lstm_dim, 200);
  EXPECT_EQ(c.rank, 100);
  EXPECT_DOUBLE_EQ(c.word_dropout, 0.25);
  EXPECT_EQ(c.epochs, 30);
  EXPECT_DOUBLE_EQ(c.eta0, 1e-3);
  EXPECT_DOUBLE_EQ(c.beta1, 0.9);
  EXPECT_DOUBLE_EQ(c.beta2, 0.9);
  EXPECT_DOUBLE_EQ(c.l2, 1e-6);
  EXPECT_DOUBLE_EQ(c.clip_norm, 1.0);
  EXPECT_EQ(c.ad3_max_iter, 500);
  EXPECT_DOUBLE_EQ(c.prune_threshold, 1e-4);
  EXPECT_EQ(c.label_min_count, 30);
  EXPECT_DOUBLE_EQ(c.fp_cost, 0.4);
  EXPECT_DOUBLE_EQ(c.fn_cost, 0.6);
  EXPECT_EQ(c.variant, Variant::Basic);
}

TEST(LoadConfig, OverridesOneKey) {
  auto c = load_config(R"({"rank": 8})");
  EXPECT_EQ(c.rank, 8);
  EXPECT_EQ(c.rep_dim, 100);
}

TEST(LoadConfig, UnknownKeyIsAnError) {
  EXPECT_THROW(load_config(R"({"rnak": 8})"), ConfigError);
}

TEST(LoadConfig, RejectsBadValues) {
  EXPECT_THROW(load_config(R"({"rank": 0})"), ConfigError);
  EXPECT_THROW(load_config(R"({"prune_threshold": 1.5})"), ConfigError);
  EXPECT_THROW(load_config(R"({"word_dropout": -1})"), ConfigError);
  EXPECT_THROW(load_config(R"({"variant": "FREDA2"})"), ConfigError);
  EXPECT_THROW(load_config(R"({"rank": "eight"})"), ConfigError);
  EXPECT_THROW(load_config("[1, 2]"), ConfigError);
  EXPECT_THROW(load_config("{"), ConfigError);
}

TEST(LoadConfig, JsonRoundTrip) {
  auto c = load_config(R"({"rank": 4, "variant": "FREDA3", "train_decoder": "exact", "seed": 9})");
  auto d = load_config(to_json(c));
  EXPECT_EQ(d.rank, 4);
  EXPECT_EQ(d.variant, Variant::Freda3);
  EXPECT_EQ(d.train_decoder, TrainDecoder::Exact);
  EXPECT_EQ(d.seed, 9u);
}

}  // namespace
}  // namespace mtsdp
