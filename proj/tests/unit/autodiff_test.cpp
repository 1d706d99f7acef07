#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <sstream>

#include "mtsdp/ad/optim.hpp"
#include "mtsdp/ad/param.hpp"
#include "mtsdp/ad/tape.hpp"
#include "mtsdp/error.hpp"

namespace mtsdp::ad {
namespace {

void randomize(Param& p, Rng& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  for (double& v : p.values()) v = dist(rng);
}

TEST(Glorot, BoundForSquareThree) {
  EXPECT_DOUBLE_EQ(glorot_bound(3, 3), 1.0);
  Rng rng(1);
  for (double v : glorot_init(3, 3, rng)) {
    EXPECT_GE(v, -1.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(Glorot, BoundFor200By100) {
  EXPECT_NEAR(glorot_bound(200, 100), 0.141421, 1e-6);
}

TEST(Glorot, ManyDrawsStayInBoundAndCenter) {
  Rng rng(7);
  const double bound = glorot_bound(250, 150);
  auto values = glorot_init(250, 400, rng);  // 10^5 draws
  double mean = 0.0;
  for (double v : values) {
    ASSERT_LE(std::abs(v), glorot_bound(250, 400));
    mean += v;
  }
  mean /= values.size();
  EXPECT_LT(std::abs(mean), 0.01 * bound);
}

TEST(Backward, TanhAtZero) {
  ParamStore store;
  Param& x = store.add("x", 1, 1);
  Tape tape;
  auto y = tape.sum(tape.tanh(tape.param(x)));
  tape.backward(y);
  EXPECT_DOUBLE_EQ(x.grads()[0], 1.0);
}

TEST(Backward, InnerProductWithItself) {
  ParamStore store;
  Param& x = store.add("x", 1, 3);
  x.values()[0] = 1.5;
  x.values()[1] = -2.0;
  x.values()[2] = 0.25;
  Tape tape;
  auto v = tape.param(x);
  tape.backward(tape.dot(v, v));
  for (int k = 0; k < 3; ++k) EXPECT_DOUBLE_EQ(x.grads()[k], 2.0 * x.values()[k]);
}

TEST(Backward, UsesOfOneParameterAccumulate) {
  ParamStore store;
  Param& w = store.add("w", 1, 2);
  w.values()[0] = 3.0;
  w.values()[1] = -1.0;
  Tape tape;
  auto a = tape.sum(tape.param(w));
  auto b = tape.sum(tape.scale(tape.param(w), 2.0));
  tape.backward(tape.add(a, b));
  EXPECT_DOUBLE_EQ(w.grads()[0], 3.0);
  EXPECT_DOUBLE_EQ(w.grads()[1], 3.0);
}

TEST(Backward, ShapeMismatchAtRecordTime) {
  ParamStore store;
  Param& w = store.add("w", 2, 3);
  Param& x = store.add("x", 1, 4);
  Tape tape;
  EXPECT_THROW(tape.matvec(w, tape.param(x)), LogicError);
  EXPECT_THROW(tape.add(tape.param(x), tape.param(w)), LogicError);
  EXPECT_THROW(tape.dot(tape.param(x), tape.param(w)), LogicError);
}

// Random two-layer tanh MLP scored against a fixed vector.
TEST(Backward, TwoLayerMlpMatchesFiniteDifferences) {
  Rng rng(11);
  ParamStore store;
  Param& x = store.add("x", 1, 6);
  Param& w1 = store.add("w1", 5, 6);
  Param& b1 = store.add("b1", 1, 5);
  Param& w2 = store.add("w2", 4, 5);
  Param& b2 = store.add("b2", 1, 4);
  Param& psi = store.add("psi", 1, 4);
  for (auto* p : store.all()) randomize(*p, rng);
  Objective f = [&](bool grad) {
    Tape tape;
    auto h = tape.tanh(tape.add(tape.matvec(w1, tape.param(x)), tape.param(b1)));
    auto y = tape.tanh(tape.add(tape.matvec(w2, h), tape.param(b2)));
    auto s = tape.dot(y, tape.param(psi));
    if (grad) tape.backward(s);
    return tape.scalar(s);
  };
  auto params = store.all();
  auto r = finite_diff_check(f, params, 1e-5);
  EXPECT_LT(r.max_rel_error, 1e-4) << r.worst_param << "[" << r.worst_index << "]";
  EXPECT_EQ(r.checked, store.num_values());
}

// Property: every primitive's backward agrees with central differences for
// random shapes up to 16.
class PrimitiveGradient : public ::testing::TestWithParam<int> {};

TEST_P(PrimitiveGradient, MatchesFiniteDifferences) {
  Rng rng(100 + GetParam());
  using Build = std::function<Var(Tape&, Param&, Param&, Param&, int)>;
  const std::vector<std::pair<const char*, Build>> ops = {
      {"matvec", [](Tape& t, Param& a, Param&, Param& w, int) { return t.matvec(w, t.param(a)); }},
      {"matvec_cols",
       [](Tape& t, Param& a, Param&, Param& w, int) {
         return t.matvec_cols(w, 0, t.slice(t.param(a), 0, t.dim(t.param(a))));
       }},
      {"add", [](Tape& t, Param& a, Param& b, Param&, int) { return t.add(t.param(a), t.param(b)); }},
      {"addn",
       [](Tape& t, Param& a, Param& b, Param&, int) {
         Var terms[] = {t.param(a), t.param(b), t.param(a)};
         return t.add(terms);
       }},
      {"mul", [](Tape& t, Param& a, Param& b, Param&, int) { return t.mul(t.param(a), t.param(b)); }},
      {"tanh", [](Tape& t, Param& a, Param&, Param&, int) { return t.tanh(t.param(a)); }},
      {"sigmoid", [](Tape& t, Param& a, Param&, Param&, int) { return t.sigmoid(t.param(a)); }},
      {"concat",
       [](Tape& t, Param& a, Param& b, Param&, int) {
         Var parts[] = {t.param(b), t.param(a)};
         return t.concat(parts);
       }},
      {"slice",
       [](Tape& t, Param& a, Param&, Param&, int n) { return t.slice(t.param(a), n / 3, n - n / 3); }},
      {"dot", [](Tape& t, Param& a, Param& b, Param&, int) { return t.dot(t.param(a), t.param(b)); }},
      {"sum", [](Tape& t, Param& a, Param&, Param&, int) { return t.sum(t.param(a)); }},
      {"pick", [](Tape& t, Param& a, Param&, Param&, int n) { return t.pick(t.param(a), n - 1); }},
      {"scale", [](Tape& t, Param& a, Param&, Param&, int) { return t.scale(t.param(a), -1.7); }},
      {"param_row",
       [](Tape& t, Param&, Param&, Param& w, int) { return t.tanh(t.param_row(w, w.rows() - 1)); }},
      {"weighted_sum",
       [](Tape& t, Param& a, Param& b, Param&, int) {
         Var terms[] = {t.dot(t.param(a), t.param(b)), t.sum(t.param(a))};
         const double coeffs[] = {0.7, -2.0};
         return t.weighted_sum(terms, coeffs);
       }},
  };

  for (const auto& [name, build] : ops) {
    const int n = 1 + static_cast<int>(rng() % 16);
    const int rows = 1 + static_cast<int>(rng() % 16);
    ParamStore store;
    Param& a = store.add("a", 1, n);
    Param& b = store.add("b", 1, n);
    Param& w = store.add("w", rows, n);
    for (auto* p : store.all()) randomize(*p, rng, 2.0);
    // Project the op's output onto a fixed random direction to get a scalar.
    std::vector<double> proj(64);
    for (double& v : proj) v = std::uniform_real_distribution<double>(-1, 1)(rng);
    Objective f = [&](bool grad) {
      Tape tape;
      Var y = build(tape, a, b, w, n);
      Var dir = tape.constant(std::span<const double>(proj.data(), tape.dim(y)));
      Var s = tape.dot(y, dir);
      if (grad) tape.backward(s);
      return tape.scalar(s);
    };
    auto params = store.all();
    auto r = finite_diff_check(f, params, 1e-5);
    EXPECT_LT(r.max_rel_error, 1e-4) << name << " n=" << n << " worst " << r.worst_param;
  }
}

INSTANTIATE_TEST_SUITE_P(RandomShapes, PrimitiveGradient, ::testing::Range(0, 8));

TEST(FiniteDiff, LinearFunctionIsExact) {
  ParamStore store;
  Param& x = store.add("x", 1, 4);
  const std::vector<double> c = {0.5, -1.0, 2.0, 3.0};
  Objective f = [&](bool grad) {
    Tape tape;
    auto s = tape.dot(tape.param(x), tape.constant(c));
    if (grad) tape.backward(s);
    return tape.scalar(s);
  };
  auto params = store.all();
  EXPECT_LT(finite_diff_check(f, params).max_rel_error, 1e-10);
}

TEST(FiniteDiff, TanhChainDepthFour) {
  Rng rng(5);
  ParamStore store;
  Param& x = store.add("x", 1, 3);
  std::vector<Param*> layers;
  for (int k = 0; k < 4; ++k) layers.push_back(&store.add("w" + std::to_string(k), 3, 3));
  for (auto* p : store.all()) randomize(*p, rng);
  Objective f = [&](bool grad) {
    Tape tape;
    Var h = tape.param(x);
    for (auto* w : layers) h = tape.tanh(tape.matvec(*w, h));
    Var s = tape.sum(h);
    if (grad) tape.backward(s);
    return tape.scalar(s);
  };
  auto params = store.all();
  EXPECT_LT(finite_diff_check(f, params).max_rel_error, 1e-4);
}

TEST(FiniteDiff, DetectsGradientOffByFactorTwo) {
  ParamStore store;
  Param& x = store.add("x", 1, 1);
  x.values()[0] = 3.0;
  // f = x^2 has derivative 6 at x = 3; report half of it.
  Objective f = [&](bool grad) {
    const double v = x.values()[0];
    if (grad) x.grads()[0] = v;
    return v * v;
  };
  auto params = store.all();
  EXPECT_NEAR(finite_diff_check(f, params).max_rel_error, 1.0, 1e-6);
}

TEST(Adam, ZeroGradientLeavesParametersUnchanged) {
  ParamStore store;
  Param& p = store.add("p", 2, 2);
  p.fill(0.3);
  auto state = AdamState::for_store(store);
  adam_step(store, state, 1e-3);
  for (double v : p.values()) EXPECT_EQ(v, 0.3);
}

TEST(Adam, FirstStepWithUnitGradientMovesByEta) {
  ParamStore store;
  Param& p = store.add("p", 1, 1);
  p.values()[0] = 1.0;
  p.grads()[0] = 1.0;
  auto state = AdamState::for_store(store);
  adam_step(store, state, 1e-3);
  // m_hat = 1, v_hat = 1: step = eta / (1 + eps)
  EXPECT_NEAR(p.values()[0], 1.0 - 1e-3 / (1.0 + 1e-8), 1e-15);
}

TEST(Adam, NonFiniteGradientNamesTheParameter) {
  ParamStore store;
  store.add("fine", 1, 1);
  Param& bad = store.add("broken", 1, 2);
  bad.grads()[1] = std::nan("");
  auto state = AdamState::for_store(store);
  try {
    adam_step(store, state, 1e-3);
    FAIL() << "expected LogicError";
  } catch (const LogicError& e) {
    EXPECT_NE(std::string(e.what()).find("broken"), std::string::npos);
  }
}

TEST(Adam, IsDeterministic) {
  auto run = [] {
    Rng rng(42);
    ParamStore store;
    Param& p = store.add("p", 3, 3);
    glorot_fill(p, rng);
    auto state = AdamState::for_store(store);
    for (int step = 0; step < 20; ++step) {
      for (std::size_t k = 0; k < p.size(); ++k) p.grads()[k] = std::sin(step + k + p.values()[k]);
      adam_step(store, state, 1e-2);
      p.zero_grad();
    }
    return std::vector<double>(p.values().begin(), p.values().end());
  };
  EXPECT_EQ(run(), run());
}

TEST(Clip, SmallNormUnchanged) {
  std::vector<double> g = {0.3, 0.4};
  std::span<double> spans[] = {g};
  EXPECT_NEAR(clip_global_norm(spans, 1.0), 0.5, 1e-15);
  EXPECT_EQ(g, (std::vector<double>{0.3, 0.4}));
}

TEST(Clip, ThreeFourBecomesUnitNorm) {
  std::vector<double> g = {3.0, 4.0};
  std::span<double> spans[] = {g};
  EXPECT_DOUBLE_EQ(clip_global_norm(spans, 1.0), 5.0);
  EXPECT_NEAR(g[0], 0.6, 1e-15);
  EXPECT_NEAR(g[1], 0.8, 1e-15);
}

TEST(Clip, PostConditionAcrossParameters) {
  Rng rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    ParamStore store;
    for (int k = 0; k < 4; ++k) {
      Param& p = store.add("p" + std::to_string(k), 1 + trial % 5, 3);
      std::uniform_real_distribution<double> dist(-100, 100);
      for (double& g : p.grads()) g = dist(rng);
    }
    clip_global_norm(store, 1.0);
    EXPECT_LE(global_grad_norm(store), 1.0 + 1e-12);
  }
}

TEST(Checkpoint, RoundTripsExactly) {
  Rng rng(3);
  ParamStore a;
  glorot_fill(a.add("dense", 3, 4), rng);
  Param& sparse = a.add("sparse", 1, 4096);
  sparse.values()[17] = -0.125;
  sparse.values()[4000] = 1.0 / 3.0;
  std::stringstream buf;
  save_params(buf, a);
  EXPECT_NE(buf.str().find("sparse 2"), std::string::npos);

  ParamStore b;
  b.add("dense", 3, 4);
  b.add("sparse", 1, 4096);
  load_params(buf, b);
  for (std::size_t k = 0; k < a.size(); ++k) {
    auto x = a.all()[k]->values();
    auto y = b.all()[k]->values();
    EXPECT_TRUE(std::equal(x.begin(), x.end(), y.begin()));
  }
}

TEST(Checkpoint, ShapeMismatchIsAnError) {
  ParamStore a;
  a.add("w", 2, 2);
  std::stringstream buf;
  save_params(buf, a);
  ParamStore b;
  b.add("w", 2, 3);
  EXPECT_THROW(load_params(buf, b), DataError);
}

}  // namespace
}  // namespace mtsdp::ad
