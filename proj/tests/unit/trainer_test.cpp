#include <gtest/gtest.h>

#include <json.hpp>

#include <algorithm>
#include <sstream>

#include "mtsdp/error.hpp"
#include "mtsdp/parser.hpp"
#include "model_fixtures.hpp"

namespace mtsdp::train {
namespace {

using testing::randomize;
using testing::small_model;
using testing::synth_corpus;

Sentence three_tokens() {
  Sentence s;
  s.id = "3";
  s.tokens = {{1, "v1", "v1", "V"}, {2, "n2", "n2", "N"}, {3, "a3", "a3", "A"}};
  return s;
}

TEST(Schedule, HalvesEveryTenEpochs) {
  const RunConfig c;
  for (int e = 0; e < 10; ++e) EXPECT_DOUBLE_EQ(learning_rate(c, e), 1e-3);
  EXPECT_DOUBLE_EQ(learning_rate(c, 10), 5e-4);
  EXPECT_DOUBLE_EQ(learning_rate(c, 19), 5e-4);
  EXPECT_DOUBLE_EQ(learning_rate(c, 20), 2.5e-4);
  EXPECT_DOUBLE_EQ(learning_rate(c, 29), 2.5e-4);
}

TEST(Hinge, WideMarginGivesZeroLossAndGradient) {
  const auto corpus = synth_corpus(2);
  auto m = small_model(Variant::Freda3, corpus);
  for (auto* p : m.params.all()) {
    const auto& n = p->name();
    if (n.find(".mlp.") != std::string::npos && n.ends_with(".b")) {
      p->fill(1.0);
    } else if (n.find(".psi.") != std::string::npos) {
      p->fill(-5.0);
    } else if (n.find(".mlp.") != std::string::npos) {
      p->fill(0.0);
    }
  }
  const auto s = three_tokens();
  const auto gold = decode::empty_multigraph(2, s.size());
  for (auto method : {decode::Method::Exact, decode::Method::Ad3}) {
    m.params.zero_grad();
    const auto h = hinge_loss(m, s, gold, method, false, nullptr, true);
    EXPECT_EQ(h.loss, 0.0);
    EXPECT_EQ(h.prediction, h.gold);
    for (const auto* p : m.params.all()) {
      for (double g : p->grads()) ASSERT_EQ(g, 0.0) << p->name();
    }
  }
}

// Enumerates every labeled graph over n tokens that passes validate().
template <class F>
void for_each_graph(int n, int num_labels, const LabelVocab& vocab, F&& visit) {
  std::vector<std::pair<int, int>> arcs;
  for (int i = 1; i <= n; ++i) {
    for (int j = 1; j <= n; ++j) {
      if (i != j) arcs.emplace_back(i, j);
    }
  }
  std::vector<int> state(arcs.size(), -1);
  while (true) {
    std::vector<LabeledArc> la;
    for (std::size_t k = 0; k < arcs.size(); ++k) {
      if (state[k] >= 0) la.push_back({arcs[k].first, arcs[k].second, state[k]});
    }
    const auto g = SemanticGraph::from_arcs(0, n, la);
    if (validate(g, vocab).empty()) visit(g);
    std::size_t k = 0;
    while (k < state.size() && ++state[k] == num_labels) state[k++] = -1;
    if (k == state.size()) break;
  }
}

TEST(Hinge, ZeroModelLossEqualsEnumeratedOracle) {
  const auto corpus = synth_corpus(1);
  auto m = small_model(Variant::Basic, corpus);
  for (auto* p : m.params.all()) p->fill(0.0);
  const auto s = three_tokens();
  const int nl = m.labels.size(0);
  ASSERT_EQ(static_cast<int>(m.candidate_labels[0].size()), nl);
  const std::vector<std::vector<LabeledArc>> golds = {
      {{1, 2, 0}}, {{1, 2, 0}, {1, 3, 1}, {3, 2, 0}}, {{2, 1, 1}, {2, 3, 1}}};
  for (const auto& arcs : golds) {
    Multigraph gold;
    gold.num_tokens = 3;
    gold.graphs.push_back(SemanticGraph::from_arcs(0, 3, arcs));
    if (!validate(gold, m.labels).empty()) continue;
    double oracle = 0.0;
    for_each_graph(3, nl, m.labels, [&](const SemanticGraph& g) {
      Multigraph y;
      y.num_tokens = 3;
      y.graphs.push_back(g);
      oracle = std::max(oracle, eval::hamming_cost(y, gold, m.config.fp_cost, m.config.fn_cost));
    });
    const auto h = hinge_loss(m, s, gold, decode::Method::Exact, false, nullptr, false);
    EXPECT_NEAR(h.loss, oracle, 1e-12);
    EXPECT_GT(h.loss, 0.6 * double(arcs.size()) - 1e-12);
  }
}

TEST(Hinge, NonNegativeWithExactDecoding) {
  const auto corpus = synth_corpus(2, 12, 4, 5);
  auto m = small_model(Variant::Freda3, corpus, 6, 3);
  const auto data = make_dataset(corpus, m);
  for (int trial = 0; trial < 3; ++trial) {
    randomize(m, 100 + trial, 0.8);
    for (std::size_t k = 0; k < data.sentences.size(); ++k) {
      const auto h = hinge_loss(m, data.sentences[k], data.gold[k], decode::Method::Exact, false,
                                nullptr, false);
      ASSERT_GE(h.loss, 0.0);
      EXPECT_NEAR(h.cost, eval::hamming_cost(h.prediction, h.gold), 1e-12);
    }
  }
}

TEST(Hinge, InfeasibleGoldThrows) {
  const auto corpus = synth_corpus(1);
  auto m = small_model(Variant::Basic, corpus);
  m.labels.set_deterministic(0, 0, true);
  Multigraph gold;
  gold.num_tokens = 3;
  gold.graphs.push_back(SemanticGraph::from_arcs(0, 3, {{1, 2, 0}, {1, 3, 0}}));
  EXPECT_THROW(hinge_loss(m, three_tokens(), gold, decode::Method::Ad3, false, nullptr, false),
               DataError);
}

TEST(Hinge, AllEmbeddingChannelsReceiveGradients) {
  const auto corpus = synth_corpus(1);
  auto c = testing::scaled_config(Variant::Basic);
  c.pretrained_dim = 4;
  auto m = prepare_model(corpus, c);
  randomize(m, 8);
  const auto data = make_dataset(corpus, m);
  m.params.zero_grad();
  const auto h = hinge_loss(m, data.sentences[0], data.gold[0], decode::Method::Exact, false,
                            nullptr, true);
  ASSERT_GT(h.loss, 0.0);
  for (const char* channel : {"pre", "word", "pos"}) {
    const auto& g = m.params.at(std::string("enc.task0.emb.") + channel).grads();
    EXPECT_TRUE(std::any_of(g.begin(), g.end(), [](double v) { return v != 0.0; })) << channel;
  }
}

TEST(Train, FixedSeedIsDeterministic) {
  const auto corpus = synth_corpus(2, 6, 5, 4);
  auto run = [&] {
    auto c = testing::scaled_config(Variant::Freda3, 6, 3);
    c.epochs = 2;
    c.eta0 = 0.01;
    auto m = prepare_model(corpus, c);
    std::ostringstream log;
    TrainOptions o;
    o.dev = &corpus;
    o.log = &log;
    train(m, corpus, o);
    std::vector<double> all;
    for (const auto* p : m.params.all()) all.insert(all.end(), p->values().begin(), p->values().end());
    return std::pair{all, log.str()};
  };
  const auto a = run(), b = run();
  EXPECT_EQ(a.first, b.first);
  EXPECT_EQ(a.second, b.second);
}

TEST(Train, LogsOneJsonLinePerEpochAndKeepsBest) {
  const auto corpus = synth_corpus(2, 8, 5, 6);
  auto c = testing::scaled_config(Variant::Shared1, 8);
  c.epochs = 4;
  c.eta0 = 0.01;
  auto m = prepare_model(corpus, c);
  std::ostringstream log;
  TrainOptions o;
  o.dev = &corpus;
  o.log = &log;
  const auto summary = train(m, corpus, o);
  EXPECT_EQ(summary.epochs_run, 4);
  std::istringstream lines(log.str());
  std::string line;
  int n = 0;
  double best = -1;
  while (std::getline(lines, line)) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_EQ(j["epoch"], n);
    EXPECT_TRUE(j.contains("eta") && j.contains("train_loss") && j.contains("micro_LF"));
    EXPECT_TRUE(j["dev"].contains("dm") && j["dev"]["dm"].contains("UF"));
    best = std::max(best, j["micro_LF"].get<double>());
    ++n;
  }
  EXPECT_EQ(n, 4);
  EXPECT_NEAR(100 * summary.best_dev_lf, best, 1e-9);
  // The restored parameters are the best epoch's.
  EXPECT_NEAR(100 * evaluate_model(m, corpus).micro_labeled.f1(), best, 1e-9);
}

TEST(Train, PatienceStopsEarly) {
  const auto corpus = synth_corpus(1, 4, 4, 6);
  auto c = testing::scaled_config(Variant::Basic, 4);
  c.epochs = 30;
  c.eta0 = 1e-300;  // updates vanish in rounding, so dev never improves
  c.patience = 2;
  auto m = prepare_model(corpus, c);
  TrainOptions o;
  o.dev = &corpus;
  EXPECT_EQ(train(m, corpus, o).epochs_run, 3);
}

TEST(Train, EmptyCorpusThrows) {
  MultitaskCorpus empty;
  empty.task_names = {"dm"};
  empty.tasks.resize(1);
  EXPECT_THROW(prepare_model(empty, testing::scaled_config(Variant::Basic)), ConfigError);
}

TEST(Parse, ThreadsDoNotChangeOutput) {
  const auto corpus = synth_corpus(2, 10, 6, 12);
  auto m = small_model(Variant::Freda1, corpus);
  randomize(m, 3);
  const auto one = parse_corpus(m, corpus.tasks[0], 1);
  const auto four = parse_corpus(m, corpus.tasks[0], 4);
  ASSERT_EQ(one.size(), 2u);
  for (std::size_t t = 0; t < one.size(); ++t) {
    for (std::size_t k = 0; k < one[t].size(); ++k) EXPECT_EQ(one[t][k].arcs, four[t][k].arcs);
  }
}

}  // namespace
}  // namespace mtsdp::train
