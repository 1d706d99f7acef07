#include <gtest/gtest.h>

#include <json.hpp>

#include "mtsdp/error.hpp"
#include "mtsdp/eval/eval.hpp"
#include "model_fixtures.hpp"

namespace mtsdp::eval {
namespace {

SemanticGraph graph(std::vector<LabeledArc> arcs, int n = 4) {
  return SemanticGraph::from_arcs(0, n, std::move(arcs));
}

const LabeledArc a{1, 2, 0}, b{2, 3, 0}, c{3, 4, 1};

TEST(Prf, IdenticalGraphs) {
  const auto r = prf(graph({a, b}), graph({a, b}), true);
  EXPECT_EQ(r.precision(), 1.0);
  EXPECT_EQ(r.recall(), 1.0);
  EXPECT_EQ(r.f1(), 1.0);
}

TEST(Prf, EmptyPrediction) {
  const auto r = prf(graph({}), graph({a}), true);
  EXPECT_EQ(r.f1(), 0.0);
  EXPECT_EQ(r.precision(), 0.0);
}

TEST(Prf, HalfOverlap) {
  const auto r = prf(graph({a, b}), graph({b, c}), true);
  EXPECT_EQ(r.matched, 1);
  EXPECT_DOUBLE_EQ(r.precision(), 0.5);
  EXPECT_DOUBLE_EQ(r.recall(), 0.5);
  EXPECT_DOUBLE_EQ(r.f1(), 0.5);
}

TEST(Prf, LabelsOnlyMatterWhenLabeled) {
  const LabeledArc relabeled{1, 2, 1};
  EXPECT_EQ(prf(graph({relabeled}), graph({a}), true).matched, 0);
  EXPECT_EQ(prf(graph({relabeled}), graph({a}), false).matched, 1);
}

TEST(Prf, F1SymmetricUnderSwap) {
  const auto x = graph({a, b, c}), y = graph({b});
  EXPECT_DOUBLE_EQ(prf(x, y, true).f1(), prf(y, x, true).f1());
  EXPECT_DOUBLE_EQ(prf(x, y, true).precision(), prf(y, x, true).recall());
}

TEST(MicroAverage, PoolsCounts) {
  const PrfCounts t[2] = {{1, 1, 2}, {1, 2, 1}};
  const auto m = micro_average(t);
  EXPECT_DOUBLE_EQ(m.precision(), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.recall(), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.f1(), 2.0 / 3.0);
}

TEST(MicroAverage, IdenticalTasksAndEmptyTask) {
  const PrfCounts same[3] = {{3, 4, 5}, {3, 4, 5}, {3, 4, 5}};
  EXPECT_DOUBLE_EQ(micro_average(same).f1(), same[0].f1());
  const PrfCounts with_empty[2] = {{3, 4, 5}, {0, 0, 0}};
  EXPECT_DOUBLE_EQ(micro_average(with_empty).f1(), with_empty[0].f1());
}

Multigraph multi(std::vector<SemanticGraph> gs) {
  Multigraph m;
  m.num_tokens = 4;
  for (std::size_t t = 0; t < gs.size(); ++t) {
    gs[t].task = static_cast<TaskId>(t);
    m.graphs.push_back(std::move(gs[t]));
  }
  return m;
}

TEST(HammingCost, Examples) {
  EXPECT_EQ(hamming_cost(multi({graph({a, b})}), multi({graph({a, b})})), 0.0);
  EXPECT_DOUBLE_EQ(hamming_cost(multi({graph({a, b})}), multi({graph({a})})), 0.4);
  EXPECT_DOUBLE_EQ(hamming_cost(multi({graph({a, c})}), multi({graph({a, b})})), 1.0);
  // A relabeled arc is one false positive and one false negative.
  EXPECT_DOUBLE_EQ(hamming_cost(multi({graph({{1, 2, 1}})}), multi({graph({a})})), 1.0);
}

TEST(HammingCost, AdditiveOverTasks) {
  const auto p = multi({graph({a, c}), graph({b})});
  const auto g = multi({graph({a, b}), graph({})});
  EXPECT_DOUBLE_EQ(hamming_cost(p, g), hamming_cost(multi({graph({a, c})}), multi({graph({a, b})})) +
                                           hamming_cost(multi({graph({b})}), multi({graph({})})));
}

CorpusRecord record(std::vector<CorpusRecord::Arc> arcs, int n = 3) {
  CorpusRecord r;
  r.sentence.id = "1";
  for (int i = 1; i <= n; ++i) r.sentence.tokens.push_back({i, "w" + std::to_string(i), "w", "N"});
  r.arcs = std::move(arcs);
  r.pred_column = r.predicates();
  r.frames.assign(n, "_");
  return r;
}

TEST(StructuralSimilarity, Examples) {
  const std::vector<CorpusRecord> fwd{record({{1, 2, "X"}})}, back{record({{2, 1, "Y"}})},
      other{record({{3, 1, "X"}})};
  EXPECT_DOUBLE_EQ(structural_similarity(fwd, fwd, true), 100.0);
  EXPECT_DOUBLE_EQ(structural_similarity(fwd, other, true), 0.0);
  EXPECT_DOUBLE_EQ(structural_similarity(fwd, back, true), 0.0);
  EXPECT_DOUBLE_EQ(structural_similarity(fwd, back, false), 100.0);
}

TEST(StructuralSimilarity, TokenMismatchThrows) {
  const std::vector<CorpusRecord> x{record({{1, 2, "X"}})}, y{record({{1, 2, "X"}}, 4)};
  EXPECT_THROW(structural_similarity(x, y, true), DataError);
  auto z = x;
  z[0].sentence.tokens[1].form = "other";
  EXPECT_THROW(structural_similarity(x, z, true), DataError);
}

TEST(StructuralSimilarity, UndirectedAtLeastDirected) {
  const auto corpus = testing::synth_corpus(3, 20, 8, 17);
  for (int x = 0; x < 3; ++x) {
    for (int y = 0; y < 3; ++y) {
      EXPECT_GE(structural_similarity(corpus.tasks[x], corpus.tasks[y], false),
                structural_similarity(corpus.tasks[x], corpus.tasks[y], true));
      EXPECT_DOUBLE_EQ(structural_similarity(corpus.tasks[x], corpus.tasks[y], true),
                       structural_similarity(corpus.tasks[y], corpus.tasks[x], true));
    }
  }
}

TEST(Report, JsonHasOneDecimalPercentages) {
  const std::string names[2] = {"dm", "psd"};
  const std::vector<std::vector<CorpusRecord>> gold{{record({{1, 2, "X"}, {2, 3, "Y"}})},
                                                    {record({{1, 3, "Z"}})}};
  const std::vector<std::vector<CorpusRecord>> pred{{record({{1, 2, "X"}, {2, 3, "X"}})},
                                                    {record({{1, 3, "Z"}})}};
  const auto report = evaluate(names, gold, pred);
  ASSERT_EQ(report.tasks.size(), 2u);
  EXPECT_EQ(report.tasks[0].labeled.matched, 1);
  EXPECT_EQ(report.tasks[0].unlabeled.matched, 2);
  EXPECT_EQ(report.micro_labeled.matched, 2);
  const auto j = nlohmann::json::parse(report.to_json());
  EXPECT_DOUBLE_EQ(j["micro_LF"].get<double>(), 66.7);
  EXPECT_DOUBLE_EQ(j["micro_UF"].get<double>(), 100.0);
  EXPECT_EQ(j["tasks"][0]["task"], "dm");
  EXPECT_DOUBLE_EQ(j["tasks"][0]["labeled"]["F"].get<double>(), 50.0);
  EXPECT_EQ(j["micro"]["labeled"]["gold"], 3);
}

TEST(Report, TopsOnlyCountWhenRequested) {
  const std::string names[1] = {"dm"};
  auto g = record({{1, 2, "X"}});
  g.tops = {1};
  auto p = record({{1, 2, "X"}});
  p.tops = {2};
  const std::vector<std::vector<CorpusRecord>> gold{{g}}, pred{{p}};
  EXPECT_EQ(evaluate(names, gold, pred).micro_labeled.f1(), 1.0);
  EXPECT_DOUBLE_EQ(evaluate(names, gold, pred, true).micro_labeled.f1(), 0.5);
}

}  // namespace
}  // namespace mtsdp::eval
