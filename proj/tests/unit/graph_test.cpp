#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "mtsdp/graph.hpp"

namespace mtsdp {
namespace {

LabelVocab vocab_with(std::initializer_list<const char*> labels, int tasks = 1) {
  LabelVocab v(tasks);
  for (int t = 0; t < tasks; ++t) {
    for (const char* l : labels) v.add(t, l);
  }
  return v;
}

TEST(PartsOf, EmptyGraphHasNoParts) {
  SemanticGraph g = SemanticGraph::from_arcs(0, 3, {});
  EXPECT_TRUE(parts_of(g).empty());
}

TEST(PartsOf, SingleArc) {
  SemanticGraph g = SemanticGraph::from_arcs(0, 2, {{1, 2, 0}});
  std::vector<Part> expected = {Part::predicate(0, 1), Part::unlabeled_arc(0, 1, 2),
                                Part::labeled_arc(0, 1, 2, 0)};
  std::sort(expected.begin(), expected.end());
  EXPECT_EQ(parts_of(g), expected);
}

TEST(PartsOf, TwoArcsShareOnePredicate) {
  SemanticGraph g = SemanticGraph::from_arcs(0, 3, {{1, 2, 0}, {1, 3, 1}});
  auto parts = parts_of(g);
  EXPECT_EQ(parts.size(), 5u);
  EXPECT_EQ(std::count_if(parts.begin(), parts.end(),
                          [](const Part& p) { return p.kind == PartKind::Predicate; }),
            1);
}

TEST(PartsOf, RoundTripsRandomGraphs) {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + rng() % 7;
    std::vector<LabeledArc> arcs;
    for (int i = 1; i <= n; ++i) {
      for (int j = 1; j <= n; ++j) {
        if (i != j && rng() % 4 == 0) arcs.push_back({i, j, static_cast<LabelId>(rng() % 3)});
      }
    }
    auto g = SemanticGraph::from_arcs(0, n, arcs);
    auto parts = parts_of(g);
    EXPECT_EQ(graph_from_parts(parts, 0, n), g);
    // Pred(i) present iff some UA(i, .) present.
    for (int i = 1; i <= n; ++i) {
      bool pred = std::binary_search(parts.begin(), parts.end(), Part::predicate(0, i));
      bool ua = std::any_of(parts.begin(), parts.end(), [i](const Part& p) {
        return p.kind == PartKind::UnlabeledArc && p.head == i;
      });
      EXPECT_EQ(pred, ua);
    }
  }
}

TEST(Validate, EmptyGraphIsClean) {
  auto vocab = vocab_with({"A"});
  EXPECT_TRUE(validate(SemanticGraph::from_arcs(0, 3, {}), vocab).empty());
}

TEST(Validate, PredicateWithoutArc) {
  auto vocab = vocab_with({"A"});
  SemanticGraph g;
  g.num_tokens = 3;
  g.predicates = {1};
  auto v = validate(g, vocab);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].kind, Violation::Kind::PredicateWithoutArc);
  EXPECT_EQ(v[0].head, 1);
}

TEST(Validate, DeterminismViolation) {
  auto vocab = vocab_with({"D"});
  vocab.set_deterministic(0, 0, true);
  auto g = SemanticGraph::from_arcs(0, 3, {{1, 2, 0}, {1, 3, 0}});
  auto v = validate(g, vocab);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].kind, Violation::Kind::Determinism);
  EXPECT_EQ(v[0].head, 1);
}

TEST(Validate, UnknownLabelIsReportedNotThrown) {
  auto vocab = vocab_with({"A"});
  auto g = SemanticGraph::from_arcs(0, 3, {{1, 2, 7}});
  auto v = validate(g, vocab);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].kind, Violation::Kind::UnknownLabel);
}

TEST(Validate, DuplicateArcAndSelfLoop) {
  auto vocab = vocab_with({"A", "B"});
  SemanticGraph g;
  g.num_tokens = 3;
  g.arcs = {{1, 2, 0}, {1, 2, 1}, {3, 3, 0}};
  g.predicates = {1, 3};
  auto v = validate(g, vocab);
  auto has = [&](Violation::Kind k) {
    return std::any_of(v.begin(), v.end(), [k](const Violation& x) { return x.kind == k; });
  };
  EXPECT_TRUE(has(Violation::Kind::DuplicateArc));
  EXPECT_TRUE(has(Violation::Kind::SelfLoop));
}

TEST(Determinism, StrictestConsistentSet) {
  LabelVocab vocab(1);
  const LabelId a = vocab.add(0, "A");
  const LabelId b = vocab.add(0, "B");
  const LabelId c = vocab.add(0, "C");
  std::vector<SemanticGraph> graphs = {
      SemanticGraph::from_arcs(0, 4, {{1, 2, a}, {1, 3, a}, {1, 4, b}}),
      SemanticGraph::from_arcs(0, 4, {{2, 1, b}, {3, 1, b}}),
  };
  compute_determinism(vocab, 0, graphs);
  EXPECT_FALSE(vocab.is_deterministic(0, a));  // twice under head 1
  EXPECT_TRUE(vocab.is_deterministic(0, b));   // never twice under one head
  EXPECT_TRUE(vocab.is_deterministic(0, c));   // unseen
}

TEST(Multigraph, SingleTaskProjectionIsIdentity) {
  auto g = SemanticGraph::from_arcs(0, 3, {{1, 2, 0}});
  auto m = multigraph_union({g});
  ASSERT_EQ(m.num_tasks(), 1);
  EXPECT_EQ(m.task(0), g);
}

TEST(Multigraph, ThreeEmptyComponents) {
  auto m = multigraph_union({SemanticGraph::from_arcs(0, 4, {}), SemanticGraph::from_arcs(1, 4, {}),
                             SemanticGraph::from_arcs(2, 4, {})});
  EXPECT_EQ(m.num_tasks(), 3);
  for (const auto& g : m.graphs) EXPECT_TRUE(g.empty());
}

TEST(Multigraph, ThreeFormalismsPreserveArcCounts) {
  // "Last week, ..." style fixture: the same tokens annotated three ways.
  auto dm = SemanticGraph::from_arcs(0, 5, {{1, 2, 0}, {3, 2, 1}, {3, 5, 2}});
  auto pas = SemanticGraph::from_arcs(1, 5, {{1, 2, 0}, {3, 2, 1}, {3, 5, 1}, {4, 5, 0}});
  auto psd = SemanticGraph::from_arcs(2, 5, {{2, 1, 0}, {3, 5, 1}});
  auto m = multigraph_union({dm, pas, psd});
  ASSERT_EQ(m.num_tasks(), 3);
  EXPECT_EQ(m.task(0).arcs.size(), 3u);
  EXPECT_EQ(m.task(1).arcs.size(), 4u);
  EXPECT_EQ(m.task(2).arcs.size(), 2u);
  EXPECT_EQ(m.task(1), pas);
}

TEST(Multigraph, MismatchedLengthsThrow) {
  EXPECT_THROW(multigraph_union({SemanticGraph::from_arcs(0, 3, {}), SemanticGraph::from_arcs(1, 4, {})}),
               DataError);
}

TEST(CrossParts, ArcsSharedByAllTasksOfATaskSet) {
  auto a = SemanticGraph::from_arcs(0, 3, {{1, 2, 0}, {2, 3, 0}});
  auto b = SemanticGraph::from_arcs(1, 3, {{1, 2, 1}});
  auto m = multigraph_union({a, b});
  auto parts = parts_of(m, true);
  const TaskId ts[] = {0, 1};
  const LabelId ls[] = {0, 1};
  EXPECT_TRUE(std::binary_search(parts.begin(), parts.end(), Part::cross_unlabeled(ts, 1, 2)));
  EXPECT_TRUE(std::binary_search(parts.begin(), parts.end(), Part::cross_labeled(ts, 1, 2, ls)));
  EXPECT_EQ(std::count_if(parts.begin(), parts.end(), [](const Part& p) { return p.is_cross_task(); }), 2);
}

TEST(CrossParts, TaskSets) {
  EXPECT_TRUE(cross_task_sets(1).empty());
  EXPECT_EQ(cross_task_sets(2).size(), 1u);
  EXPECT_EQ(cross_task_sets(3).size(), 4u);  // three pairs and one triple
}

TEST(Cycles, Detection) {
  EXPECT_FALSE(has_cycle(SemanticGraph::from_arcs(0, 3, {{1, 2, 0}, {1, 3, 0}, {2, 3, 0}})));
  EXPECT_TRUE(has_cycle(SemanticGraph::from_arcs(0, 3, {{1, 2, 0}, {2, 3, 0}, {3, 1, 0}})));
}

}  // namespace
}  // namespace mtsdp
