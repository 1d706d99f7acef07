#include <gtest/gtest.h>

#include <sstream>

#include "mtsdp/sdp_io.hpp"

namespace mtsdp {
namespace {

std::vector<CorpusRecord> parse(const std::string& text) {
  std::istringstream in(text);
  return read_corpus(in);
}

std::string render(const std::vector<CorpusRecord>& records) {
  std::ostringstream out;
  write_corpus(out, records);
  return out.str();
}

const char* kTwoTokens =
    "#SDP 2015\n"
    "#20001001\n"
    "1\tPierre\tPierre\tNNP\t-\t+\t_\t_\n"
    "2\tVinken\tVinken\tNNP\t+\t-\t_\tARG1\n"
    "\n";

const char* kNoArcs =
    "#SDP 2015\n"
    "#s2\n"
    "1\tHello\thello\tUH\t-\t-\t_\n"
    "2\t.\t.\t.\t-\t-\t_\n"
    "\n";

const char* kRicher =
    "#SDP 2015\n"
    "#22000001\n"
    "1\tLast\tlast\tJJ\t-\t+\tq:i-h-h\t_\t_\t_\n"
    "2\tweek\tweek\tNN\t-\t-\t_\tBV\t_\t_\n"
    "3\tsaw\tsee\tVBD\t+\t+\tv:e-i-p\t_\t_\t_\n"
    "4\tit\tit\tPRP\t-\t-\t_\t_\tARG1\t_\n"
    "5\train\train\tNN\t-\t+\t_\t_\tARG2\t_\n"
    "\n"
    "#22000002\n"
    "1\tYes\tyes\tUH\t-\t-\t_\n"
    "\n";

TEST(ReadCorpus, TwoTokenFixture) {
  auto recs = parse(kTwoTokens);
  ASSERT_EQ(recs.size(), 1u);
  const auto& r = recs[0];
  EXPECT_EQ(r.sentence.id, "20001001");
  ASSERT_EQ(r.sentence.size(), 2);
  EXPECT_EQ(r.sentence.token(2).form, "Vinken");
  ASSERT_EQ(r.arcs.size(), 1u);
  EXPECT_EQ(r.arcs[0].head, 1);
  EXPECT_EQ(r.arcs[0].modifier, 2);
  EXPECT_EQ(r.arcs[0].label, "ARG1");
  EXPECT_EQ(r.tops, std::vector<int>{2});
}

TEST(ReadCorpus, NoPredicatesGivesEmptyGraph) {
  auto recs = parse(kNoArcs);
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_TRUE(recs[0].arcs.empty());
  EXPECT_TRUE(recs[0].predicates().empty());
}

TEST(ReadCorpus, PredicateWithoutArgumentsIsAlignedButDropped) {
  auto recs = parse(kRicher);
  ASSERT_EQ(recs.size(), 2u);
  const auto& r = recs[0];
  // Three '+' predicates (1, 3, 5) and three argument columns; 5 has none.
  EXPECT_EQ(r.pred_column, (std::vector<int>{1, 3, 5}));
  EXPECT_EQ(r.predicates(), (std::vector<int>{1, 3}));
  ASSERT_EQ(r.arcs.size(), 3u);
  EXPECT_EQ(r.arcs[0].head, 1);
  EXPECT_EQ(r.arcs[0].modifier, 2);
  EXPECT_EQ(r.arcs[1].head, 3);
  EXPECT_EQ(r.arcs[1].modifier, 4);
  EXPECT_EQ(r.arcs[2].label, "ARG2");
  EXPECT_EQ(r.frames[0], "q:i-h-h");
}

TEST(ReadCorpus, RoundTripIsByteIdentical) {
  for (const char* text : {kTwoTokens, kNoArcs, kRicher}) {
    EXPECT_EQ(render(parse(text)), text);
  }
}

TEST(ReadCorpus, RaggedRowReportsLine) {
  const char* text =
      "#1\n"
      "1\ta\ta\tX\t-\t+\t_\t_\n"
      "2\tb\tb\tX\t-\t-\t_\n"
      "\n";
  try {
    parse(text);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_EQ(e.line(), 3);
  }
}

TEST(ReadCorpus, ColumnCountMismatchWithPredicates) {
  const char* text =
      "#1\n"
      "1\ta\ta\tX\t-\t+\t_\n"
      "2\tb\tb\tX\t-\t-\t_\n"
      "\n";
  EXPECT_THROW(parse(text), DataError);
}

TEST(ReadCorpus, TooFewColumns) {
  EXPECT_THROW(parse("#1\n1\ta\ta\tX\t-\n\n"), DataError);
}

TEST(ReadCorpus, DuplicateTokenId) {
  const char* text =
      "#1\n"
      "1\ta\ta\tX\t-\t-\t_\n"
      "1\tb\tb\tX\t-\t-\t_\n"
      "\n";
  try {
    parse(text);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_EQ(e.line(), 3);
    EXPECT_NE(std::string(e.what()).find("duplicate"), std::string::npos);
  }
}

TEST(ReadCorpus, CyclicGoldIsRejected) {
  const char* text =
      "#1\n"
      "1\ta\ta\tX\t-\t+\t_\t_\tB\n"
      "2\tb\tb\tX\t-\t+\t_\tA\t_\n"
      "\n";
  EXPECT_TRUE(parse(text).empty());
  std::istringstream in(text);
  EXPECT_EQ(read_corpus(in, ReadOptions{.reject_cycles = false}).size(), 1u);
}

TEST(WriteCorpus, TabInLabelIsAnError) {
  auto recs = parse(kTwoTokens);
  recs[0].arcs[0].label = "A\tB";
  std::ostringstream out;
  EXPECT_THROW(write_corpus(out, recs), DataError);
}

TEST(ToGraph, InternsLabelsPerTask) {
  auto recs = parse(kRicher);
  LabelVocab vocab(1);
  auto g = to_graph(recs[0], 0, vocab, true);
  EXPECT_EQ(g.arcs.size(), 3u);
  EXPECT_EQ(g.predicates, (std::vector<int>{1, 3}));
  EXPECT_EQ(vocab.size(0), 3);
  auto back = to_record(recs[0].sentence, g, vocab, &recs[0]);
  EXPECT_EQ(back.arcs, recs[0].arcs);
}

TEST(Embeddings, LoadsAndLooksUp) {
  std::istringstream in("the 0.1 0.2 0.3\ncat 1 2 3\n");
  auto table = load_embeddings(in, 3);
  EXPECT_EQ(table.size(), 2u);
  EXPECT_DOUBLE_EQ(table.lookup("cat")[1], 2.0);
  auto unk = table.lookup("dog");
  ASSERT_EQ(unk.size(), 3u);
  for (double v : unk) EXPECT_EQ(v, 0.0);
}

TEST(Embeddings, MalformedFloatReportsLine) {
  std::istringstream in("the 0.1 0.2 0.3\ncat 1 x 3\n");
  try {
    load_embeddings(in, 3);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_EQ(e.line(), 2);
  }
}

TEST(Embeddings, DimensionMismatchReportsLine) {
  std::istringstream in("the 0.1 0.2\n");
  try {
    load_embeddings(in, 3);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_EQ(e.line(), 1);
  }
}

}  // namespace
}  // namespace mtsdp
