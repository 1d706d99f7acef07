#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "mtsdp/graph.hpp"

namespace mtsdp {

// One sentence of an SDP 2015 file. Arc labels are kept as strings here;
// they are interned into a LabelVocab when a corpus is bound to a task.
struct CorpusRecord {
  struct Arc {
    int head = 0;
    int modifier = 0;
    std::string label;
    auto operator<=>(const Arc&) const = default;
  };

  Sentence sentence;
  std::vector<Arc> arcs;           // sorted by (head, modifier)
  std::vector<int> tops;           // tokens marked '+' in the TOP column
  std::vector<int> pred_column;    // tokens marked '+' in the PRED column, in order
  std::vector<std::string> frames; // FRAME column verbatim, one per token

  // Predicates with at least one realized argument.
  std::vector<int> predicates() const;
};

struct ReadOptions {
  // Drop sentences whose gold graph has a cycle (logged as a warning).
  bool reject_cycles = true;
};

std::vector<CorpusRecord> read_corpus(std::istream& in, const ReadOptions& options = {});
std::vector<CorpusRecord> read_corpus_file(const std::string& path,
                                           const ReadOptions& options = {});

void write_corpus(std::ostream& out, std::span<const CorpusRecord> records);
void write_corpus_file(const std::string& path, std::span<const CorpusRecord> records);

// Converts a record into a graph for one task, interning labels (adding new
// ones when `grow` is set, otherwise unknown labels are dropped).
SemanticGraph to_graph(const CorpusRecord& record, TaskId task, LabelVocab& vocab, bool grow);

// Rebuilds a record from a sentence and a predicted graph. Tops and frames
// are copied from `like` when given.
CorpusRecord to_record(const Sentence& sentence, const SemanticGraph& graph,
                       const LabelVocab& vocab, const CorpusRecord* like = nullptr);

// Pretrained vectors in "word v1 ... vd" text form.
class EmbeddingTable {
 public:
  explicit EmbeddingTable(int dimension = 0) : dimension_(dimension), unk_(dimension, 0.0) {}

  int dimension() const { return dimension_; }
  std::size_t size() const { return index_.size(); }
  bool contains(const std::string& word) const { return index_.count(word) > 0; }
  // Unknown words map to the unk vector (all zeros).
  std::span<const double> lookup(const std::string& word) const;
  void add(const std::string& word, std::span<const double> vector);

 private:
  int dimension_;
  std::vector<double> unk_;
  std::vector<double> data_;
  std::unordered_map<std::string, std::size_t> index_;
};

EmbeddingTable load_embeddings(std::istream& in, int expected_dim);
EmbeddingTable load_embeddings_file(const std::string& path, int expected_dim);

// Parallel corpora, one file per task, checked for identical tokenization.
struct MultitaskCorpus {
  std::vector<std::string> task_names;
  std::vector<std::vector<CorpusRecord>> tasks;

  int num_tasks() const { return static_cast<int>(tasks.size()); }
  std::size_t num_sentences() const { return tasks.empty() ? 0 : tasks[0].size(); }
  const Sentence& sentence(std::size_t k) const { return tasks.at(0).at(k).sentence; }
};

MultitaskCorpus read_parallel_corpora(std::span<const std::string> paths,
                                      const ReadOptions& options = {});
void check_parallel(const MultitaskCorpus& corpus);

}  // namespace mtsdp
