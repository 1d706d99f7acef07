#pragma once

#include <span>
#include <string>
#include <vector>

#include "mtsdp/graph.hpp"
#include "mtsdp/sdp_io.hpp"

namespace mtsdp::eval {

struct PrfCounts {
  long long matched = 0;
  long long predicted = 0;
  long long gold = 0;

  double precision() const { return predicted ? double(matched) / double(predicted) : 0.0; }
  double recall() const { return gold ? double(matched) / double(gold) : 0.0; }
  double f1() const;
  PrfCounts& operator+=(const PrfCounts& o);
};

// Arcs match on (head, modifier), and on the label when `labeled`.
PrfCounts prf(const SemanticGraph& pred, const SemanticGraph& gold, bool labeled);

// Pools counts across tasks.
PrfCounts micro_average(std::span<const PrfCounts> per_task);

// fp_cost per predicted labeled arc missing from gold plus fn_cost per gold
// labeled arc missing from the prediction, summed over tasks.
double hamming_cost(const Multigraph& pred, const Multigraph& gold, double fp_cost = 0.4,
                    double fn_cost = 0.6);

// Unlabeled F1 (in percent) of corpus A's arcs taken as predictions of corpus
// B's, pooled over sentences. Undirected mode compares unordered token pairs.
// Throws DataError when the corpora differ in sentences or tokens.
double structural_similarity(std::span<const CorpusRecord> a, std::span<const CorpusRecord> b,
                             bool directed);

struct TaskReport {
  std::string name;
  PrfCounts labeled;
  PrfCounts unlabeled;
};

struct Report {
  std::vector<TaskReport> tasks;
  PrfCounts micro_labeled;
  PrfCounts micro_unlabeled;

  // Per-task and micro P/R/F in percent with one decimal, plus raw counts.
  std::string to_json() const;
};

// Scores predicted corpora against gold corpora, one pair per task. Tops are
// scored as arcs from the virtual root when include_tops is set.
Report evaluate(std::span<const std::string> task_names,
                std::span<const std::vector<CorpusRecord>> gold,
                std::span<const std::vector<CorpusRecord>> pred, bool include_tops = false);

}  // namespace mtsdp::eval
