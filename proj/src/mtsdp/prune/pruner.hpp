#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "mtsdp/ad/param.hpp"
#include "mtsdp/decode/decoder.hpp"
#include "mtsdp/graph.hpp"

namespace mtsdp::prune {

inline constexpr int kNumTemplates = 7;

// Hashed feature indices of arc i -> j, one per template: head form, modifier
// form, head POS, modifier POS, POS pair, signed distance bucket, bias.
std::array<std::uint32_t, kNumTemplates> featurize_arc(const Sentence& sentence, int i, int j,
                                                       int hash_bits);

// Signed distance bucket of j - i: +-1, +-2, +-3, +-(4-7), +-(8+).
int distance_bucket(int i, int j);

std::uint64_t fnv1a(std::span<const char> bytes, std::uint64_t h = 14695981039346656037ULL);

struct PruneStats {
  long long candidate_arcs = 0;
  long long kept_arcs = 0;
  long long gold_arcs = 0;
  long long gold_kept = 0;

  double kept_fraction() const { return candidate_arcs ? double(kept_arcs) / candidate_arcs : 0.0; }
  double recall() const { return gold_arcs ? double(gold_kept) / gold_arcs : 1.0; }
  PruneStats& operator+=(const PruneStats& o);
};

// Per-task log-linear unlabeled arc model over hashed features.
class PrunerModel {
 public:
  PrunerModel() = default;
  PrunerModel(int num_tasks, int hash_bits);

  int num_tasks() const { return static_cast<int>(store_.size()); }
  int hash_bits() const { return hash_bits_; }
  bool empty() const { return store_.size() == 0; }

  double arc_score(TaskId t, const Sentence& sentence, int i, int j) const;
  double arc_posterior(TaskId t, const Sentence& sentence, int i, int j) const;

  // One 1 x 2^bits row per task, named pruner.t<task>.
  ad::Param& weights(TaskId t) { return *rows_.at(t); }
  const ad::Param& weights(TaskId t) const { return *rows_.at(t); }

  // Mask of arcs with posterior >= threshold, for every task.
  decode::ArcMask prune(const Sentence& sentence, double threshold) const;

  // "pruner <tasks> <bits>" followed by the weights in parameter form.
  void save(std::ostream& out) const;
  static PrunerModel load(std::istream& in);

 private:
  int hash_bits_ = 0;
  ad::ParamStore store_;
  std::vector<ad::Param*> rows_;  // owned by store_
};

struct PrunerTrainOptions {
  int epochs = 20;
  double eta = 0.1;
  std::uint64_t seed = 1;
};

// Per-arc logistic loss (positives are gold unlabeled arcs), one sparse Adam
// step per sentence. `gold[k]` is the gold graph of `sentences[k]`. Returns the
// mean log-loss per arc of the last epoch. Throws ConfigError on an empty
// corpus.
double train_pruner(PrunerModel& model, TaskId task, std::span<const Sentence> sentences,
                    std::span<const SemanticGraph> gold, const PrunerTrainOptions& options);

// Mean per-arc log-loss of one task over a corpus.
double log_loss(const PrunerModel& model, TaskId task, std::span<const Sentence> sentences,
                std::span<const SemanticGraph> gold);

// Kept fraction and gold recall for one task at a threshold.
PruneStats prune_stats(const PrunerModel& model, TaskId task, std::span<const Sentence> sentences,
                       std::span<const SemanticGraph> gold, double threshold);

// Labels with training frequency >= min_count, per task, in id order.
std::vector<std::vector<LabelId>> label_filter(const LabelVocab& vocab,
                                               std::span<const std::vector<SemanticGraph>> graphs,
                                               int min_count);

}  // namespace mtsdp::prune
