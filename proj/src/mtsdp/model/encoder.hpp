#pragma once

#include <map>
#include <span>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "mtsdp/ad/tape.hpp"
#include "mtsdp/model/model.hpp"

namespace mtsdp::model {

// Probability of replacing a training word by the unknown symbol.
inline double dropout_probability(double alpha, long long count) {
  return alpha / (1.0 + static_cast<double>(count));
}

// Word ids for a sentence (0 for words unseen in training). In training mode
// each token is independently replaced by 0 with dropout_probability; the
// draw is shared by every encoder. `rng` is not touched otherwise.
std::vector<int> word_ids(const Model& model, const Sentence& sentence, bool train, ad::Rng* rng);

// Concatenated [pretrained; word; POS] vectors of one encoder.
std::vector<ad::Var> embed(ad::Tape& tape, Model& model, const std::string& encoder,
                           const Sentence& sentence, std::span<const int> word_ids);

// Multi-layer BiLSTM; returns [forward; backward] states of the top layer.
std::vector<ad::Var> bilstm(ad::Tape& tape, Model& model, const std::string& encoder,
                            std::span<const ad::Var> inputs);

struct Encoding {
  int num_tokens = 0;
  std::vector<std::vector<ad::Var>> task;  // [task][token - 1]; empty without task encoders
  std::vector<ad::Var> shared;             // [token - 1]; empty without a shared encoder
};

Encoding encode(ad::Tape& tape, Model& model, const Sentence& sentence, bool train,
                ad::Rng* rng = nullptr);

// Memoized input representations phi on one tape. Arc MLPs split their first
// layer into head and modifier projections that are computed once per token.
class InputReps {
 public:
  InputReps(ad::Tape& tape, Model& model, const Encoding& encoding);

  ad::Var pred(TaskId t, int i);
  // kind is UnlabeledArc or LabeledArc.
  ad::Var arc(TaskId t, PartKind kind, int i, int j);

  // Cached whole-parameter and single-row tape nodes.
  ad::Var param(const std::string& name);
  ad::Var param_row(const std::string& name, int row);

  ad::Tape& tape() { return tape_; }
  Model& model() { return model_; }

 private:
  std::vector<ad::Var> token_blocks(TaskId t, int i) const;
  ad::Var mlp_rest(const std::string& prefix, ad::Var hidden);
  ad::Var projection(TaskId t, PartKind kind, int token, bool head);

  ad::Tape& tape_;
  Model& model_;
  const Encoding& enc_;
  std::unordered_map<std::string, ad::Var> params_;
  std::map<std::pair<std::string, int>, ad::Var> rows_;
  std::map<std::pair<TaskId, int>, ad::Var> pred_;
  std::map<std::tuple<TaskId, int, int, int>, ad::Var> proj_;
  std::map<std::tuple<TaskId, int, int, int>, ad::Var> arc_;
};

}  // namespace mtsdp::model
