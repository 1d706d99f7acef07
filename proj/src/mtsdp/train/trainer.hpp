#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "mtsdp/eval/eval.hpp"
#include "mtsdp/model/model.hpp"
#include "mtsdp/sdp_io.hpp"

namespace mtsdp::train {

// eta0 * anneal_rate^floor(epoch / anneal_every), epochs counted from 0.
double learning_rate(const RunConfig& config, int epoch);

// Sentences with gold multigraphs interned in a model's label inventory.
// Labels unknown to the model are dropped.
struct Dataset {
  std::vector<Sentence> sentences;
  std::vector<Multigraph> gold;
};

Dataset make_dataset(const MultitaskCorpus& corpus, model::Model& model);

// Label inventories, determinism, label filter, word counts, the arc pruner
// (when enabled) and initial parameters, all from the training corpora.
model::Model prepare_model(const MultitaskCorpus& train, const RunConfig& config,
                           const EmbeddingTable* pretrained = nullptr);

struct EpochRecord {
  int epoch = 0;
  double eta = 0.0;
  double train_loss = 0.0;  // mean hinge loss per sentence, before l2
  int uncertified = 0;      // cost-augmented decodes AD³ could not certify
  std::optional<eval::Report> dev;
};

struct TrainOptions {
  const MultitaskCorpus* dev = nullptr;
  std::ostream* log = nullptr;  // one JSON object per epoch
  int threads = 1;              // for dev decoding
};

struct TrainSummary {
  int epochs_run = 0;
  int best_epoch = -1;
  double best_dev_lf = -1.0;
  std::vector<EpochRecord> history;
};

// Per-sentence Adam steps on the structured hinge loss with l2 and gradient
// clipping. With a dev corpus, keeps the parameters of the epoch with the best
// micro labeled F1 and stops after `patience` epochs without improvement.
TrainSummary train(model::Model& model, const MultitaskCorpus& corpus, const TrainOptions& options);

// Decodes every sentence; returns one corpus per model task with tops and
// frames copied from the input.
std::vector<std::vector<CorpusRecord>> parse_corpus(model::Model& model,
                                                    std::span<const CorpusRecord> input,
                                                    int threads = 1);

eval::Report evaluate_model(model::Model& model, const MultitaskCorpus& gold, int threads = 1);

}  // namespace mtsdp::train
