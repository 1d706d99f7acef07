#pragma once

#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "mtsdp/ad/param.hpp"
#include "mtsdp/config.hpp"
#include "mtsdp/graph.hpp"
#include "mtsdp/prune/pruner.hpp"
#include "mtsdp/sdp_io.hpp"

namespace mtsdp::model {

// Interned strings with training counts. Id 0 is the unknown symbol.
class StringVocab {
 public:
  StringVocab();

  int add(const std::string& s, long long count = 1);
  int id(const std::string& s) const;  // 0 when absent
  int size() const { return static_cast<int>(names_.size()); }
  const std::string& name(int id) const { return names_.at(id); }
  long long count(int id) const { return counts_.at(id); }

 private:
  std::vector<std::string> names_;
  std::vector<long long> counts_;
  std::unordered_map<std::string, int> ids_;
};

// Everything needed to score and decode: configuration, inventories,
// parameters and the arc pruner.
struct Model {
  RunConfig config;
  std::vector<std::string> task_names;
  LabelVocab labels;
  std::vector<std::vector<LabelId>> candidate_labels;  // per task, after the label filter
  StringVocab words;
  StringVocab pos;
  ad::ParamStore params;
  prune::PrunerModel pruner;  // empty when not trained

  int num_tasks() const { return static_cast<int>(task_names.size()); }
};

// Encoder names in creation order: "task<t>" per task when task-specific
// encoders are used, then "shared" when the variant has one.
std::vector<std::string> encoder_names(const RunConfig& config, int num_tasks);

// Creates all parameters with their initial values. Inventories must be set.
// `pretrained` (may be null) initializes the pretrained channel of every
// encoder; words absent from it get random rows, the unknown word gets zeros.
void create_params(Model& model, const EmbeddingTable* pretrained, ad::Rng& rng);

// Fills vocabularies, labels, determinism flags and candidate labels from
// per-task training graphs. `graphs[t][k]` is sentence k in task t.
void build_inventories(Model& model, std::span<const Sentence> sentences,
                       std::span<const std::vector<SemanticGraph>> graphs);

// Single-file text checkpoint; see docs/checkpoint-format.md.
void save_model(std::ostream& out, const Model& model);
void save_model_file(const std::string& path, const Model& model);
Model load_model(std::istream& in);
Model load_model_file(const std::string& path);

}  // namespace mtsdp::model
