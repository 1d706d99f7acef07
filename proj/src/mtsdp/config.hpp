#pragma once

#include <cstdint>
#include <string>

namespace mtsdp {

enum class Variant { Basic, Shared1, Freda1, Shared3, Freda3 };

const char* to_string(Variant v);
Variant parse_variant(const std::string& name);

inline bool uses_shared_encoder(Variant v) { return v != Variant::Basic; }
inline bool uses_task_encoders(Variant v) {
  return v == Variant::Basic || v == Variant::Freda1 || v == Variant::Freda3;
}
inline bool uses_cross_task(Variant v) { return v == Variant::Shared3 || v == Variant::Freda3; }

enum class TrainDecoder { Ad3, Exact };

// Every tunable of the parser. Defaults follow the published setup.
struct RunConfig {
  // Token embeddings.
  int pretrained_dim = 100;
  int word_dim = 25;
  int pos_dim = 25;
  double word_dropout = 0.25;  // alpha

  // Encoders. lstm_dim is the concatenated forward+backward size.
  int lstm_layers = 2;
  int lstm_dim = 200;
  int task_lstm_dim = -1;  // task-specific encoders; -1 = lstm_dim, 0 = none

  // Representations and scoring.
  int rep_dim = 100;
  int mlp_layers = 2;
  int mlp_hidden_dim = -1;  // -1 = rep_dim
  int rank = 100;

  Variant variant = Variant::Basic;

  // Learning.
  int epochs = 30;
  double eta0 = 1e-3;
  double anneal_rate = 0.5;
  int anneal_every = 10;
  double beta1 = 0.9;
  double beta2 = 0.9;
  double adam_eps = 1e-8;
  double l2 = 1e-6;
  double clip_norm = 1.0;
  int patience = 5;
  double fp_cost = 0.4;
  double fn_cost = 0.6;
  TrainDecoder train_decoder = TrainDecoder::Ad3;

  // Inference.
  int ad3_max_iter = 500;
  double ad3_rho = 0.1;
  double ad3_tol = 1e-6;
  int ad3_max_nodes = 200;  // branch-and-bound budget; 1 = plain relaxation

  // Pruning.
  bool use_pruner = true;
  double prune_threshold = 1e-4;
  int label_min_count = 30;
  int pruner_epochs = 20;
  double pruner_eta = 0.1;
  int pruner_hash_bits = 20;

  std::uint64_t seed = 1;

  int effective_task_lstm_dim() const { return task_lstm_dim < 0 ? lstm_dim : task_lstm_dim; }
  int effective_mlp_hidden_dim() const { return mlp_hidden_dim < 0 ? rep_dim : mlp_hidden_dim; }
};

// Parses a JSON object; missing keys keep their defaults, unknown keys throw.
RunConfig load_config(const std::string& json_text);
RunConfig load_config_file(const std::string& path);
std::string to_json(const RunConfig& config);
void check(const RunConfig& config);

}  // namespace mtsdp
