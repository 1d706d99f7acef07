#pragma once

#include <random>

#include "mtsdp/synth.hpp"
#include "mtsdp/train/trainer.hpp"

namespace mtsdp::testing {

// Small dimensions for fast tests; everything else keeps its default.
inline RunConfig scaled_config(Variant variant, int dim = 8, int rank = 4) {
  RunConfig c;
  c.variant = variant;
  c.pretrained_dim = 0;
  c.word_dim = dim;
  c.pos_dim = dim;
  c.lstm_layers = 1;
  c.lstm_dim = dim;
  c.rep_dim = dim;
  c.rank = rank;
  c.label_min_count = 0;
  c.use_pruner = false;
  c.pruner_hash_bits = 12;
  return c;
}

inline MultitaskCorpus synth_corpus(int tasks, int sentences = 6, int max_tokens = 5,
                                    std::uint64_t seed = 3) {
  synth::Options o;
  o.tasks = tasks;
  o.sentences = sentences;
  o.min_tokens = 3;
  o.max_tokens = max_tokens;
  o.seed = seed;
  return synth::generate(o);
}

inline model::Model small_model(Variant variant, const MultitaskCorpus& corpus, int dim = 8,
                                int rank = 4, std::uint64_t seed = 5) {
  auto c = scaled_config(variant, dim, rank);
  c.seed = seed;
  return train::prepare_model(corpus, c);
}

// Every value of every parameter drawn from U[-scale, scale].
inline void randomize(model::Model& m, std::uint64_t seed, double scale = 0.5) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  for (auto* p : m.params.all()) {
    for (double& v : p->values()) v = u(rng);
  }
}

}  // namespace mtsdp::testing
