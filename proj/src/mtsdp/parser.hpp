#pragma once

#include "mtsdp/ad/param.hpp"
#include "mtsdp/decode/decoder.hpp"
#include "mtsdp/model/model.hpp"

namespace mtsdp {

decode::DecodeOptions decode_options(const RunConfig& config, decode::Method method);

struct ParseResult {
  Multigraph graph;
  double objective = 0.0;
  bool certified = true;  // AD³ closed the gap (always true for exact search)
};

// enumerate -> score -> decode -> round. Deterministic; reads the model only.
ParseResult parse_sentence(model::Model& model, const Sentence& sentence,
                           decode::Method method = decode::Method::Ad3);

struct HingeOutcome {
  double loss = 0.0;           // S(y_hat) + cost(y_hat, y) - S(y)
  double cost = 0.0;
  double predicted_score = 0.0;
  double gold_score = 0.0;
  Multigraph prediction;       // cost-augmented argmax
  Multigraph gold;             // gold restricted to the candidates
  bool certified = true;
};

// Structured hinge loss of one (multitask) sentence. When `backward` is set
// and the loss is positive, adds d loss / d params to the gradient
// accumulators. `train` enables word dropout drawn from `rng`. Throws
// DataError when the restricted gold graph violates the constraints.
HingeOutcome hinge_loss(model::Model& model, const Sentence& sentence, const Multigraph& gold,
                        decode::Method method, bool train, ad::Rng* rng, bool backward);

}  // namespace mtsdp
