#include "mtsdp/parser.hpp"

#include <map>

#include "mtsdp/model/scorer.hpp"

namespace mtsdp {

decode::DecodeOptions decode_options(const RunConfig& config, decode::Method method) {
  decode::DecodeOptions o;
  o.method = method;
  o.ad3.max_iter = config.ad3_max_iter;
  o.ad3.rho = config.ad3_rho;
  o.ad3.tol = config.ad3_tol;
  o.ad3.max_nodes = config.ad3_max_nodes;
  return o;
}

ParseResult parse_sentence(model::Model& model, const Sentence& sentence, decode::Method method) {
  ad::Tape tape;
  const auto enc = model::encode(tape, model, sentence, false);
  model::InputReps reps(tape, model, enc);
  const auto cands = model::model_candidates(model, sentence);
  const auto scored = model::build_score_table(reps, cands);
  auto out = decode::decode_table(cands, scored.table, model.labels,
                                  decode_options(model.config, method));
  ParseResult r;
  r.graph = std::move(out.graph);
  r.objective = out.objective;
  r.certified = !out.ad3 || out.ad3->converged;
  return r;
}

HingeOutcome hinge_loss(model::Model& model, const Sentence& sentence, const Multigraph& gold,
                        decode::Method method, bool train, ad::Rng* rng, bool backward) {
  ad::Tape tape;
  const auto enc = model::encode(tape, model, sentence, train, rng);
  model::InputReps reps(tape, model, enc);
  const auto cands = model::model_candidates(model, sentence);
  const auto scored = model::build_score_table(reps, cands);

  HingeOutcome h;
  h.gold = decode::restrict_to_candidates(gold, cands);
  if (auto v = validate(h.gold, model.labels); !v.empty()) {
    throw DataError("gold graph of sentence '" + sentence.id + "' is infeasible: " + describe(v[0]));
  }
  decode::CostSpec cost;
  cost.fp_cost = model.config.fp_cost;
  cost.fn_cost = model.config.fn_cost;
  cost.gold = &h.gold;
  const auto augmented = decode::augment_costs(scored.table, cands, cost);
  auto out = decode::decode_table(cands, augmented, model.labels,
                                  decode_options(model.config, method));
  h.prediction = std::move(out.graph);
  h.certified = !out.ad3 || out.ad3->converged;
  h.cost = decode::recovered_cost(augmented, cands, h.prediction);
  h.predicted_score = decode::score_of(scored.table, cands, h.prediction);
  h.gold_score = decode::score_of(scored.table, cands, h.gold);
  h.loss = h.predicted_score + h.cost - h.gold_score;
  if (h.loss < 0.0) {
    // An uncertified decode can land below the gold structure, which is itself
    // a candidate for the max; fall back to it.
    h.prediction = h.gold;
    h.cost = 0.0;
    h.predicted_score = h.gold_score;
    h.loss = 0.0;
  }

  if (backward && h.loss > 0) {
    // d loss = sum over parts of ([p in y_hat] - [p in y]) d s(p).
    std::map<std::size_t, double> coef;
    for (const auto& p : parts_of(h.prediction, cands.has_cross_task())) coef[*cands.find(p)] += 1.0;
    for (const auto& p : parts_of(h.gold, cands.has_cross_task())) coef[*cands.find(p)] -= 1.0;
    std::vector<ad::Var> terms;
    std::vector<double> coeffs;
    for (const auto& [k, c] : coef) {
      if (c == 0.0) continue;
      terms.push_back(scored.vars[k]);
      coeffs.push_back(c);
    }
    if (!terms.empty()) tape.backward(tape.weighted_sum(terms, coeffs));
  }
  return h;
}

}  // namespace mtsdp
