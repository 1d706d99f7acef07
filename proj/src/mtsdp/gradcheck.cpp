#include "mtsdp/gradcheck.hpp"

#include <random>

#include "mtsdp/parser.hpp"
#include "mtsdp/synth.hpp"
#include "mtsdp/train/trainer.hpp"

namespace mtsdp {

GradcheckReport gradcheck_full_loss(const GradcheckOptions& o) {
  synth::Options so;
  so.tasks = o.tasks;
  so.sentences = 8;
  so.min_tokens = so.max_tokens = o.tokens;
  so.seed = o.seed;
  const auto corpus = synth::generate(so);

  RunConfig c;
  c.variant = o.variant;
  c.seed = o.seed;
  c.pretrained_dim = 4;
  c.word_dim = c.pos_dim = 4;
  c.lstm_layers = 1;
  c.lstm_dim = o.lstm_dim;
  c.rep_dim = o.rep_dim;
  c.rank = o.rank;
  c.label_min_count = 0;
  c.use_pruner = false;
  c.train_decoder = TrainDecoder::Exact;
  auto model = train::prepare_model(corpus, c);
  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (auto* p : model.params.all()) {
    for (double& v : p->values()) v = u(rng);
  }
  const auto data = train::make_dataset(corpus, model);

  auto loss = [&](bool with_gradient) {
    const auto h = hinge_loss(model, data.sentences[0], data.gold[0], decode::Method::Exact, false,
                              nullptr, with_gradient);
    if (with_gradient) return h.loss + ad::add_l2_gradient(model.params, c.l2);
    return h.loss + 0.5 * c.l2 * model.params.squared_norm();
  };
  GradcheckReport r;
  r.loss = loss(false);
  auto params = model.params.trainable();
  r.check = ad::finite_diff_check(loss, params, o.h);
  return r;
}

}  // namespace mtsdp
