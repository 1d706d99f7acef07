#include "mtsdp/model/encoder.hpp"

#include <random>

#include "mtsdp/error.hpp"

namespace mtsdp::model {

std::vector<int> word_ids(const Model& model, const Sentence& sentence, bool train, ad::Rng* rng) {
  std::vector<int> ids;
  ids.reserve(sentence.tokens.size());
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  for (const auto& tok : sentence.tokens) {
    int w = model.words.id(tok.form);
    if (train && rng) {
      const double p = dropout_probability(model.config.word_dropout, model.words.count(w));
      if (uniform(*rng) < p) w = 0;
    }
    ids.push_back(w);
  }
  return ids;
}

std::vector<ad::Var> embed(ad::Tape& tape, Model& model, const std::string& encoder,
                           const Sentence& sentence, std::span<const int> word_ids) {
  const std::string pre = "enc." + encoder + ".emb.";
  ad::Param* channels[3] = {model.params.find(pre + "pre"), model.params.find(pre + "word"),
                            model.params.find(pre + "pos")};
  std::vector<ad::Var> out;
  out.reserve(word_ids.size());
  std::vector<ad::Var> parts;
  for (std::size_t k = 0; k < word_ids.size(); ++k) {
    parts.clear();
    if (channels[0]) parts.push_back(tape.param_row(*channels[0], word_ids[k]));
    if (channels[1]) parts.push_back(tape.param_row(*channels[1], word_ids[k]));
    if (channels[2]) parts.push_back(tape.param_row(*channels[2], model.pos.id(sentence.tokens[k].pos)));
    out.push_back(parts.size() == 1 ? parts[0] : tape.concat(parts));
  }
  return out;
}

namespace {

// One LSTM direction over `xs`, visiting positions in `order`. Gates are laid
// out as input, forget, output, candidate.
std::vector<ad::Var> run_cell(ad::Tape& tape, ad::Param& W, ad::Param& b,
                              std::span<const ad::Var> xs, bool reverse) {
  const int h = W.rows() / 4;
  const int in = W.cols() - h;
  const int n = static_cast<int>(xs.size());
  std::vector<ad::Var> hs(n);
  const ad::Var bias = tape.param(b);
  ad::Var hprev, cprev;
  for (int s = 0; s < n; ++s) {
    const int k = reverse ? n - 1 - s : s;
    ad::Var z = tape.add(tape.matvec_cols(W, 0, xs[k]), bias);
    if (hprev.valid()) z = tape.add(z, tape.matvec_cols(W, in, hprev));
    const ad::Var i = tape.sigmoid(tape.slice(z, 0, h));
    const ad::Var f = tape.sigmoid(tape.slice(z, h, h));
    const ad::Var o = tape.sigmoid(tape.slice(z, 2 * h, h));
    const ad::Var g = tape.tanh(tape.slice(z, 3 * h, h));
    ad::Var c = tape.mul(i, g);
    if (cprev.valid()) c = tape.add(c, tape.mul(f, cprev));
    hprev = tape.mul(o, tape.tanh(c));
    cprev = c;
    hs[k] = hprev;
  }
  return hs;
}

}  // namespace

std::vector<ad::Var> bilstm(ad::Tape& tape, Model& model, const std::string& encoder,
                            std::span<const ad::Var> inputs) {
  std::vector<ad::Var> xs(inputs.begin(), inputs.end());
  for (int l = 0; l < model.config.lstm_layers; ++l) {
    const std::string cell = "enc." + encoder + ".l" + std::to_string(l) + ".";
    auto fwd = run_cell(tape, model.params.at(cell + "f.W"), model.params.at(cell + "f.b"), xs, false);
    auto bwd = run_cell(tape, model.params.at(cell + "b.W"), model.params.at(cell + "b.b"), xs, true);
    for (std::size_t k = 0; k < xs.size(); ++k) {
      const ad::Var both[2] = {fwd[k], bwd[k]};
      xs[k] = tape.concat(both);
    }
  }
  return xs;
}

Encoding encode(ad::Tape& tape, Model& model, const Sentence& sentence, bool train, ad::Rng* rng) {
  Encoding enc;
  enc.num_tokens = sentence.size();
  const auto ids = word_ids(model, sentence, train, rng);
  for (const auto& name : encoder_names(model.config, model.num_tasks())) {
    auto states = bilstm(tape, model, name, embed(tape, model, name, sentence, ids));
    if (name == "shared") enc.shared = std::move(states);
    else enc.task.push_back(std::move(states));
  }
  return enc;
}

InputReps::InputReps(ad::Tape& tape, Model& model, const Encoding& encoding)
    : tape_(tape), model_(model), enc_(encoding) {}

ad::Var InputReps::param(const std::string& name) {
  auto it = params_.find(name);
  if (it != params_.end()) return it->second;
  const ad::Var v = tape_.param(model_.params.at(name));
  params_.emplace(name, v);
  return v;
}

ad::Var InputReps::param_row(const std::string& name, int row) {
  const auto key = std::make_pair(name, row);
  auto it = rows_.find(key);
  if (it != rows_.end()) return it->second;
  const ad::Var v = tape_.param_row(model_.params.at(name), row);
  rows_.emplace(key, v);
  return v;
}

std::vector<ad::Var> InputReps::token_blocks(TaskId t, int i) const {
  if (i < 1 || i > enc_.num_tokens) throw LogicError("token index out of range");
  std::vector<ad::Var> blocks;
  if (!enc_.task.empty()) blocks.push_back(enc_.task.at(t)[i - 1]);
  if (!enc_.shared.empty()) blocks.push_back(enc_.shared[i - 1]);
  return blocks;
}

ad::Var InputReps::mlp_rest(const std::string& prefix, ad::Var hidden) {
  for (int k = 1; k < model_.config.mlp_layers; ++k) {
    const std::string layer = prefix + ".l" + std::to_string(k);
    hidden = tape_.tanh(
        tape_.add(tape_.matvec(model_.params.at(layer + ".W"), hidden), param(layer + ".b")));
  }
  return hidden;
}

ad::Var InputReps::pred(TaskId t, int i) {
  const auto key = std::make_pair(t, i);
  auto it = pred_.find(key);
  if (it != pred_.end()) return it->second;
  const std::string prefix = "t" + std::to_string(t) + ".mlp.pred";
  ad::Param& W = model_.params.at(prefix + ".l0.W");
  std::vector<ad::Var> terms{param(prefix + ".l0.b")};
  int col = 0;
  for (ad::Var block : token_blocks(t, i)) {
    terms.push_back(tape_.matvec_cols(W, col, block));
    col += tape_.dim(block);
  }
  const ad::Var phi = mlp_rest(prefix, tape_.tanh(tape_.add(terms)));
  pred_.emplace(key, phi);
  return phi;
}

// Layout of the first arc layer's input: [h_i^t; h_j^t; shared_i; shared_j].
ad::Var InputReps::projection(TaskId t, PartKind kind, int token, bool head) {
  const auto key = std::make_tuple(t, static_cast<int>(kind), token, head ? 1 : 0);
  auto it = proj_.find(key);
  if (it != proj_.end()) return it->second;
  const std::string prefix =
      "t" + std::to_string(t) + (kind == PartKind::LabeledArc ? ".mlp.la" : ".mlp.ua");
  ad::Param& W = model_.params.at(prefix + ".l0.W");
  std::vector<ad::Var> terms;
  int col = 0;
  for (ad::Var block : token_blocks(t, token)) {
    const int d = tape_.dim(block);
    terms.push_back(tape_.matvec_cols(W, col + (head ? 0 : d), block));
    col += 2 * d;
  }
  const ad::Var y = terms.size() == 1 ? terms[0] : tape_.add(terms);
  proj_.emplace(key, y);
  return y;
}

ad::Var InputReps::arc(TaskId t, PartKind kind, int i, int j) {
  if (kind != PartKind::UnlabeledArc && kind != PartKind::LabeledArc) {
    throw LogicError("InputReps::arc needs an arc kind");
  }
  const auto key = std::make_tuple(t, static_cast<int>(kind), i, j);
  auto it = arc_.find(key);
  if (it != arc_.end()) return it->second;
  const std::string prefix =
      "t" + std::to_string(t) + (kind == PartKind::LabeledArc ? ".mlp.la" : ".mlp.ua");
  const ad::Var terms[3] = {projection(t, kind, i, true), projection(t, kind, j, false),
                            param(prefix + ".l0.b")};
  const ad::Var phi = mlp_rest(prefix, tape_.tanh(tape_.add(terms)));
  arc_.emplace(key, phi);
  return phi;
}

}  // namespace mtsdp::model
