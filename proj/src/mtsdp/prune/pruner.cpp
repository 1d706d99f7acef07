#include "mtsdp/prune/pruner.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <string>

#include "mtsdp/ad/optim.hpp"
#include "mtsdp/error.hpp"

namespace mtsdp::prune {
namespace {

std::uint32_t feature(char tmpl, const std::string& value, std::uint32_t mask) {
  const char tag[2] = {tmpl, '|'};
  return static_cast<std::uint32_t>(fnv1a(value, fnv1a(tag)) & mask);
}

double sigmoid(double z) {
  return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

// -log p(y | z) for the logistic model.
double nll(double z, bool positive) {
  const double m = positive ? -z : z;
  return m > 0 ? m + std::log1p(std::exp(-m)) : std::log1p(std::exp(m));
}

std::vector<std::vector<std::uint8_t>> gold_matrix(const SemanticGraph& g, int n) {
  std::vector<std::vector<std::uint8_t>> y(n + 1, std::vector<std::uint8_t>(n + 1, 0));
  for (const auto& a : g.arcs) {
    if (a.head >= 1 && a.head <= n && a.modifier >= 1 && a.modifier <= n) y[a.head][a.modifier] = 1;
  }
  return y;
}

void check_corpus(std::span<const Sentence> sentences, std::span<const SemanticGraph> gold) {
  if (sentences.size() != gold.size()) throw LogicError("pruner: sentences and graphs differ in count");
}

}  // namespace

std::uint64_t fnv1a(std::span<const char> bytes, std::uint64_t h) {
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

int distance_bucket(int i, int j) {
  const int d = j - i;
  const int a = std::abs(d);
  const int b = a <= 3 ? a : (a <= 7 ? 4 : 5);
  return d < 0 ? -b : b;
}

std::array<std::uint32_t, kNumTemplates> featurize_arc(const Sentence& s, int i, int j,
                                                       int hash_bits) {
  const std::uint32_t mask = (1u << hash_bits) - 1;
  const Token& h = s.token(i);
  const Token& m = s.token(j);
  return {
      feature('a', h.form, mask),
      feature('b', m.form, mask),
      feature('c', h.pos, mask),
      feature('d', m.pos, mask),
      feature('e', h.pos + ' ' + m.pos, mask),
      feature('f', std::to_string(distance_bucket(i, j)), mask),
      feature('g', "", mask),
  };
}

PruneStats& PruneStats::operator+=(const PruneStats& o) {
  candidate_arcs += o.candidate_arcs;
  kept_arcs += o.kept_arcs;
  gold_arcs += o.gold_arcs;
  gold_kept += o.gold_kept;
  return *this;
}

PrunerModel::PrunerModel(int num_tasks, int hash_bits) : hash_bits_(hash_bits) {
  if (hash_bits < 1 || hash_bits > 30) throw ConfigError("pruner hash bits must be in [1,30]");
  for (TaskId t = 0; t < num_tasks; ++t) {
    rows_.push_back(&store_.add("pruner.t" + std::to_string(t), 1, 1 << hash_bits, false));
  }
}

double PrunerModel::arc_score(TaskId t, const Sentence& sentence, int i, int j) const {
  const auto w = weights(t).values();
  double z = 0.0;
  for (auto f : featurize_arc(sentence, i, j, hash_bits_)) z += w[f];
  return z;
}

double PrunerModel::arc_posterior(TaskId t, const Sentence& sentence, int i, int j) const {
  return sigmoid(arc_score(t, sentence, i, j));
}

decode::ArcMask PrunerModel::prune(const Sentence& sentence, double threshold) const {
  const int n = sentence.size();
  decode::ArcMask mask(num_tasks(), n, true);
  for (TaskId t = 0; t < num_tasks(); ++t) {
    for (int i = 1; i <= n; ++i) {
      for (int j = 1; j <= n; ++j) {
        if (i != j) mask.set(t, i, j, arc_posterior(t, sentence, i, j) >= threshold);
      }
    }
  }
  return mask;
}

void PrunerModel::save(std::ostream& out) const {
  out << "pruner " << num_tasks() << ' ' << hash_bits_ << '\n';
  ad::save_params(out, store_);
}

PrunerModel PrunerModel::load(std::istream& in) {
  std::string tag;
  int tasks = 0, bits = 0;
  if (!(in >> tag >> tasks >> bits) || tag != "pruner" || tasks < 0) {
    throw DataError("malformed pruner header");
  }
  if (tasks == 0) {
    PrunerModel empty;
    empty.hash_bits_ = bits;
    ad::load_params(in, empty.store_);
    return empty;
  }
  PrunerModel model(tasks, bits);
  ad::load_params(in, model.store_);
  return model;
}

double train_pruner(PrunerModel& model, TaskId task, std::span<const Sentence> sentences,
                    std::span<const SemanticGraph> gold, const PrunerTrainOptions& options) {
  check_corpus(sentences, gold);
  if (sentences.empty()) throw ConfigError("cannot train the pruner on an empty corpus");
  ad::Param& w = model.weights(task);
  std::vector<double> m(w.size(), 0.0), v(w.size(), 0.0);
  long step = 0;
  auto grads = w.grads();
  auto values = w.values();

  std::vector<std::size_t> order(sentences.size());
  std::iota(order.begin(), order.end(), 0);
  ad::Rng rng(options.seed);
  std::vector<std::size_t> touched;
  double last_loss = 0.0;
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss = 0.0;
    long long arcs = 0;
    for (std::size_t k : order) {
      const Sentence& s = sentences[k];
      const int n = s.size();
      const auto y = gold_matrix(gold[k], n);
      touched.clear();
      for (int i = 1; i <= n; ++i) {
        for (int j = 1; j <= n; ++j) {
          if (i == j) continue;
          const auto f = featurize_arc(s, i, j, model.hash_bits());
          double z = 0.0;
          for (auto idx : f) z += values[idx];
          const bool pos = y[i][j] != 0;
          loss += nll(z, pos);
          ++arcs;
          const double g = sigmoid(z) - (pos ? 1.0 : 0.0);
          for (auto idx : f) {
            grads[idx] += g;
            touched.push_back(idx);
          }
        }
      }
      if (touched.empty()) continue;
      std::sort(touched.begin(), touched.end());
      touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
      ad::adam_step_sparse(w, m, v, step, touched, options.eta);
      for (auto idx : touched) grads[idx] = 0.0;
    }
    last_loss = arcs ? loss / double(arcs) : 0.0;
  }
  return last_loss;
}

double log_loss(const PrunerModel& model, TaskId task, std::span<const Sentence> sentences,
                std::span<const SemanticGraph> gold) {
  check_corpus(sentences, gold);
  double loss = 0.0;
  long long arcs = 0;
  for (std::size_t k = 0; k < sentences.size(); ++k) {
    const int n = sentences[k].size();
    const auto y = gold_matrix(gold[k], n);
    for (int i = 1; i <= n; ++i) {
      for (int j = 1; j <= n; ++j) {
        if (i == j) continue;
        loss += nll(model.arc_score(task, sentences[k], i, j), y[i][j] != 0);
        ++arcs;
      }
    }
  }
  return arcs ? loss / double(arcs) : 0.0;
}

PruneStats prune_stats(const PrunerModel& model, TaskId task, std::span<const Sentence> sentences,
                       std::span<const SemanticGraph> gold, double threshold) {
  check_corpus(sentences, gold);
  PruneStats stats;
  for (std::size_t k = 0; k < sentences.size(); ++k) {
    const int n = sentences[k].size();
    const auto y = gold_matrix(gold[k], n);
    for (int i = 1; i <= n; ++i) {
      for (int j = 1; j <= n; ++j) {
        if (i == j) continue;
        const bool kept = model.arc_posterior(task, sentences[k], i, j) >= threshold;
        ++stats.candidate_arcs;
        stats.kept_arcs += kept;
        if (y[i][j]) {
          ++stats.gold_arcs;
          stats.gold_kept += kept;
        }
      }
    }
  }
  return stats;
}

std::vector<std::vector<LabelId>> label_filter(const LabelVocab& vocab,
                                               std::span<const std::vector<SemanticGraph>> graphs,
                                               int min_count) {
  std::vector<std::vector<LabelId>> out(vocab.num_tasks());
  for (TaskId t = 0; t < vocab.num_tasks(); ++t) {
    std::vector<long long> count(vocab.size(t), 0);
    if (t < static_cast<TaskId>(graphs.size())) {
      for (const auto& g : graphs[t]) {
        for (const auto& a : g.arcs) {
          if (a.label >= 0 && a.label < vocab.size(t)) ++count[a.label];
        }
      }
    }
    for (LabelId l = 0; l < vocab.size(t); ++l) {
      if (count[l] >= min_count) out[t].push_back(l);
    }
  }
  return out;
}

}  // namespace mtsdp::prune
