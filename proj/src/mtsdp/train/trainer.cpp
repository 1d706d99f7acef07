#include "mtsdp/train/trainer.hpp"

#include <json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <thread>

#include "mtsdp/ad/optim.hpp"
#include "mtsdp/parser.hpp"

namespace mtsdp::train {

double learning_rate(const RunConfig& c, int epoch) {
  return c.eta0 * std::pow(c.anneal_rate, epoch / c.anneal_every);
}

Dataset make_dataset(const MultitaskCorpus& corpus, model::Model& model) {
  if (corpus.num_tasks() != model.num_tasks()) {
    throw DataError("corpus has " + std::to_string(corpus.num_tasks()) + " tasks, model " +
                    std::to_string(model.num_tasks()));
  }
  Dataset d;
  for (std::size_t k = 0; k < corpus.num_sentences(); ++k) {
    d.sentences.push_back(corpus.sentence(k));
    Multigraph g;
    g.num_tokens = corpus.sentence(k).size();
    for (TaskId t = 0; t < corpus.num_tasks(); ++t) {
      g.graphs.push_back(to_graph(corpus.tasks[t][k], t, model.labels, false));
    }
    d.gold.push_back(std::move(g));
  }
  return d;
}

model::Model prepare_model(const MultitaskCorpus& corpus, const RunConfig& config,
                           const EmbeddingTable* pretrained) {
  check(config);
  if (corpus.num_sentences() == 0) throw ConfigError("training corpus is empty");
  model::Model m;
  m.config = config;
  m.task_names = corpus.task_names;
  m.labels.resize(corpus.num_tasks());
  std::vector<Sentence> sentences;
  for (std::size_t k = 0; k < corpus.num_sentences(); ++k) sentences.push_back(corpus.sentence(k));
  std::vector<std::vector<SemanticGraph>> graphs(corpus.num_tasks());
  for (TaskId t = 0; t < corpus.num_tasks(); ++t) {
    for (const auto& rec : corpus.tasks[t]) graphs[t].push_back(to_graph(rec, t, m.labels, true));
  }
  model::build_inventories(m, sentences, graphs);
  for (TaskId t = 0; t < m.num_tasks(); ++t) {
    spdlog::info("task {}: {} labels, {} kept by the label filter", m.task_names[t], m.labels.size(t),
                 m.candidate_labels[t].size());
  }

  if (config.use_pruner) {
    m.pruner = prune::PrunerModel(m.num_tasks(), config.pruner_hash_bits);
    prune::PrunerTrainOptions po;
    po.epochs = config.pruner_epochs;
    po.eta = config.pruner_eta;
    po.seed = config.seed;
    for (TaskId t = 0; t < m.num_tasks(); ++t) {
      const double loss = prune::train_pruner(m.pruner, t, sentences, graphs[t], po);
      const auto stats =
          prune::prune_stats(m.pruner, t, sentences, graphs[t], config.prune_threshold);
      spdlog::info("pruner {}: log-loss {:.4f}, kept {:.1f}% of arcs, recall {:.1f}%",
                   m.task_names[t], loss, 100 * stats.kept_fraction(), 100 * stats.recall());
    }
  }
  ad::Rng rng(config.seed);
  model::create_params(m, pretrained, rng);
  spdlog::info("{} model with {} parameters", to_string(config.variant), m.params.num_values());
  return m;
}

std::vector<std::vector<CorpusRecord>> parse_corpus(model::Model& model,
                                                    std::span<const CorpusRecord> input,
                                                    int threads) {
  const std::size_t n = input.size();
  std::vector<Multigraph> out(n);
  auto work = [&](std::size_t begin, std::size_t step) {
    for (std::size_t k = begin; k < n; k += step) {
      out[k] = parse_sentence(model, input[k].sentence).graph;
    }
  };
  const std::size_t nthreads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(n, 1));
  if (nthreads == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(nthreads);
    for (std::size_t w = 0; w < nthreads; ++w) {
      pool.emplace_back([&, w] {
        try {
          work(w, nthreads);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  std::vector<std::vector<CorpusRecord>> records(model.num_tasks());
  for (TaskId t = 0; t < model.num_tasks(); ++t) {
    for (std::size_t k = 0; k < n; ++k) {
      records[t].push_back(to_record(input[k].sentence, out[k].task(t), model.labels, &input[k]));
    }
  }
  return records;
}

eval::Report evaluate_model(model::Model& model, const MultitaskCorpus& gold, int threads) {
  if (gold.num_tasks() != model.num_tasks()) {
    throw DataError("evaluation corpus has " + std::to_string(gold.num_tasks()) + " tasks, model " +
                    std::to_string(model.num_tasks()));
  }
  const auto pred = parse_corpus(model, gold.tasks.at(0), threads);
  return eval::evaluate(model.task_names, gold.tasks, pred);
}

namespace {

nlohmann::json epoch_json(const EpochRecord& r) {
  nlohmann::json j = {{"epoch", r.epoch},
                      {"eta", r.eta},
                      {"train_loss", r.train_loss},
                      {"uncertified", r.uncertified}};
  if (r.dev) {
    nlohmann::json dev = nlohmann::json::object();
    for (const auto& t : r.dev->tasks) {
      dev[t.name] = {{"UF", 100 * t.unlabeled.f1()}, {"LF", 100 * t.labeled.f1()}};
    }
    j["dev"] = dev;
    j["micro_LF"] = 100 * r.dev->micro_labeled.f1();
  }
  return j;
}

std::vector<std::vector<double>> snapshot(const ad::ParamStore& store) {
  std::vector<std::vector<double>> s;
  for (const auto* p : store.all()) s.emplace_back(p->values().begin(), p->values().end());
  return s;
}

void restore(ad::ParamStore& store, const std::vector<std::vector<double>>& s) {
  auto params = store.all();
  for (std::size_t k = 0; k < params.size(); ++k) {
    std::copy(s[k].begin(), s[k].end(), params[k]->values().begin());
  }
}

}  // namespace

TrainSummary train(model::Model& model, const MultitaskCorpus& corpus, const TrainOptions& options) {
  const RunConfig& c = model.config;
  const Dataset data = make_dataset(corpus, model);
  if (data.sentences.empty()) throw ConfigError("training corpus is empty");
  const auto method =
      c.train_decoder == TrainDecoder::Exact ? decode::Method::Exact : decode::Method::Ad3;
  ad::AdamOptions adam{c.beta1, c.beta2, c.adam_eps};
  ad::AdamState state = ad::AdamState::for_store(model.params);
  // Offset so that shuffling and dropout do not replay the initializer stream.
  ad::Rng rng(c.seed + 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(data.sentences.size());
  std::iota(order.begin(), order.end(), 0);

  TrainSummary summary;
  std::vector<std::vector<double>> best;
  int since_best = 0;
  for (int epoch = 0; epoch < c.epochs; ++epoch) {
    EpochRecord rec;
    rec.epoch = epoch;
    rec.eta = learning_rate(c, epoch);
    std::shuffle(order.begin(), order.end(), rng);
    double loss = 0.0;
    for (std::size_t k : order) {
      model.params.zero_grad();
      const auto h = hinge_loss(model, data.sentences[k], data.gold[k], method, true, &rng, true);
      if (!h.certified) ++rec.uncertified;
      if (h.loss < -1e-6) {
        spdlog::debug("negative hinge loss {} on sentence {}", h.loss, data.sentences[k].id);
      }
      loss += h.loss;
      ad::add_l2_gradient(model.params, c.l2);
      ad::clip_global_norm(model.params, c.clip_norm);
      ad::adam_step(model.params, state, rec.eta, adam);
    }
    rec.train_loss = loss / double(data.sentences.size());
    if (options.dev) rec.dev = evaluate_model(model, *options.dev, options.threads);
    ++summary.epochs_run;

    if (rec.dev) {
      const double lf = rec.dev->micro_labeled.f1();
      spdlog::info("epoch {}: eta {:.2e}, loss {:.4f}, dev LF {:.1f}", epoch, rec.eta,
                   rec.train_loss, 100 * lf);
      if (lf > summary.best_dev_lf) {
        summary.best_dev_lf = lf;
        summary.best_epoch = epoch;
        best = snapshot(model.params);
        since_best = 0;
      } else {
        ++since_best;
      }
    } else {
      spdlog::info("epoch {}: eta {:.2e}, loss {:.4f}", epoch, rec.eta, rec.train_loss);
    }
    if (options.log) *options.log << epoch_json(rec).dump() << '\n' << std::flush;
    summary.history.push_back(std::move(rec));
    if (options.dev && since_best >= c.patience) {
      spdlog::info("no dev improvement for {} epochs, stopping", since_best);
      break;
    }
  }
  if (!best.empty()) restore(model.params, best);
  return summary;
}

}  // namespace mtsdp::train
