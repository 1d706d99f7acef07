#include "mtsdp/mtsdp.h"

#include <json.hpp>
#include <spdlog/spdlog.h>

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <memory>
#include <new>
#include <string>

#include "mtsdp/error.hpp"
#include "mtsdp/eval/eval.hpp"
#include "mtsdp/gradcheck.hpp"
#include "mtsdp/prune/pruner.hpp"
#include "mtsdp/synth.hpp"
#include "mtsdp/train/trainer.hpp"

struct mtsdp_config {
  mtsdp::RunConfig value;
};
struct mtsdp_corpus {
  mtsdp::MultitaskCorpus value;
};
struct mtsdp_embeddings {
  mtsdp::EmbeddingTable value;
};
struct mtsdp_model {
  mtsdp::model::Model value;
};

namespace {

thread_local std::string last_error;

mtsdp_status fail(mtsdp_status status, std::string message) {
  last_error = std::move(message);
  return status;
}

// Runs `body`, translating exceptions into status codes.
template <class F>
mtsdp_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return MTSDP_OK;
  } catch (const mtsdp::DataError& e) {
    return fail(MTSDP_ERR_DATA, e.what());
  } catch (const mtsdp::ConfigError& e) {
    return fail(MTSDP_ERR_CONFIG, e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(MTSDP_ERR_CONFIG, e.what());
  } catch (const std::bad_alloc&) {
    return fail(MTSDP_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(MTSDP_ERR_INTERNAL, e.what());
  }
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <class... T>
bool any_null(const T*... p) {
  return ((p == nullptr) || ...);
}

}  // namespace

extern "C" {

const char* mtsdp_version(void) { return "0.1.0"; }

const char* mtsdp_last_error(void) { return last_error.c_str(); }

void mtsdp_string_free(char* s) { std::free(s); }

mtsdp_status mtsdp_set_log_level(const char* level) {
  if (!level) return fail(MTSDP_ERR_ARGUMENT, "null log level");
  const auto parsed = spdlog::level::from_str(level);
  // from_str maps unknown names to off.
  if (parsed == spdlog::level::off && std::strcmp(level, "off") != 0) {
    return fail(MTSDP_ERR_ARGUMENT, std::string("unknown log level '") + level + "'");
  }
  spdlog::set_level(parsed);
  return MTSDP_OK;
}

mtsdp_status mtsdp_config_new(mtsdp_config** out) {
  if (!out) return fail(MTSDP_ERR_ARGUMENT, "null output handle");
  return guarded([&] { *out = new mtsdp_config{}; });
}

mtsdp_status mtsdp_config_load(const char* path, mtsdp_config** out) {
  if (any_null(path, out)) return fail(MTSDP_ERR_ARGUMENT, "null argument");
  return guarded([&] { *out = new mtsdp_config{mtsdp::load_config_file(path)}; });
}

mtsdp_status mtsdp_config_set(mtsdp_config* config, const char* key, const char* json_value) {
  if (any_null(config, key, json_value)) return fail(MTSDP_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    auto doc = nlohmann::json::parse(mtsdp::to_json(config->value));
    if (!doc.contains(key)) throw mtsdp::ConfigError(std::string("unknown configuration key '") + key + "'");
    doc[key] = nlohmann::json::parse(json_value);
    config->value = mtsdp::load_config(doc.dump());
  });
}

mtsdp_status mtsdp_config_get(const mtsdp_config* config, const char* key, char** json_value) {
  if (any_null(config, key, json_value)) return fail(MTSDP_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    const auto doc = nlohmann::json::parse(mtsdp::to_json(config->value));
    if (!doc.contains(key)) throw mtsdp::ConfigError(std::string("unknown configuration key '") + key + "'");
    *json_value = copy_string(doc[key].dump());
  });
}

mtsdp_status mtsdp_config_to_json(const mtsdp_config* config, char** out) {
  if (any_null(config, out)) return fail(MTSDP_ERR_ARGUMENT, "null argument");
  return guarded([&] { *out = copy_string(mtsdp::to_json(config->value)); });
}

void mtsdp_config_free(mtsdp_config* config) { delete config; }

mtsdp_status mtsdp_corpus_read(const char* const* paths, size_t num_paths, mtsdp_corpus** out) {
  if (any_null(paths, out) || num_paths == 0) return fail(MTSDP_ERR_ARGUMENT, "no corpus paths");
  return guarded([&] {
    std::vector<std::string> p;
    for (size_t k = 0; k < num_paths; ++k) {
      if (!paths[k]) throw mtsdp::ConfigError("null corpus path");
      p.emplace_back(paths[k]);
    }
    *out = new mtsdp_corpus{mtsdp::read_parallel_corpora(p)};
  });
}

mtsdp_status mtsdp_corpus_synthetic(int tasks, int sentences, uint64_t seed, mtsdp_corpus** out) {
  if (!out) return fail(MTSDP_ERR_ARGUMENT, "null output handle");
  if (sentences < 1) return fail(MTSDP_ERR_ARGUMENT, "need at least one sentence");
  return guarded([&] {
    mtsdp::synth::Options o;
    o.tasks = tasks;
    o.sentences = sentences;
    o.seed = seed;
    *out = new mtsdp_corpus{mtsdp::synth::generate(o)};
  });
}

size_t mtsdp_corpus_num_tasks(const mtsdp_corpus* corpus) {
  return corpus ? corpus->value.tasks.size() : 0;
}

size_t mtsdp_corpus_num_sentences(const mtsdp_corpus* corpus) {
  return corpus ? corpus->value.num_sentences() : 0;
}

const char* mtsdp_corpus_task_name(const mtsdp_corpus* corpus, size_t task) {
  if (!corpus || task >= corpus->value.task_names.size()) return nullptr;
  return corpus->value.task_names[task].c_str();
}

mtsdp_status mtsdp_corpus_write(const mtsdp_corpus* corpus, size_t task, const char* path) {
  if (any_null(corpus, path)) return fail(MTSDP_ERR_ARGUMENT, "null argument");
  if (task >= corpus->value.tasks.size()) return fail(MTSDP_ERR_ARGUMENT, "task index out of range");
  return guarded([&] { mtsdp::write_corpus_file(path, corpus->value.tasks[task]); });
}

void mtsdp_corpus_free(mtsdp_corpus* corpus) { delete corpus; }

mtsdp_status mtsdp_embeddings_load(const char* path, int dimension, mtsdp_embeddings** out) {
  if (any_null(path, out)) return fail(MTSDP_ERR_ARGUMENT, "null argument");
  if (dimension < 1) return fail(MTSDP_ERR_ARGUMENT, "embedding dimension must be positive");
  return guarded([&] { *out = new mtsdp_embeddings{mtsdp::load_embeddings_file(path, dimension)}; });
}

void mtsdp_embeddings_free(mtsdp_embeddings* embeddings) { delete embeddings; }

mtsdp_status mtsdp_train(const mtsdp_config* config, const mtsdp_corpus* train,
                         const mtsdp_corpus* dev, const mtsdp_embeddings* embeddings,
                         const char* log_path, int threads, mtsdp_model** out) {
  if (any_null(config, train, out)) return fail(MTSDP_ERR_ARGUMENT, "null argument");
  if (threads < 1) return fail(MTSDP_ERR_ARGUMENT, "threads must be >= 1");
  return guarded([&] {
    if (dev && dev->value.num_tasks() != train->value.num_tasks()) {
      throw mtsdp::DataError("dev corpus has " + std::to_string(dev->value.num_tasks()) +
                             " tasks, training corpus " + std::to_string(train->value.num_tasks()));
    }
    std::ofstream log;
    if (log_path) {
      log.open(log_path);
      if (!log) throw mtsdp::DataError(std::string("cannot write ") + log_path);
    }
    auto m = std::make_unique<mtsdp_model>(mtsdp_model{mtsdp::train::prepare_model(
        train->value, config->value, embeddings ? &embeddings->value : nullptr)});
    mtsdp::train::TrainOptions o;
    o.dev = dev ? &dev->value : nullptr;
    o.log = log_path ? &log : nullptr;
    o.threads = threads;
    mtsdp::train::train(m->value, train->value, o);
    *out = m.release();
  });
}

mtsdp_status mtsdp_model_save(const mtsdp_model* model, const char* path) {
  if (any_null(model, path)) return fail(MTSDP_ERR_ARGUMENT, "null argument");
  return guarded([&] { mtsdp::model::save_model_file(path, model->value); });
}

mtsdp_status mtsdp_model_load(const char* path, mtsdp_model** out) {
  if (any_null(path, out)) return fail(MTSDP_ERR_ARGUMENT, "null argument");
  return guarded([&] { *out = new mtsdp_model{mtsdp::model::load_model_file(path)}; });
}

size_t mtsdp_model_num_tasks(const mtsdp_model* model) {
  return model ? static_cast<size_t>(model->value.num_tasks()) : 0;
}

size_t mtsdp_model_num_parameters(const mtsdp_model* model) {
  return model ? model->value.params.num_values() : 0;
}

mtsdp_status mtsdp_model_zero(mtsdp_model* model) {
  if (!model) return fail(MTSDP_ERR_ARGUMENT, "null model");
  for (auto* p : model->value.params.all()) p->fill(0.0);
  return MTSDP_OK;
}

void mtsdp_model_free(mtsdp_model* model) { delete model; }

mtsdp_status mtsdp_parse(const mtsdp_model* model, const mtsdp_corpus* input, int threads,
                         mtsdp_corpus** out) {
  if (any_null(model, input, out)) return fail(MTSDP_ERR_ARGUMENT, "null argument");
  if (threads < 1) return fail(MTSDP_ERR_ARGUMENT, "threads must be >= 1");
  if (input->value.tasks.empty()) return fail(MTSDP_ERR_ARGUMENT, "empty input corpus");
  return guarded([&] {
    // Parsing only reads the model.
    auto& m = const_cast<mtsdp::model::Model&>(model->value);
    auto result = std::make_unique<mtsdp_corpus>();
    result->value.task_names = m.task_names;
    result->value.tasks = mtsdp::train::parse_corpus(m, input->value.tasks[0], threads);
    *out = result.release();
  });
}

mtsdp_status mtsdp_evaluate(const mtsdp_corpus* gold, const mtsdp_corpus* predicted,
                            int include_tops, char** json_out) {
  if (any_null(gold, predicted, json_out)) return fail(MTSDP_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    if (gold->value.num_tasks() != predicted->value.num_tasks()) {
      throw mtsdp::DataError("gold has " + std::to_string(gold->value.num_tasks()) +
                             " tasks, prediction " + std::to_string(predicted->value.num_tasks()));
    }
    const auto report = mtsdp::eval::evaluate(gold->value.task_names, gold->value.tasks,
                                              predicted->value.tasks, include_tops != 0);
    *json_out = copy_string(report.to_json());
  });
}

mtsdp_status mtsdp_similarity(const mtsdp_corpus* corpus, char** json_out) {
  if (any_null(corpus, json_out)) return fail(MTSDP_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    const auto& c = corpus->value;
    nlohmann::json doc;
    doc["tasks"] = c.task_names;
    for (bool directed : {true, false}) {
      nlohmann::json m = nlohmann::json::array();
      for (int a = 0; a < c.num_tasks(); ++a) {
        nlohmann::json row = nlohmann::json::array();
        for (int b = 0; b < c.num_tasks(); ++b) {
          const double f = mtsdp::eval::structural_similarity(c.tasks[a], c.tasks[b], directed);
          row.push_back(std::round(f * 10.0) / 10.0);
        }
        m.push_back(row);
      }
      doc[directed ? "directed" : "undirected"] = m;
    }
    *json_out = copy_string(doc.dump(2));
  });
}

mtsdp_status mtsdp_prune_stats(const mtsdp_config* config, const mtsdp_corpus* train,
                               const mtsdp_corpus* eval, char** json_out) {
  if (any_null(config, train, json_out)) return fail(MTSDP_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    using namespace mtsdp;
    const RunConfig& c = config->value;
    const MultitaskCorpus& tr = train->value;
    const MultitaskCorpus& ev = eval ? eval->value : tr;
    if (ev.num_tasks() != tr.num_tasks()) throw DataError("corpora differ in their number of tasks");
    if (tr.num_sentences() == 0) throw ConfigError("training corpus is empty");

    LabelVocab vocab(tr.num_tasks());
    auto graphs_of = [&](const MultitaskCorpus& corpus, std::vector<Sentence>& sentences) {
      std::vector<std::vector<SemanticGraph>> graphs(corpus.num_tasks());
      for (std::size_t k = 0; k < corpus.num_sentences(); ++k) sentences.push_back(corpus.sentence(k));
      for (TaskId t = 0; t < corpus.num_tasks(); ++t) {
        for (const auto& rec : corpus.tasks[t]) graphs[t].push_back(to_graph(rec, t, vocab, true));
      }
      return graphs;
    };
    std::vector<Sentence> tr_sentences, ev_sentences;
    const auto tr_graphs = graphs_of(tr, tr_sentences);
    const auto kept_labels = prune::label_filter(vocab, tr_graphs, c.label_min_count);
    const auto ev_graphs = graphs_of(ev, ev_sentences);

    prune::PrunerModel pruner(tr.num_tasks(), c.pruner_hash_bits);
    prune::PrunerTrainOptions po;
    po.epochs = c.pruner_epochs;
    po.eta = c.pruner_eta;
    po.seed = c.seed;
    nlohmann::json doc;
    doc["threshold"] = c.prune_threshold;
    doc["tasks"] = nlohmann::json::array();
    prune::PruneStats total;
    for (TaskId t = 0; t < tr.num_tasks(); ++t) {
      const double loss = prune::train_pruner(pruner, t, tr_sentences, tr_graphs[t], po);
      const auto s = prune::prune_stats(pruner, t, ev_sentences, ev_graphs[t], c.prune_threshold);
      total += s;
      doc["tasks"].push_back({{"task", tr.task_names[t]},
                              {"train_log_loss", loss},
                              {"candidate_arcs", s.candidate_arcs},
                              {"kept_arcs", s.kept_arcs},
                              {"kept_fraction", s.kept_fraction()},
                              {"gold_arcs", s.gold_arcs},
                              {"recall", s.recall()},
                              {"labels", vocab.size(t)},
                              {"labels_kept", kept_labels[t].size()}});
    }
    doc["kept_fraction"] = total.kept_fraction();
    doc["recall"] = total.recall();
    *json_out = copy_string(doc.dump(2));
  });
}

mtsdp_status mtsdp_gradcheck(uint64_t seed, double* max_rel_error, char** json_out) {
  if (!max_rel_error) return fail(MTSDP_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    mtsdp::GradcheckOptions o;
    o.seed = seed;
    const auto r = mtsdp::gradcheck_full_loss(o);
    *max_rel_error = r.check.max_rel_error;
    if (json_out) {
      nlohmann::json doc = {{"seed", seed},
                            {"loss", r.loss},
                            {"max_rel_error", r.check.max_rel_error},
                            {"worst_param", r.check.worst_param},
                            {"worst_index", r.check.worst_index},
                            {"analytic", r.check.analytic},
                            {"numeric", r.check.numeric},
                            {"coordinates", r.check.checked}};
      *json_out = copy_string(doc.dump(2));
    }
  });
}

}  // extern "C"
