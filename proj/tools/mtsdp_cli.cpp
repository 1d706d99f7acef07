// Command-line front end. Talks to the parser only through the C API.
//
// Exit codes: 0 success, 1 bad flags or configuration, 2 data errors,
// 3 gradient check failure, 4 internal errors.

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "mtsdp/mtsdp.h"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitGradcheck = 3;
constexpr int kExitInternal = 4;

struct Failure {
  int code;
};

void check(mtsdp_status s) {
  if (s == MTSDP_OK) return;
  std::cerr << "mtsdp: " << mtsdp_last_error() << '\n';
  switch (s) {
    case MTSDP_ERR_DATA:
      throw Failure{kExitData};
    case MTSDP_ERR_ARGUMENT:
    case MTSDP_ERR_CONFIG:
      throw Failure{kExitUsage};
    default:
      throw Failure{kExitInternal};
  }
}

template <class T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using Config = std::unique_ptr<mtsdp_config, Deleter<mtsdp_config, mtsdp_config_free>>;
using Corpus = std::unique_ptr<mtsdp_corpus, Deleter<mtsdp_corpus, mtsdp_corpus_free>>;
using Model = std::unique_ptr<mtsdp_model, Deleter<mtsdp_model, mtsdp_model_free>>;
using Embeddings = std::unique_ptr<mtsdp_embeddings, Deleter<mtsdp_embeddings, mtsdp_embeddings_free>>;

std::string take(char* s) {
  std::string out(s);
  mtsdp_string_free(s);
  return out;
}

Corpus read(const std::vector<std::string>& paths) {
  std::vector<const char*> p;
  for (const auto& s : paths) p.push_back(s.c_str());
  mtsdp_corpus* c = nullptr;
  check(mtsdp_corpus_read(p.data(), p.size(), &c));
  return Corpus(c);
}

// Shared training and pruning flags layered over an optional config file.
struct ConfigFlags {
  std::string path;
  std::string variant;
  long long seed = -1;
  int epochs = -1;
  std::vector<std::string> set;

  void add_to(CLI::App* app) {
    app->add_option("--config", path, "JSON run configuration")->check(CLI::ExistingFile);
    app->add_option("--variant", variant, "BASIC, SHARED1, FREDA1, SHARED3 or FREDA3");
    app->add_option("--seed", seed, "run seed")->check(CLI::NonNegativeNumber);
    app->add_option("--epochs", epochs, "maximum training epochs")->check(CLI::NonNegativeNumber);
    app->add_option("--set", set, "override a config key, as key=json (repeatable)");
  }

  Config build() const {
    mtsdp_config* c = nullptr;
    check(path.empty() ? mtsdp_config_new(&c) : mtsdp_config_load(path.c_str(), &c));
    Config config(c);
    if (!variant.empty()) check(mtsdp_config_set(c, "variant", ("\"" + variant + "\"").c_str()));
    if (seed >= 0) check(mtsdp_config_set(c, "seed", std::to_string(seed).c_str()));
    if (epochs >= 0) check(mtsdp_config_set(c, "epochs", std::to_string(epochs).c_str()));
    for (const auto& kv : set) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos || eq == 0) {
        std::cerr << "mtsdp: --set expects key=value, got '" << kv << "'\n";
        throw Failure{kExitUsage};
      }
      check(mtsdp_config_set(c, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()));
    }
    return config;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multitask semantic dependency parser"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand
  app.set_version_flag("--version", std::string(mtsdp_version()));
  std::string log_level;
  int threads = 1;
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off (env MTSDP_LOG_LEVEL)")
      ->envname("MTSDP_LOG_LEVEL");
  app.add_option("--threads", threads, "decoding threads")->check(CLI::PositiveNumber);

  // train
  auto* train = app.add_subcommand("train", "train a model");
  ConfigFlags train_cfg;
  std::vector<std::string> train_files, dev_files;
  std::string model_path, log_path, embeddings_path;
  bool zero_init = false;
  train_cfg.add_to(train);
  train->add_option("--train", train_files, "training corpus, one file per task")
      ->required()->check(CLI::ExistingFile);
  train->add_option("--dev", dev_files, "dev corpus, one file per task")->check(CLI::ExistingFile);
  train->add_option("--embeddings", embeddings_path, "pretrained word vectors")->check(CLI::ExistingFile);
  train->add_option("--model", model_path, "checkpoint to write")->required();
  train->add_option("--log", log_path, "JSON lines training log");
  train->add_flag("--zero-init", zero_init, "zero all parameters after training (pipeline tests)");

  // parse
  auto* parse = app.add_subcommand("parse", "parse sentences with a trained model");
  std::string parse_model, parse_input;
  std::vector<std::string> parse_outputs;
  parse->add_option("--model", parse_model, "checkpoint")->required()->check(CLI::ExistingFile);
  parse->add_option("--input", parse_input, "SDP file; only its token columns are used")
      ->required()->check(CLI::ExistingFile);
  parse->add_option("--output", parse_outputs, "one output file per model task")->required();

  // eval
  auto* eval = app.add_subcommand("eval", "score predicted graphs against gold graphs");
  std::vector<std::string> gold_files, pred_files;
  bool include_tops = false;
  eval->add_option("--gold", gold_files, "gold corpus, one file per task")->required()->check(CLI::ExistingFile);
  eval->add_option("--pred", pred_files, "predictions, same task order")->required()->check(CLI::ExistingFile);
  eval->add_flag("--include-tops", include_tops, "score top nodes as arcs from a virtual root");

  // similarity
  auto* similarity = app.add_subcommand("similarity", "pairwise structural similarity of parallel corpora");
  std::vector<std::string> sim_files;
  similarity->add_option("--corpus", sim_files, "one file per formalism")->required()->check(CLI::ExistingFile);

  // gradcheck
  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference check of the training loss");
  unsigned long long gc_seed = 7;
  gradcheck->add_option("--seed", gc_seed, "seed of the random model");

  // prune-stats
  auto* prune = app.add_subcommand("prune-stats", "train the arc pruner and report kept arcs and recall");
  ConfigFlags prune_cfg;
  std::vector<std::string> prune_train, prune_eval;
  prune_cfg.add_to(prune);
  prune->add_option("--train", prune_train, "training corpus, one file per task")
      ->required()->check(CLI::ExistingFile);
  prune->add_option("--eval", prune_eval, "corpus to measure on (default: training corpus)")
      ->check(CLI::ExistingFile);

  // synth
  auto* synth = app.add_subcommand("synth", "write a rule-generated parallel corpus");
  int synth_sentences = 50;
  unsigned long long synth_seed = 1;
  std::vector<std::string> synth_outputs;
  synth->add_option("--sentences", synth_sentences, "number of sentences")->check(CLI::PositiveNumber);
  synth->add_option("--seed", synth_seed, "generator seed");
  synth->add_option("--output", synth_outputs, "one file per task, 1 to 3")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (!log_level.empty()) check(mtsdp_set_log_level(log_level.c_str()));

    if (*train) {
      auto config = train_cfg.build();
      auto corpus = read(train_files);
      Corpus dev = dev_files.empty() ? Corpus() : read(dev_files);
      Embeddings emb;
      if (!embeddings_path.empty()) {
        char* dim = nullptr;
        check(mtsdp_config_get(config.get(), "pretrained_dim", &dim));
        mtsdp_embeddings* e = nullptr;
        check(mtsdp_embeddings_load(embeddings_path.c_str(), std::stoi(take(dim)), &e));
        emb.reset(e);
      }
      mtsdp_model* m = nullptr;
      check(mtsdp_train(config.get(), corpus.get(), dev.get(), emb.get(),
                        log_path.empty() ? nullptr : log_path.c_str(), threads, &m));
      Model model(m);
      if (zero_init) check(mtsdp_model_zero(m));
      check(mtsdp_model_save(m, model_path.c_str()));
      std::cout << "wrote " << model_path << " (" << mtsdp_model_num_parameters(m) << " parameters)\n";
    } else if (*parse) {
      mtsdp_model* m = nullptr;
      check(mtsdp_model_load(parse_model.c_str(), &m));
      Model model(m);
      if (parse_outputs.size() != mtsdp_model_num_tasks(m)) {
        std::cerr << "mtsdp: the model has " << mtsdp_model_num_tasks(m) << " tasks but "
                  << parse_outputs.size() << " output files were given\n";
        return kExitUsage;
      }
      auto input = read({parse_input});
      mtsdp_corpus* out = nullptr;
      check(mtsdp_parse(m, input.get(), threads, &out));
      Corpus parsed(out);
      for (size_t t = 0; t < parse_outputs.size(); ++t) {
        check(mtsdp_corpus_write(out, t, parse_outputs[t].c_str()));
      }
    } else if (*eval) {
      if (gold_files.size() != pred_files.size()) {
        std::cerr << "mtsdp: --gold and --pred need the same number of files\n";
        return kExitUsage;
      }
      auto gold = read(gold_files);
      auto pred = read(pred_files);
      char* json = nullptr;
      check(mtsdp_evaluate(gold.get(), pred.get(), include_tops ? 1 : 0, &json));
      std::cout << take(json) << '\n';
    } else if (*similarity) {
      auto corpus = read(sim_files);
      char* json = nullptr;
      check(mtsdp_similarity(corpus.get(), &json));
      std::cout << take(json) << '\n';
    } else if (*gradcheck) {
      double err = 0.0;
      char* json = nullptr;
      check(mtsdp_gradcheck(gc_seed, &err, &json));
      std::cout << take(json) << '\n';
      if (!(err < 1e-4)) {
        std::cerr << "mtsdp: gradient check failed, max relative error " << err << '\n';
        return kExitGradcheck;
      }
    } else if (*prune) {
      auto config = prune_cfg.build();
      auto tr = read(prune_train);
      Corpus ev = prune_eval.empty() ? Corpus() : read(prune_eval);
      char* json = nullptr;
      check(mtsdp_prune_stats(config.get(), tr.get(), ev.get(), &json));
      std::cout << take(json) << '\n';
    } else if (*synth) {
      mtsdp_corpus* c = nullptr;
      check(mtsdp_corpus_synthetic(static_cast<int>(synth_outputs.size()), synth_sentences, synth_seed, &c));
      Corpus corpus(c);
      for (size_t t = 0; t < synth_outputs.size(); ++t) {
        check(mtsdp_corpus_write(c, t, synth_outputs[t].c_str()));
      }
    }
  } catch (const Failure& f) {
    return f.code;
  }
  return 0;
}
