#include "mtsdp/config.hpp"

#include <json.hpp>

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "mtsdp/error.hpp"

namespace mtsdp {
namespace {

using nlohmann::json;

// Binds each JSON key to a field, so reading and writing share one table.
struct Field {
  std::function<void(RunConfig&, const json&)> read;
  std::function<json(const RunConfig&)> write;
};

template <typename T>
Field plain(T RunConfig::*member) {
  return {[member](RunConfig& c, const json& v) { c.*member = v.get<T>(); },
          [member](const RunConfig& c) { return json(c.*member); }};
}

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table = {
      {"pretrained_dim", plain(&RunConfig::pretrained_dim)},
      {"word_dim", plain(&RunConfig::word_dim)},
      {"pos_dim", plain(&RunConfig::pos_dim)},
      {"word_dropout", plain(&RunConfig::word_dropout)},
      {"lstm_layers", plain(&RunConfig::lstm_layers)},
      {"lstm_dim", plain(&RunConfig::lstm_dim)},
      {"task_lstm_dim", plain(&RunConfig::task_lstm_dim)},
      {"rep_dim", plain(&RunConfig::rep_dim)},
      {"mlp_layers", plain(&RunConfig::mlp_layers)},
      {"mlp_hidden_dim", plain(&RunConfig::mlp_hidden_dim)},
      {"rank", plain(&RunConfig::rank)},
      {"variant",
       {[](RunConfig& c, const json& v) { c.variant = parse_variant(v.get<std::string>()); },
        [](const RunConfig& c) { return json(to_string(c.variant)); }}},
      {"epochs", plain(&RunConfig::epochs)},
      {"eta0", plain(&RunConfig::eta0)},
      {"anneal_rate", plain(&RunConfig::anneal_rate)},
      {"anneal_every", plain(&RunConfig::anneal_every)},
      {"beta1", plain(&RunConfig::beta1)},
      {"beta2", plain(&RunConfig::beta2)},
      {"adam_eps", plain(&RunConfig::adam_eps)},
      {"l2", plain(&RunConfig::l2)},
      {"clip_norm", plain(&RunConfig::clip_norm)},
      {"patience", plain(&RunConfig::patience)},
      {"fp_cost", plain(&RunConfig::fp_cost)},
      {"fn_cost", plain(&RunConfig::fn_cost)},
      {"train_decoder",
       {[](RunConfig& c, const json& v) {
          const auto s = v.get<std::string>();
          if (s == "ad3") c.train_decoder = TrainDecoder::Ad3;
          else if (s == "exact") c.train_decoder = TrainDecoder::Exact;
          else throw ConfigError("train_decoder must be \"ad3\" or \"exact\", got \"" + s + "\"");
        },
        [](const RunConfig& c) {
          return json(c.train_decoder == TrainDecoder::Ad3 ? "ad3" : "exact");
        }}},
      {"ad3_max_iter", plain(&RunConfig::ad3_max_iter)},
      {"ad3_rho", plain(&RunConfig::ad3_rho)},
      {"ad3_tol", plain(&RunConfig::ad3_tol)},
      {"ad3_max_nodes", plain(&RunConfig::ad3_max_nodes)},
      {"use_pruner", plain(&RunConfig::use_pruner)},
      {"prune_threshold", plain(&RunConfig::prune_threshold)},
      {"label_min_count", plain(&RunConfig::label_min_count)},
      {"pruner_epochs", plain(&RunConfig::pruner_epochs)},
      {"pruner_eta", plain(&RunConfig::pruner_eta)},
      {"pruner_hash_bits", plain(&RunConfig::pruner_hash_bits)},
      {"seed", plain(&RunConfig::seed)},
  };
  return table;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace

const char* to_string(Variant v) {
  switch (v) {
    case Variant::Basic: return "BASIC";
    case Variant::Shared1: return "SHARED1";
    case Variant::Freda1: return "FREDA1";
    case Variant::Shared3: return "SHARED3";
    case Variant::Freda3: return "FREDA3";
  }
  return "?";
}

Variant parse_variant(const std::string& name) {
  for (auto v : {Variant::Basic, Variant::Shared1, Variant::Freda1, Variant::Shared3,
                 Variant::Freda3}) {
    if (name == to_string(v)) return v;
  }
  throw ConfigError("unknown variant '" + name +
                    "' (expected BASIC, SHARED1, FREDA1, SHARED3 or FREDA3)");
}

void check(const RunConfig& c) {
  require(c.pretrained_dim >= 0 && c.word_dim >= 0 && c.pos_dim >= 0,
          "embedding dimensions must be non-negative");
  require(c.pretrained_dim + c.word_dim + c.pos_dim > 0, "token embedding is empty");
  require(c.word_dropout >= 0, "word_dropout must be >= 0");
  require(c.lstm_layers > 0, "lstm_layers must be > 0");
  require(c.lstm_dim > 0 && c.lstm_dim % 2 == 0, "lstm_dim must be a positive even number");
  require(c.task_lstm_dim == -1 || (c.task_lstm_dim >= 0 && c.task_lstm_dim % 2 == 0),
          "task_lstm_dim must be -1 or a non-negative even number");
  require(c.rep_dim > 0, "rep_dim must be > 0");
  require(c.mlp_layers > 0, "mlp_layers must be > 0");
  require(c.mlp_hidden_dim == -1 || c.mlp_hidden_dim > 0, "mlp_hidden_dim must be > 0");
  require(c.rank > 0, "rank must be > 0");
  require(c.epochs >= 0, "epochs must be >= 0");
  require(c.eta0 > 0, "eta0 must be > 0");
  require(c.anneal_rate > 0 && c.anneal_rate <= 1, "anneal_rate must be in (0,1]");
  require(c.anneal_every > 0, "anneal_every must be > 0");
  require(c.beta1 >= 0 && c.beta1 < 1 && c.beta2 >= 0 && c.beta2 < 1, "Adam betas must be in [0,1)");
  require(c.adam_eps > 0, "adam_eps must be > 0");
  require(c.l2 >= 0, "l2 must be >= 0");
  require(c.clip_norm > 0, "clip_norm must be > 0");
  require(c.patience > 0, "patience must be > 0");
  require(c.fp_cost >= 0 && c.fn_cost >= 0, "costs must be >= 0");
  require(c.ad3_max_iter > 0, "ad3_max_iter must be > 0");
  require(c.ad3_rho > 0, "ad3_rho must be > 0");
  require(c.ad3_tol > 0 && c.ad3_tol < 1, "ad3_tol must be in (0,1)");
  require(c.ad3_max_nodes > 0, "ad3_max_nodes must be > 0");
  require(c.prune_threshold > 0 && c.prune_threshold < 1, "prune_threshold must be in (0,1)");
  require(c.label_min_count >= 0, "label_min_count must be >= 0");
  require(c.pruner_epochs >= 0, "pruner_epochs must be >= 0");
  require(c.pruner_eta > 0, "pruner_eta must be > 0");
  require(c.pruner_hash_bits >= 4 && c.pruner_hash_bits <= 28, "pruner_hash_bits must be in [4,28]");
  require(c.variant != Variant::Basic || c.effective_task_lstm_dim() > 0,
          "BASIC needs task_lstm_dim > 0");
}

RunConfig load_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig config;
  const auto& table = fields();
  for (const auto& [key, value] : doc.items()) {
    auto it = table.find(key);
    if (it == table.end()) throw ConfigError("unknown config key '" + key + "'");
    try {
      it->second.read(config, value);
    } catch (const json::exception& e) {
      throw ConfigError("bad value for '" + key + "': " + e.what());
    }
  }
  check(config);
  return config;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return load_config(buf.str());
}

std::string to_json(const RunConfig& config) {
  json doc = json::object();
  for (const auto& [key, field] : fields()) doc[key] = field.write(config);
  return doc.dump();
}

}  // namespace mtsdp
