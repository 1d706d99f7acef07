#include "mtsdp/model/model.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "mtsdp/error.hpp"

namespace mtsdp::model {

StringVocab::StringVocab() {
  names_.push_back("<unk>");
  counts_.push_back(0);
}

int StringVocab::add(const std::string& s, long long count) {
  auto [it, inserted] = ids_.emplace(s, size());
  if (inserted) {
    names_.push_back(s);
    counts_.push_back(0);
  }
  counts_[it->second] += count;
  return it->second;
}

int StringVocab::id(const std::string& s) const {
  auto it = ids_.find(s);
  return it == ids_.end() ? 0 : it->second;
}

std::vector<std::string> encoder_names(const RunConfig& config, int num_tasks) {
  std::vector<std::string> names;
  if (uses_task_encoders(config.variant) && config.effective_task_lstm_dim() > 0) {
    for (int t = 0; t < num_tasks; ++t) names.push_back("task" + std::to_string(t));
  }
  if (uses_shared_encoder(config.variant)) names.push_back("shared");
  return names;
}

namespace {

void glorot_rows(ad::Param& p, ad::Rng& rng) {
  for (int r = 0; r < p.rows(); ++r) ad::glorot_fill_block(p, r, 1, 0, p.cols(), rng);
}

void create_encoder(Model& m, const std::string& name, int dim, const EmbeddingTable* pretrained,
                    ad::Rng& rng) {
  const RunConfig& c = m.config;
  const std::string pre = "enc." + name + ".";
  if (c.pretrained_dim > 0) {
    auto& e = m.params.add(pre + "emb.pre", m.words.size(), c.pretrained_dim);
    for (int w = 1; w < m.words.size(); ++w) {
      if (pretrained && pretrained->contains(m.words.name(w))) {
        const auto v = pretrained->lookup(m.words.name(w));
        std::copy(v.begin(), v.end(), e.row(w).begin());
      } else {
        ad::glorot_fill_block(e, w, 1, 0, e.cols(), rng);
      }
    }
  }
  if (c.word_dim > 0) glorot_rows(m.params.add(pre + "emb.word", m.words.size(), c.word_dim), rng);
  if (c.pos_dim > 0) glorot_rows(m.params.add(pre + "emb.pos", m.pos.size(), c.pos_dim), rng);

  const int h = dim / 2;
  int in = c.pretrained_dim + c.word_dim + c.pos_dim;
  for (int l = 0; l < c.lstm_layers; ++l) {
    for (const char* dir : {"f", "b"}) {
      const std::string cell = pre + "l" + std::to_string(l) + "." + dir + ".";
      auto& W = m.params.add(cell + "W", 4 * h, in + h);
      for (int g = 0; g < 4; ++g) ad::glorot_fill_block(W, g * h, h, 0, in + h, rng);
      auto& b = m.params.add(cell + "b", 1, 4 * h);
      for (int k = h; k < 2 * h; ++k) b.at(0, k) = 1.0;  // forget gate
    }
    in = dim;
  }
}

void create_mlp(Model& m, const std::string& prefix, int in, ad::Rng& rng) {
  const RunConfig& c = m.config;
  for (int k = 0; k < c.mlp_layers; ++k) {
    const int out = k + 1 == c.mlp_layers ? c.rep_dim : c.effective_mlp_hidden_dim();
    glorot_fill(m.params.add(prefix + ".l" + std::to_string(k) + ".W", out, in), rng);
    m.params.add(prefix + ".l" + std::to_string(k) + ".b", 1, out);
    in = out;
  }
}

}  // namespace

void create_params(Model& m, const EmbeddingTable* pretrained, ad::Rng& rng) {
  const RunConfig& c = m.config;
  check(c);
  if (m.params.size() != 0) throw LogicError("model parameters already created");
  if (m.labels.num_tasks() != m.num_tasks()) throw LogicError("label inventory does not match tasks");
  if (pretrained && pretrained->dimension() != c.pretrained_dim) {
    throw ConfigError("pretrained vectors have dimension " + std::to_string(pretrained->dimension()) +
                      ", config expects " + std::to_string(c.pretrained_dim));
  }
  const int nt = m.num_tasks();
  const bool task_enc = uses_task_encoders(c.variant) && c.effective_task_lstm_dim() > 0;
  for (const auto& name : encoder_names(c, nt)) {
    create_encoder(m, name, name == "shared" ? c.lstm_dim : c.effective_task_lstm_dim(), pretrained,
                   rng);
  }
  const int token_dim = (task_enc ? c.effective_task_lstm_dim() : 0) +
                        (uses_shared_encoder(c.variant) ? c.lstm_dim : 0);
  for (TaskId t = 0; t < nt; ++t) {
    const std::string pre = "t" + std::to_string(t) + ".";
    create_mlp(m, pre + "mlp.pred", token_dim, rng);
    create_mlp(m, pre + "mlp.ua", 2 * token_dim, rng);
    create_mlp(m, pre + "mlp.la", 2 * token_dim, rng);
    glorot_rows(m.params.add(pre + "psi.pred", 1, c.rep_dim), rng);
    glorot_rows(m.params.add(pre + "psi.ua", 1, c.rep_dim), rng);
    glorot_rows(m.params.add(pre + "psi.la", std::max(1, m.labels.size(t)), c.rep_dim), rng);
    if (uses_cross_task(c.variant)) {
      for (const char* name : {"U_la", "V_la", "U_ua", "V_ua"}) {
        glorot_fill(m.params.add(pre + "cross." + name, c.rank, c.rep_dim), rng);
      }
    }
  }
}

void build_inventories(Model& m, std::span<const Sentence> sentences,
                       std::span<const std::vector<SemanticGraph>> graphs) {
  const int nt = m.num_tasks();
  if (static_cast<int>(graphs.size()) != nt) throw LogicError("one graph list per task expected");
  for (const auto& s : sentences) {
    for (const auto& tok : s.tokens) {
      m.words.add(tok.form);
      m.pos.add(tok.pos);
    }
  }
  for (TaskId t = 0; t < nt; ++t) {
    if (graphs[t].size() != sentences.size()) throw LogicError("graph list does not match sentences");
    compute_determinism(m.labels, t, graphs[t]);
  }
  m.candidate_labels = prune::label_filter(m.labels, graphs, m.config.label_min_count);
}

// Strings are written last on their line so that they may contain spaces.
void save_model(std::ostream& out, const Model& m) {
  out.precision(17);
  out << "mtsdp-model 1\n";
  out << "config " << to_json(m.config) << '\n';
  out << "tasks " << m.num_tasks() << '\n';
  for (const auto& name : m.task_names) out << name << '\n';
  for (TaskId t = 0; t < m.num_tasks(); ++t) {
    out << "labels " << m.labels.size(t) << '\n';
    for (LabelId l = 0; l < m.labels.size(t); ++l) {
      out << (m.labels.is_deterministic(t, l) ? 1 : 0) << ' ' << m.labels.name(t, l) << '\n';
    }
    out << "candidates " << m.candidate_labels.at(t).size();
    for (LabelId l : m.candidate_labels[t]) out << ' ' << l;
    out << '\n';
  }
  for (const auto* vocab : {&m.words, &m.pos}) {
    out << "vocab " << vocab->size() - 1 << '\n';
    for (int k = 1; k < vocab->size(); ++k) out << vocab->count(k) << ' ' << vocab->name(k) << '\n';
  }
  m.pruner.save(out);
  ad::save_params(out, m.params);
}

void save_model_file(const std::string& path, const Model& model) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write model file " + path);
  save_model(out, model);
  if (!out) throw DataError("error while writing model file " + path);
}

namespace {

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  std::string next() {
    std::string line;
    if (!std::getline(in_, line)) throw DataError("checkpoint truncated", line_ + 1);
    ++line_;
    return line;
  }

  // "<keyword> <integer>"
  long long header(const std::string& keyword) {
    std::istringstream ss(next());
    std::string word;
    long long n = -1;
    if (!(ss >> word >> n) || word != keyword || n < 0) {
      throw DataError("expected '" + keyword + " <count>'", line_);
    }
    return n;
  }

  // "<integer> <rest of line>"
  std::pair<long long, std::string> counted() {
    const std::string line = next();
    const auto sp = line.find(' ');
    if (sp == std::string::npos) throw DataError("expected '<number> <string>'", line_);
    try {
      return {std::stoll(line.substr(0, sp)), line.substr(sp + 1)};
    } catch (const std::exception&) {
      throw DataError("expected '<number> <string>'", line_);
    }
  }

  int line() const { return line_; }

 private:
  std::istream& in_;
  int line_ = 0;
};

}  // namespace

Model load_model(std::istream& in) {
  LineReader r(in);
  if (r.next() != "mtsdp-model 1") throw DataError("not an mtsdp model file (bad header)", 1);
  Model m;
  {
    const std::string line = r.next();
    if (line.rfind("config ", 0) != 0) throw DataError("expected config line", r.line());
    m.config = load_config(line.substr(7));
  }
  const auto nt = r.header("tasks");
  for (long long t = 0; t < nt; ++t) m.task_names.push_back(r.next());
  m.labels.resize(static_cast<int>(nt));
  m.candidate_labels.resize(nt);
  for (TaskId t = 0; t < nt; ++t) {
    const auto nl = r.header("labels");
    for (long long k = 0; k < nl; ++k) {
      auto [det, name] = r.counted();
      const LabelId l = m.labels.add(t, name);
      m.labels.set_deterministic(t, l, det != 0);
    }
    std::istringstream ss(r.next());
    std::string word;
    std::size_t count = 0;
    if (!(ss >> word >> count) || word != "candidates") throw DataError("expected candidates", r.line());
    for (std::size_t k = 0; k < count; ++k) {
      LabelId l = -1;
      if (!(ss >> l) || !m.labels.contains(t, l)) throw DataError("bad candidate label", r.line());
      m.candidate_labels[t].push_back(l);
    }
  }
  for (auto* vocab : {&m.words, &m.pos}) {
    const auto n = r.header("vocab");
    for (long long k = 0; k < n; ++k) {
      auto [count, name] = r.counted();
      vocab->add(name, count);
    }
  }
  m.pruner = prune::PrunerModel::load(in);
  ad::Rng rng(0);
  create_params(m, nullptr, rng);
  ad::load_params(in, m.params);
  return m;
}

Model load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model file " + path);
  return load_model(in);
}

}  // namespace mtsdp::model
