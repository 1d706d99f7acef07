#include "mtsdp/sdp_io.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace mtsdp {
namespace {

constexpr const char* kHeader = "#SDP 2015";
constexpr int kFixedColumns = 7;

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> cols;
  std::size_t start = 0;
  while (true) {
    auto tab = line.find('\t', start);
    cols.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return cols;
}

bool parse_flag(const std::string& cell, int line) {
  if (cell == "+") return true;
  if (cell == "-") return false;
  throw DataError("expected '+' or '-', got '" + cell + "'", line);
}

struct RawRow {
  std::vector<std::string> cols;
  int line;
};

CorpusRecord build_record(const std::string& id, const std::vector<RawRow>& rows) {
  CorpusRecord rec;
  rec.sentence.id = id;
  const std::size_t width = rows.front().cols.size();
  if (width < kFixedColumns) {
    throw DataError("expected at least " + std::to_string(kFixedColumns) + " columns, got " +
                        std::to_string(width),
                    rows.front().line);
  }
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.cols.size() != width) {
      throw DataError("ragged row: " + std::to_string(row.cols.size()) + " columns, expected " +
                          std::to_string(width),
                      row.line);
    }
    int index = 0;
    const auto& id_cell = row.cols[0];
    auto [ptr, ec] = std::from_chars(id_cell.data(), id_cell.data() + id_cell.size(), index);
    if (ec != std::errc() || ptr != id_cell.data() + id_cell.size()) {
      throw DataError("bad token id '" + id_cell + "'", row.line);
    }
    if (index != static_cast<int>(r) + 1) {
      throw DataError(index <= static_cast<int>(r) ? "duplicate token id " + id_cell
                                                   : "non-contiguous token id " + id_cell,
                      row.line);
    }
    if (row.cols[1].empty()) throw DataError("empty word form", row.line);
    rec.sentence.tokens.push_back({index, row.cols[1], row.cols[2], row.cols[3]});
    if (parse_flag(row.cols[4], row.line)) rec.tops.push_back(index);
    if (parse_flag(row.cols[5], row.line)) rec.pred_column.push_back(index);
    rec.frames.push_back(row.cols[6]);
  }
  const std::size_t num_args = width - kFixedColumns;
  if (num_args != rec.pred_column.size()) {
    throw DataError(std::to_string(rec.pred_column.size()) + " predicates but " +
                        std::to_string(num_args) + " argument columns",
                    rows.front().line);
  }
  for (const auto& row : rows) {
    const int modifier = std::stoi(row.cols[0]);
    for (std::size_t k = 0; k < num_args; ++k) {
      const auto& cell = row.cols[kFixedColumns + k];
      if (cell == "_") continue;
      if (cell.empty()) throw DataError("empty argument cell", row.line);
      rec.arcs.push_back({rec.pred_column[k], modifier, cell});
    }
  }
  std::sort(rec.arcs.begin(), rec.arcs.end());
  return rec;
}

bool record_has_cycle(const CorpusRecord& rec) {
  SemanticGraph g;
  g.num_tokens = rec.sentence.size();
  for (const auto& a : rec.arcs) g.arcs.push_back({a.head, a.modifier, 0});
  return has_cycle(g);
}

}  // namespace

std::vector<int> CorpusRecord::predicates() const {
  std::vector<int> out;
  for (const auto& a : arcs) {
    if (out.empty() || out.back() != a.head) out.push_back(a.head);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<CorpusRecord> read_corpus(std::istream& in, const ReadOptions& options) {
  std::vector<CorpusRecord> out;
  std::string line;
  int line_no = 0;
  std::string id;
  int id_line = 0;
  std::vector<RawRow> rows;

  auto flush = [&]() {
    if (rows.empty()) {
      if (!id.empty()) throw DataError("sentence header without tokens", id_line);
      return;
    }
    auto rec = build_record(id, rows);
    if (options.reject_cycles && record_has_cycle(rec)) {
      spdlog::warn("skipping sentence {}: gold graph has a cycle", rec.sentence.id);
    } else {
      out.push_back(std::move(rec));
    }
    rows.clear();
    id.clear();
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush();
      continue;
    }
    if (line[0] == '#') {
      if (line_no == 1 && line == kHeader) continue;
      if (!rows.empty()) throw DataError("comment line inside a sentence", line_no);
      id = line.substr(1);
      id_line = line_no;
      continue;
    }
    rows.push_back({split_tabs(line), line_no});
  }
  flush();
  return out;
}

std::vector<CorpusRecord> read_corpus_file(const std::string& path, const ReadOptions& options) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus file " + path);
  try {
    return read_corpus(in, options);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

void write_corpus(std::ostream& out, std::span<const CorpusRecord> records) {
  out << kHeader << '\n';
  for (const auto& rec : records) {
    const int n = rec.sentence.size();
    const auto& preds = rec.pred_column;
    // cell[modifier][predicate column]
    std::vector<std::vector<const std::string*>> cells(
        n + 1, std::vector<const std::string*>(preds.size(), nullptr));
    for (const auto& arc : rec.arcs) {
      if (arc.label.find('\t') != std::string::npos || arc.label.find('\n') != std::string::npos) {
        throw DataError("label contains a tab or newline: '" + arc.label + "'");
      }
      auto col = std::find(preds.begin(), preds.end(), arc.head);
      if (col == preds.end()) {
        throw DataError("arc head " + std::to_string(arc.head) + " is not marked as a predicate");
      }
      cells.at(arc.modifier)[col - preds.begin()] = &arc.label;
    }
    out << '#' << rec.sentence.id << '\n';
    for (const auto& tok : rec.sentence.tokens) {
      const int i = tok.index;
      const bool top = std::find(rec.tops.begin(), rec.tops.end(), i) != rec.tops.end();
      const bool pred = std::find(preds.begin(), preds.end(), i) != preds.end();
      const std::string& frame =
          rec.frames.size() == static_cast<std::size_t>(n) ? rec.frames[i - 1] : std::string("_");
      out << i << '\t' << tok.form << '\t' << tok.lemma << '\t' << tok.pos << '\t'
          << (top ? '+' : '-') << '\t' << (pred ? '+' : '-') << '\t' << frame;
      for (const auto* cell : cells[i]) out << '\t' << (cell ? *cell : std::string("_"));
      out << '\n';
    }
    out << '\n';
  }
}

void write_corpus_file(const std::string& path, std::span<const CorpusRecord> records) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write corpus file " + path);
  write_corpus(out, records);
}

SemanticGraph to_graph(const CorpusRecord& record, TaskId task, LabelVocab& vocab, bool grow) {
  std::vector<LabeledArc> arcs;
  for (const auto& a : record.arcs) {
    if (grow) {
      arcs.push_back({a.head, a.modifier, vocab.add(task, a.label)});
    } else if (auto id = vocab.find(task, a.label)) {
      arcs.push_back({a.head, a.modifier, *id});
    }
  }
  return SemanticGraph::from_arcs(task, record.sentence.size(), std::move(arcs));
}

CorpusRecord to_record(const Sentence& sentence, const SemanticGraph& graph,
                       const LabelVocab& vocab, const CorpusRecord* like) {
  CorpusRecord rec;
  rec.sentence = sentence;
  for (const auto& arc : graph.arcs) {
    rec.arcs.push_back({arc.head, arc.modifier, vocab.name(graph.task, arc.label)});
  }
  std::sort(rec.arcs.begin(), rec.arcs.end());
  rec.pred_column = rec.predicates();
  if (like) {
    rec.tops = like->tops;
    rec.frames = like->frames;
  } else {
    rec.frames.assign(sentence.size(), "_");
  }
  return rec;
}

std::span<const double> EmbeddingTable::lookup(const std::string& word) const {
  auto it = index_.find(word);
  if (it == index_.end()) return unk_;
  return {data_.data() + it->second * dimension_, static_cast<std::size_t>(dimension_)};
}

void EmbeddingTable::add(const std::string& word, std::span<const double> vector) {
  if (static_cast<int>(vector.size()) != dimension_) {
    throw DataError("embedding for '" + word + "' has dimension " +
                    std::to_string(vector.size()) + ", expected " + std::to_string(dimension_));
  }
  auto [it, inserted] = index_.emplace(word, index_.size());
  if (inserted) {
    data_.insert(data_.end(), vector.begin(), vector.end());
  } else {
    std::copy(vector.begin(), vector.end(), data_.begin() + it->second * dimension_);
  }
}

EmbeddingTable load_embeddings(std::istream& in, int expected_dim) {
  if (expected_dim <= 0) throw ConfigError("embedding dimension must be positive");
  EmbeddingTable table(expected_dim);
  std::string line;
  int line_no = 0;
  std::vector<double> vec;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string word;
    fields >> word;
    vec.clear();
    std::string tok;
    while (fields >> tok) {
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec != std::errc() || ptr != tok.data() + tok.size()) {
        throw DataError("malformed number '" + tok + "'", line_no);
      }
      vec.push_back(v);
    }
    if (static_cast<int>(vec.size()) != expected_dim) {
      throw DataError("dimension mismatch: " + std::to_string(vec.size()) + " values, expected " +
                          std::to_string(expected_dim),
                      line_no);
    }
    table.add(word, vec);
  }
  return table;
}

EmbeddingTable load_embeddings_file(const std::string& path, int expected_dim) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open embeddings file " + path);
  return load_embeddings(in, expected_dim);
}

void check_parallel(const MultitaskCorpus& corpus) {
  for (int t = 1; t < corpus.num_tasks(); ++t) {
    const auto& a = corpus.tasks[0];
    const auto& b = corpus.tasks[t];
    if (a.size() != b.size()) {
      throw DataError("parallel corpora differ in sentence count (" + std::to_string(a.size()) +
                      " vs " + std::to_string(b.size()) + ")");
    }
    for (std::size_t k = 0; k < a.size(); ++k) {
      const auto& x = a[k].sentence.tokens;
      const auto& y = b[k].sentence.tokens;
      bool same = x.size() == y.size();
      for (std::size_t i = 0; same && i < x.size(); ++i) same = x[i].form == y[i].form;
      if (!same) {
        throw DataError("sentence " + a[k].sentence.id + " has different tokens in task " +
                        corpus.task_names[t]);
      }
    }
  }
}

MultitaskCorpus read_parallel_corpora(std::span<const std::string> paths,
                                      const ReadOptions& options) {
  MultitaskCorpus corpus;
  ReadOptions raw = options;
  raw.reject_cycles = false;
  for (const auto& path : paths) {
    auto slash = path.find_last_of('/');
    std::string name = path.substr(slash == std::string::npos ? 0 : slash + 1);
    if (auto dot = name.find('.'); dot != std::string::npos && dot > 0) name.resize(dot);
    corpus.task_names.push_back(name);
    corpus.tasks.push_back(read_corpus_file(path, raw));
  }
  check_parallel(corpus);
  if (options.reject_cycles && !corpus.tasks.empty()) {
    std::vector<std::vector<CorpusRecord>> kept(corpus.tasks.size());
    for (std::size_t k = 0; k < corpus.num_sentences(); ++k) {
      bool cyclic = false;
      for (const auto& task : corpus.tasks) cyclic = cyclic || record_has_cycle(task[k]);
      if (cyclic) {
        spdlog::warn("skipping sentence {}: gold graph has a cycle", corpus.sentence(k).id);
        continue;
      }
      for (std::size_t t = 0; t < corpus.tasks.size(); ++t) {
        kept[t].push_back(std::move(corpus.tasks[t][k]));
      }
    }
    corpus.tasks = std::move(kept);
  }
  return corpus;
}

}  // namespace mtsdp
