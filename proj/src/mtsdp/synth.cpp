#include "mtsdp/synth.hpp"

#include <algorithm>
#include <random>

#include "mtsdp/error.hpp"
#include "mtsdp/eval/eval.hpp"

namespace mtsdp::synth {
namespace {

using Arc = CorpusRecord::Arc;

std::vector<Arc> task_arcs(int task, const std::vector<char>& pos) {
  static const char* const kLabels[3][5] = {
      {"ARG1", "ARG2", "MOD", "BV", "OBJ"},
      {"verb_ARG1", "verb_ARG2", "adj_ARG1", "det_ARG1", "prep_ARG2"},
      {"ACT", "PAT", "RSTR", "LOC", ""},
  };
  const auto& L = kLabels[task];
  const int n = static_cast<int>(pos.size());
  std::vector<Arc> arcs;
  for (int i = 1; i <= n; ++i) {
    for (int j = 1; j <= n; ++j) {
      if (i == j) continue;
      const char h = pos[i - 1], m = pos[j - 1];
      const int d = j - i;
      if (h == 'V' && m == 'N') {
        arcs.push_back({i, j, d < 0 ? L[0] : L[1]});
      } else if (task < 2) {
        if (h == 'A' && m == 'N' && d == 1) arcs.push_back({i, j, L[2]});
        if (task == 0 && h == 'D' && m == 'N' && (d == 1 || d == 2)) arcs.push_back({i, j, L[3]});
        if (task == 1 && h == 'N' && m == 'D' && (d == -1 || d == -2)) arcs.push_back({i, j, L[3]});
        if (h == 'P' && m == 'N' && d >= 1 && d <= 3) arcs.push_back({i, j, L[4]});
      } else {
        if (h == 'N' && m == 'A' && d == -1) arcs.push_back({i, j, L[2]});
        if (h == 'V' && m == 'P') arcs.push_back({i, j, L[3]});
      }
    }
  }
  std::sort(arcs.begin(), arcs.end());
  return arcs;
}

}  // namespace

MultitaskCorpus generate(const Options& o) {
  if (o.tasks < 1 || o.tasks > 3) throw ConfigError("synthetic corpora have 1 to 3 tasks");
  if (o.min_tokens < 2 || o.max_tokens < o.min_tokens) throw ConfigError("bad sentence lengths");
  static const char* const kNames[3] = {"dm", "pas", "psd"};
  std::mt19937_64 rng(o.seed);
  std::discrete_distribution<int> tag({40, 15, 15, 15, 15});
  std::uniform_int_distribution<int> len(o.min_tokens, o.max_tokens), word(0, 9);
  const char tags[5] = {'N', 'V', 'A', 'D', 'P'};

  MultitaskCorpus c;
  c.tasks.resize(o.tasks);
  for (int t = 0; t < o.tasks; ++t) c.task_names.push_back(kNames[t]);
  for (int k = 0; k < o.sentences; ++k) {
    const int n = len(rng);
    std::vector<char> pos(n);
    Sentence s;
    s.id = std::to_string(20000 + k);
    for (int i = 0; i < n; ++i) {
      pos[i] = tags[tag(rng)];
      const std::string form(1, char(pos[i] - 'A' + 'a'));
      Token tok;
      tok.index = i + 1;
      tok.form = form + std::to_string(word(rng));
      tok.lemma = tok.form;
      tok.pos = std::string(1, pos[i]);
      s.tokens.push_back(tok);
    }
    for (int t = 0; t < o.tasks; ++t) {
      CorpusRecord r;
      r.sentence = s;
      r.arcs = task_arcs(t, pos);
      r.pred_column = r.predicates();
      r.frames.assign(n, "_");
      c.tasks[t].push_back(std::move(r));
    }
  }
  return c;
}

double arc_overlap(const MultitaskCorpus& corpus) {
  double total = 0.0;
  int pairs = 0;
  for (int a = 0; a < corpus.num_tasks(); ++a) {
    for (int b = a + 1; b < corpus.num_tasks(); ++b) {
      total += eval::structural_similarity(corpus.tasks[a], corpus.tasks[b], true) / 100.0;
      ++pairs;
    }
  }
  return pairs ? total / pairs : 1.0;
}

}  // namespace mtsdp::synth
