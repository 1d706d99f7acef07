#include "mtsdp/eval/eval.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

#include "mtsdp/decode/decoder.hpp"
#include "mtsdp/error.hpp"

namespace mtsdp::eval {

double PrfCounts::f1() const {
  const double p = precision(), r = recall();
  return p + r > 0 ? 2 * p * r / (p + r) : 0.0;
}

PrfCounts& PrfCounts::operator+=(const PrfCounts& o) {
  matched += o.matched;
  predicted += o.predicted;
  gold += o.gold;
  return *this;
}

PrfCounts prf(const SemanticGraph& pred, const SemanticGraph& gold, bool labeled) {
  std::set<std::tuple<int, int, LabelId>> g;
  for (const auto& a : gold.arcs) g.insert({a.head, a.modifier, labeled ? a.label : 0});
  PrfCounts c;
  c.gold = static_cast<long long>(g.size());
  std::set<std::tuple<int, int, LabelId>> p;
  for (const auto& a : pred.arcs) p.insert({a.head, a.modifier, labeled ? a.label : 0});
  c.predicted = static_cast<long long>(p.size());
  for (const auto& x : p) c.matched += g.count(x);
  return c;
}

PrfCounts micro_average(std::span<const PrfCounts> per_task) {
  PrfCounts total;
  for (const auto& c : per_task) total += c;
  return total;
}

double hamming_cost(const Multigraph& pred, const Multigraph& gold, double fp_cost, double fn_cost) {
  if (pred.num_tasks() != gold.num_tasks()) throw LogicError("hamming_cost: task counts differ");
  int fp = 0, fn = 0;
  for (TaskId t = 0; t < pred.num_tasks(); ++t) {
    const auto c = prf(pred.task(t), gold.task(t), true);
    fp += static_cast<int>(c.predicted - c.matched);
    fn += static_cast<int>(c.gold - c.matched);
  }
  return decode::weighted_hamming(fp, fn, fp_cost, fn_cost);
}

namespace {

void check_same_tokens(const CorpusRecord& a, const CorpusRecord& b, std::size_t k) {
  bool same = a.sentence.size() == b.sentence.size();
  for (int i = 0; same && i < a.sentence.size(); ++i) {
    same = a.sentence.tokens[i].form == b.sentence.tokens[i].form;
  }
  if (!same) throw DataError("sentence " + std::to_string(k + 1) + " differs in its tokens");
}

}  // namespace

double structural_similarity(std::span<const CorpusRecord> a, std::span<const CorpusRecord> b,
                             bool directed) {
  if (a.size() != b.size()) throw DataError("corpora differ in sentence count");
  PrfCounts c;
  for (std::size_t k = 0; k < a.size(); ++k) {
    check_same_tokens(a[k], b[k], k);
    auto pairs = [directed](const CorpusRecord& r) {
      std::set<std::pair<int, int>> s;
      for (const auto& arc : r.arcs) {
        if (directed) s.insert({arc.head, arc.modifier});
        else s.insert({std::min(arc.head, arc.modifier), std::max(arc.head, arc.modifier)});
      }
      return s;
    };
    const auto pa = pairs(a[k]), pb = pairs(b[k]);
    c.predicted += static_cast<long long>(pa.size());
    c.gold += static_cast<long long>(pb.size());
    for (const auto& x : pa) c.matched += pb.count(x);
  }
  return 100.0 * c.f1();
}

namespace {

SemanticGraph record_graph(const CorpusRecord& r, TaskId t, LabelVocab& vocab, bool include_tops) {
  std::vector<LabeledArc> arcs;
  for (const auto& a : r.arcs) arcs.push_back({a.head, a.modifier, vocab.add(t, a.label)});
  if (include_tops) {
    for (int top : r.tops) arcs.push_back({kVirtualRoot, top, vocab.add(t, kTopLabel)});
  }
  return SemanticGraph::from_arcs(t, r.sentence.size(), std::move(arcs));
}

double pct(double x) { return std::round(1000.0 * x) / 10.0; }

nlohmann::json prf_json(const PrfCounts& c) {
  return {{"P", pct(c.precision())}, {"R", pct(c.recall())}, {"F", pct(c.f1())},
          {"matched", c.matched}, {"predicted", c.predicted}, {"gold", c.gold}};
}

}  // namespace

Report evaluate(std::span<const std::string> task_names,
                std::span<const std::vector<CorpusRecord>> gold,
                std::span<const std::vector<CorpusRecord>> pred, bool include_tops) {
  if (gold.size() != pred.size() || gold.size() != task_names.size()) {
    throw DataError("evaluate: need one gold and one predicted corpus per task");
  }
  Report report;
  LabelVocab vocab(static_cast<int>(gold.size()));
  for (TaskId t = 0; t < static_cast<TaskId>(gold.size()); ++t) {
    if (gold[t].size() != pred[t].size()) {
      throw DataError("task " + task_names[t] + ": gold has " + std::to_string(gold[t].size()) +
                      " sentences, prediction " + std::to_string(pred[t].size()));
    }
    TaskReport tr;
    tr.name = task_names[t];
    for (std::size_t k = 0; k < gold[t].size(); ++k) {
      check_same_tokens(gold[t][k], pred[t][k], k);
      const auto g = record_graph(gold[t][k], t, vocab, include_tops);
      const auto p = record_graph(pred[t][k], t, vocab, include_tops);
      tr.labeled += prf(p, g, true);
      tr.unlabeled += prf(p, g, false);
    }
    report.micro_labeled += tr.labeled;
    report.micro_unlabeled += tr.unlabeled;
    report.tasks.push_back(std::move(tr));
  }
  return report;
}

std::string Report::to_json() const {
  nlohmann::json doc;
  doc["tasks"] = nlohmann::json::array();
  for (const auto& t : tasks) {
    doc["tasks"].push_back(
        {{"task", t.name}, {"labeled", prf_json(t.labeled)}, {"unlabeled", prf_json(t.unlabeled)}});
  }
  doc["micro"] = {{"labeled", prf_json(micro_labeled)}, {"unlabeled", prf_json(micro_unlabeled)}};
  doc["micro_LF"] = pct(micro_labeled.f1());
  doc["micro_UF"] = pct(micro_unlabeled.f1());
  return doc.dump(2);
}

}  // namespace mtsdp::eval
