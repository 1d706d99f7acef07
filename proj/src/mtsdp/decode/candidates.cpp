#include <algorithm>

#include "mtsdp/decode/decoder.hpp"

namespace mtsdp::decode {

ArcMask::ArcMask(int num_tasks, int num_tokens, bool value)
    : num_tasks_(num_tasks),
      num_tokens_(num_tokens),
      kept_(static_cast<size_t>(num_tasks) * (num_tokens + 1) * (num_tokens + 1), value ? 1 : 0) {}

size_t ArcMask::index(TaskId t, int i, int j) const {
  if (t < 0 || t >= num_tasks_ || i < 0 || i > num_tokens_ || j < 0 || j > num_tokens_) {
    throw LogicError("ArcMask: index out of range");
  }
  const size_t n1 = static_cast<size_t>(num_tokens_) + 1;
  return (static_cast<size_t>(t) * n1 + i) * n1 + j;
}

size_t CandidateSet::add(const Part& part) {
  auto [it, inserted] = index_.try_emplace(part, parts_.size());
  if (inserted) {
    parts_.push_back(part);
    if (part.is_cross_task()) has_cross_ = true;
  }
  return it->second;
}

std::optional<size_t> CandidateSet::find(const Part& part) const {
  auto it = index_.find(part);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

CandidateSet enumerate_candidates(int num_tokens,
                                  const std::vector<std::vector<LabelId>>& labels_per_task,
                                  const ArcMask* mask, bool cross_task) {
  const int num_tasks = static_cast<int>(labels_per_task.size());
  if (mask && (mask->num_tasks() != num_tasks || mask->num_tokens() != num_tokens)) {
    throw LogicError("enumerate_candidates: mask shape does not match the sentence");
  }
  CandidateSet out(num_tokens, num_tasks);
  auto arc_ok = [&](TaskId t, int i, int j) {
    return !labels_per_task[t].empty() && (!mask || mask->allowed(t, i, j));
  };
  for (TaskId t = 0; t < num_tasks; ++t) {
    for (int i = 1; i <= num_tokens; ++i) {
      bool any = false;
      for (int j = 1; j <= num_tokens; ++j) any = any || (j != i && arc_ok(t, i, j));
      if (!any) continue;
      out.add(Part::predicate(t, i));
      for (int j = 1; j <= num_tokens; ++j) {
        if (j == i || !arc_ok(t, i, j)) continue;
        out.add(Part::unlabeled_arc(t, i, j));
        for (LabelId l : labels_per_task[t]) out.add(Part::labeled_arc(t, i, j, l));
      }
    }
  }
  if (!cross_task) return out;
  for (const auto& ts : cross_task_sets(num_tasks)) {
    for (int i = 1; i <= num_tokens; ++i) {
      for (int j = 1; j <= num_tokens; ++j) {
        if (j == i) continue;
        if (!std::all_of(ts.begin(), ts.end(), [&](TaskId t) { return arc_ok(t, i, j); })) continue;
        out.add(Part::cross_unlabeled(ts, i, j));
        // Odometer over one label per member task.
        std::vector<size_t> pos(ts.size(), 0);
        bool more = true;
        while (more) {
          std::vector<LabelId> ls(ts.size());
          for (size_t m = 0; m < ts.size(); ++m) ls[m] = labels_per_task[ts[m]][pos[m]];
          out.add(Part::cross_labeled(ts, i, j, ls));
          more = false;
          for (size_t m = ts.size(); m-- > 0;) {
            if (++pos[m] < labels_per_task[ts[m]].size()) {
              more = true;
              break;
            }
            pos[m] = 0;
          }
        }
      }
    }
  }
  return out;
}

double weighted_hamming(int false_positives, int false_negatives, double fp_cost, double fn_cost) {
  return fp_cost * false_positives + fn_cost * false_negatives;
}

ScoreTable augment_costs(const ScoreTable& table, const CandidateSet& candidates,
                         const CostSpec& cost) {
  if (table.cost_augmented) throw LogicError("augment_costs: table is already cost-augmented");
  if (table.scores.size() != candidates.size()) {
    throw LogicError("augment_costs: score table does not match the candidates");
  }
  if (!cost.enabled) return table;
  if (!cost.gold) throw LogicError("augment_costs: no gold graph");
  if (cost.fp_cost < 0.0 || cost.fn_cost < 0.0) throw LogicError("augment_costs: negative cost");
  ScoreTable out = table;
  out.cost_augmented = true;
  out.fp_cost = cost.fp_cost;
  out.fn_cost = cost.fn_cost;
  out.in_gold.assign(candidates.size(), 0);
  out.gold_labeled_arcs = 0;
  for (const auto& g : cost.gold->graphs) {
    out.gold_labeled_arcs += static_cast<int>(g.arcs.size());
    for (const auto& a : g.arcs) {
      if (auto k = candidates.find(Part::labeled_arc(g.task, a.head, a.modifier, a.label))) {
        out.in_gold[*k] = 1;
      }
    }
  }
  for (size_t k = 0; k < candidates.size(); ++k) {
    if (candidates.part(k).kind != PartKind::LabeledArc) continue;
    out.scores[k] += out.in_gold[k] ? -cost.fn_cost : cost.fp_cost;
  }
  return out;
}

double recovered_cost(const ScoreTable& table, const CandidateSet& candidates, const Multigraph& y) {
  if (!table.cost_augmented) throw LogicError("recovered_cost: table is not cost-augmented");
  int fp = 0, tp = 0;
  for (const auto& g : y.graphs) {
    for (const auto& a : g.arcs) {
      auto k = candidates.find(Part::labeled_arc(g.task, a.head, a.modifier, a.label));
      if (k && table.in_gold[*k]) {
        ++tp;
      } else {
        ++fp;
      }
    }
  }
  return weighted_hamming(fp, table.gold_labeled_arcs - tp, table.fp_cost, table.fn_cost);
}

double score_of(const ScoreTable& table, const CandidateSet& candidates, const Multigraph& y) {
  double s = 0.0;
  for (const Part& p : parts_of(y, candidates.has_cross_task())) {
    auto k = candidates.find(p);
    if (!k) throw LogicError("score_of: part outside the candidate set: " + describe(p));
    s += table.scores[*k];
  }
  return s;
}

Multigraph restrict_to_candidates(const Multigraph& gold, const CandidateSet& candidates) {
  Multigraph out;
  out.num_tokens = gold.num_tokens;
  for (const auto& g : gold.graphs) {
    std::vector<LabeledArc> kept;
    for (const auto& a : g.arcs) {
      if (candidates.contains(Part::labeled_arc(g.task, a.head, a.modifier, a.label))) kept.push_back(a);
    }
    out.graphs.push_back(SemanticGraph::from_arcs(g.task, g.num_tokens, std::move(kept)));
  }
  return out;
}

Multigraph empty_multigraph(int num_tasks, int num_tokens) {
  Multigraph out;
  out.num_tokens = num_tokens;
  for (TaskId t = 0; t < num_tasks; ++t) out.graphs.push_back(SemanticGraph::from_arcs(t, num_tokens, {}));
  return out;
}

}  // namespace mtsdp::decode
