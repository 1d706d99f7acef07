#include "mtsdp/decode/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace mtsdp::decode {

Multigraph round_repair(const std::vector<double>& posteriors, const FactorGraph& graph,
                        const CandidateSet& candidates) {
  const auto x = round_assignment(posteriors, graph);
  std::vector<std::vector<LabeledArc>> arcs(candidates.num_tasks());
  for (int v = 0; v < graph.num_vars(); ++v) {
    const Part& p = candidates.part(graph.var_part[v]);
    if (x[v] > 0.5 && p.kind == PartKind::LabeledArc) arcs[p.task()].push_back({p.head, p.modifier, p.label()});
  }
  Multigraph out;
  out.num_tokens = candidates.num_tokens();
  for (TaskId t = 0; t < candidates.num_tasks(); ++t) {
    out.graphs.push_back(SemanticGraph::from_arcs(t, out.num_tokens, std::move(arcs[t])));
  }
  return out;
}

namespace {

double score_or_zero(const CandidateSet& candidates, const ScoreTable& table, const Part& p) {
  auto k = candidates.find(p);
  return k ? table.scores[*k] : 0.0;
}

// One joint choice for arc (i, j): a label or -1 per task.
struct Option {
  std::array<LabelId, 3> labels{-1, -1, -1};
  double score = 0.0;
};

}  // namespace

BruteForceResult brute_force(const CandidateSet& candidates, const ScoreTable& table,
                             const LabelVocab& vocab, long long max_assignments) {
  const int n = candidates.num_tokens();
  const int nt = candidates.num_tasks();
  if (nt > 3) throw LogicError("brute_force: at most three tasks");
  if (table.scores.size() != candidates.size()) {
    throw LogicError("brute_force: score table does not match the candidates");
  }
  const auto task_sets = cross_task_sets(nt);
  BruteForceResult result;
  result.graph = empty_multigraph(nt, n);
  std::vector<std::vector<LabeledArc>> arcs(nt);

  for (int i = 1; i <= n; ++i) {
    std::vector<int> mods;
    std::vector<std::vector<Option>> options;
    long long combos = 1;
    for (int j = 1; j <= n; ++j) {
      if (j == i) continue;
      std::vector<std::vector<LabelId>> choices(nt);
      bool any = false;
      for (TaskId t = 0; t < nt; ++t) {
        choices[t].push_back(-1);
        if (!candidates.contains(Part::unlabeled_arc(t, i, j))) continue;
        for (LabelId l = 0; l < vocab.size(t); ++l) {
          if (candidates.contains(Part::labeled_arc(t, i, j, l))) {
            choices[t].push_back(l);
            any = true;
          }
        }
      }
      if (!any) continue;
      std::vector<Option> opts;
      std::vector<size_t> pos(nt, 0);
      bool more = true;
      while (more) {
        Option o;
        for (TaskId t = 0; t < nt; ++t) {
          o.labels[t] = choices[t][pos[t]];
          if (o.labels[t] < 0) continue;
          o.score += score_or_zero(candidates, table, Part::unlabeled_arc(t, i, j));
          o.score += score_or_zero(candidates, table, Part::labeled_arc(t, i, j, o.labels[t]));
        }
        for (const auto& ts : task_sets) {
          std::vector<LabelId> ls;
          for (TaskId t : ts) {
            if (o.labels[t] >= 0) ls.push_back(o.labels[t]);
          }
          if (ls.size() != ts.size()) continue;
          o.score += score_or_zero(candidates, table, Part::cross_unlabeled(ts, i, j));
          o.score += score_or_zero(candidates, table, Part::cross_labeled(ts, i, j, ls));
        }
        opts.push_back(o);
        more = false;
        for (size_t m = nt; m-- > 0;) {
          if (++pos[m] < choices[m].size()) {
            more = true;
            break;
          }
          pos[m] = 0;
        }
      }
      combos *= static_cast<long long>(opts.size());
      if (combos > max_assignments) {
        throw LogicError("brute_force: instance too large for exhaustive search");
      }
      mods.push_back(j);
      options.push_back(std::move(opts));
    }
    if (mods.empty()) continue;

    std::vector<double> pred_score(nt);
    for (TaskId t = 0; t < nt; ++t) pred_score[t] = score_or_zero(candidates, table, Part::predicate(t, i));

    auto parts_for = [&](const std::vector<size_t>& pick) {
      std::vector<Part> parts;
      std::vector<std::vector<LabeledArc>> g(nt);
      for (size_t m = 0; m < mods.size(); ++m) {
        const auto& o = options[m][pick[m]];
        for (TaskId t = 0; t < nt; ++t) {
          if (o.labels[t] >= 0) g[t].push_back({i, mods[m], o.labels[t]});
        }
      }
      Multigraph mg;
      mg.num_tokens = n;
      for (TaskId t = 0; t < nt; ++t) mg.graphs.push_back(SemanticGraph::from_arcs(t, n, g[t]));
      return parts_of(mg, candidates.has_cross_task());
    };

    std::vector<size_t> pick(mods.size(), 0), best_pick = pick;
    double best = 0.0;  // the all-empty assignment
    std::vector<int> det_count;
    bool more = true;
    while (more) {
      double s = 0.0;
      bool feasible = true;
      for (TaskId t = 0; t < nt && feasible; ++t) {
        det_count.assign(vocab.size(t), 0);
        bool has_arc = false;
        for (size_t m = 0; m < mods.size(); ++m) {
          const LabelId l = options[m][pick[m]].labels[t];
          if (l < 0) continue;
          has_arc = true;
          if (vocab.is_deterministic(t, l) && ++det_count[l] > 1) feasible = false;
        }
        if (has_arc) s += pred_score[t];
      }
      if (feasible) {
        for (size_t m = 0; m < mods.size(); ++m) s += options[m][pick[m]].score;
        if (s > best + 1e-12) {
          best = s;
          best_pick = pick;
        } else if (std::abs(s - best) <= 1e-12 && parts_for(pick) < parts_for(best_pick)) {
          best = std::max(best, s);
          best_pick = pick;
        }
      }
      more = false;
      for (size_t m = mods.size(); m-- > 0;) {
        if (++pick[m] < options[m].size()) {
          more = true;
          break;
        }
        pick[m] = 0;
      }
    }
    for (size_t m = 0; m < mods.size(); ++m) {
      const auto& o = options[m][best_pick[m]];
      for (TaskId t = 0; t < nt; ++t) {
        if (o.labels[t] >= 0) arcs[t].push_back({i, mods[m], o.labels[t]});
      }
    }
  }
  for (TaskId t = 0; t < nt; ++t) result.graph.graphs[t] = SemanticGraph::from_arcs(t, n, arcs[t]);
  result.objective = score_of(table, candidates, result.graph);
  return result;
}

DecodeOutcome decode_table(const CandidateSet& candidates, const ScoreTable& table,
                           const LabelVocab& vocab, const DecodeOptions& options) {
  DecodeOutcome out;
  if (options.method == Method::Exact) {
    auto bf = brute_force(candidates, table, vocab);
    out.graph = std::move(bf.graph);
    out.objective = bf.objective;
    return out;
  }
  const FactorGraph fg = build_factor_graph(candidates, table, vocab);
  Ad3Result r = ad3(fg, options.ad3);
  out.graph = round_repair(r.assignment, fg, candidates);
  out.objective = score_of(table, candidates, out.graph);
  r.primal_objective = out.objective;
  out.ad3 = std::move(r);
  return out;
}

}  // namespace mtsdp::decode
