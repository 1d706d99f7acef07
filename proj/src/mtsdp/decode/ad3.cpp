#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <tuple>

#include "mtsdp/decode/decoder.hpp"
#include "mtsdp/decode/factors.hpp"

namespace mtsdp::decode {

FactorGraph build_factor_graph(const CandidateSet& candidates, const ScoreTable& table,
                               const LabelVocab& vocab) {
  if (table.scores.size() != candidates.size()) {
    throw LogicError("build_factor_graph: score table does not match the candidates");
  }
  FactorGraph fg;
  fg.part_var.assign(candidates.size(), -1);
  using Arc = std::tuple<TaskId, int, int>;
  using Head = std::pair<TaskId, int>;
  std::map<Arc, int> ua_var;
  std::map<Arc, std::vector<int>> la_vars;
  std::map<std::tuple<TaskId, int, int, LabelId>, int> la_var;
  std::map<Head, int> pred_var;
  std::map<Head, std::vector<int>> ua_by_head;
  std::map<std::tuple<TaskId, int, LabelId>, std::vector<int>> det_groups;

  for (size_t k = 0; k < candidates.size(); ++k) {
    const Part& p = candidates.part(k);
    if (p.is_cross_task()) continue;
    const int v = fg.num_vars();
    fg.unary.push_back(table.scores[k]);
    fg.var_part.push_back(static_cast<int>(k));
    fg.part_var[k] = v;
    switch (p.kind) {
      case PartKind::Predicate:
        pred_var[{p.task(), p.head}] = v;
        break;
      case PartKind::UnlabeledArc:
        ua_var[{p.task(), p.head, p.modifier}] = v;
        ua_by_head[{p.task(), p.head}].push_back(v);
        break;
      case PartKind::LabeledArc:
        la_vars[{p.task(), p.head, p.modifier}].push_back(v);
        la_var[{p.task(), p.head, p.modifier, p.label()}] = v;
        if (vocab.contains(p.task(), p.label()) && vocab.is_deterministic(p.task(), p.label())) {
          det_groups[{p.task(), p.head, p.label()}].push_back(v);
        }
        break;
      default:
        break;
    }
  }

  for (const auto& [arc, ua] : ua_var) {
    auto it = la_vars.find(arc);
    if (it == la_vars.end()) throw LogicError("build_factor_graph: unlabeled arc without labels");
    Factor f{FactorKind::XorWithOutput, it->second, 0.0};
    f.vars.push_back(ua);
    fg.factors.push_back(std::move(f));
  }
  for (const auto& [arc, las] : la_vars) {
    if (!ua_var.count(arc)) throw LogicError("build_factor_graph: labeled arc without unlabeled arc");
  }
  for (const auto& [head, uas] : ua_by_head) {
    auto it = pred_var.find(head);
    if (it == pred_var.end()) throw LogicError("build_factor_graph: arcs without a predicate part");
    Factor f{FactorKind::OrWithOutput, uas, 0.0};
    f.vars.push_back(it->second);
    fg.factors.push_back(std::move(f));
  }
  for (const auto& [head, pv] : pred_var) {
    if (!ua_by_head.count(head)) throw LogicError("build_factor_graph: predicate part without arcs");
  }
  for (const auto& [key, vars] : det_groups) {
    if (vars.size() >= 2) fg.factors.push_back(Factor{FactorKind::AtMostOne, vars, 0.0});
  }

  for (size_t k = 0; k < candidates.size(); ++k) {
    const Part& p = candidates.part(k);
    if (!p.is_cross_task() || table.scores[k] == 0.0) continue;
    Factor f{FactorKind::DenseAnd, {}, table.scores[k]};
    for (size_t m = 0; m < p.num_tasks; ++m) {
      const TaskId t = p.tasks[m];
      if (p.kind == PartKind::CrossUnlabeled) {
        f.vars.push_back(ua_var.at({t, p.head, p.modifier}));
      } else {
        f.vars.push_back(la_var.at({t, p.head, p.modifier, p.labels[m]}));
      }
    }
    fg.factors.push_back(std::move(f));
  }
  return fg;
}

namespace {

std::vector<int> degrees(const FactorGraph& fg) {
  std::vector<int> deg(fg.num_vars(), 0);
  for (const auto& f : fg.factors) {
    for (int v : f.vars) ++deg[v];
  }
  return deg;
}

double local_map(const Factor& f, std::span<const double> a) {
  switch (f.kind) {
    case FactorKind::XorWithOutput:
      return map_xor_with_output(a);
    case FactorKind::OrWithOutput:
      return map_or_with_output(a);
    case FactorKind::AtMostOne:
      return map_at_most_one(a);
    case FactorKind::DenseAnd:
      return map_dense_and(a, f.potential);
  }
  return 0.0;
}

struct State {
  std::vector<double> p;
  std::vector<std::vector<double>> lambda;
  double rho = 0.1;
};

// Dual bound with some variables clamped to 0/1 (clamp value -1 = free).
double clamped_dual(const FactorGraph& graph, const std::vector<int>& deg,
                    const std::vector<std::vector<double>>& lambda, const std::vector<int8_t>& clamp) {
  double total = 0.0;
  std::vector<double> a;
  std::vector<double> lambda_sum(graph.num_vars(), 0.0);
  for (size_t fi = 0; fi < graph.factors.size(); ++fi) {
    const Factor& f = graph.factors[fi];
    a.assign(f.vars.size(), 0.0);
    for (size_t m = 0; m < f.vars.size(); ++m) {
      const int v = f.vars[m];
      a[m] = graph.unary[v] / deg[v] + lambda[fi][m];
      lambda_sum[v] += lambda[fi][m];
    }
    total += local_map(f, a);
  }
  for (int v = 0; v < graph.num_vars(); ++v) {
    if (clamp[v] >= 0) {
      total -= clamp[v] * lambda_sum[v];
      if (deg[v] == 0) total += clamp[v] * graph.unary[v];
    } else if (deg[v] == 0) {
      total += std::max(0.0, graph.unary[v]);
    }
  }
  return total;
}

struct NodeOutcome {
  bool converged = false;
  bool pruned = false;
  int iterations = 0;
  double dual = 0.0;
};

// ADMM on the relaxation with clamped variables. Stops early once the dual
// bound drops to `prune_at` or below.
NodeOutcome solve_relaxation(const FactorGraph& graph, const std::vector<int>& deg, size_t edges,
                             const Ad3Options& options, const std::vector<int8_t>& clamp,
                             double prune_at, State& st, std::vector<double>* history) {
  NodeOutcome out;
  const int nv = graph.num_vars();
  std::vector<double> p_new(nv, 0.0), z;
  std::vector<std::vector<double>> q(graph.factors.size());
  for (size_t fi = 0; fi < graph.factors.size(); ++fi) q[fi].assign(graph.factors[fi].vars.size(), 0.0);
  for (int v = 0; v < nv; ++v) {
    if (clamp[v] >= 0) st.p[v] = clamp[v];
  }

  for (int it = 1; it <= options.max_iter; ++it) {
    for (size_t fi = 0; fi < graph.factors.size(); ++fi) {
      const Factor& f = graph.factors[fi];
      const size_t k = f.vars.size();
      z.resize(k);
      for (size_t m = 0; m < k; ++m) {
        const int v = f.vars[m];
        z[m] = st.p[v] + (graph.unary[v] / deg[v] + st.lambda[fi][m]) / st.rho;
      }
      auto& qf = q[fi];
      switch (f.kind) {
        case FactorKind::XorWithOutput: {
          double y = z[k - 1];
          std::copy(z.begin(), z.end() - 1, qf.begin());
          project_xor_with_output(std::span<double>(qf.data(), k - 1), y);
          qf[k - 1] = y;
          break;
        }
        case FactorKind::OrWithOutput: {
          double y = z[k - 1];
          std::copy(z.begin(), z.end() - 1, qf.begin());
          project_or_with_output(std::span<double>(qf.data(), k - 1), y);
          qf[k - 1] = y;
          break;
        }
        case FactorKind::AtMostOne:
          std::copy(z.begin(), z.end(), qf.begin());
          project_at_most_one(qf);
          break;
        case FactorKind::DenseAnd:
          solve_dense_and(z, f.potential, st.rho, qf);
          break;
      }
    }

    std::fill(p_new.begin(), p_new.end(), 0.0);
    for (size_t fi = 0; fi < graph.factors.size(); ++fi) {
      const Factor& f = graph.factors[fi];
      for (size_t m = 0; m < f.vars.size(); ++m) p_new[f.vars[m]] += q[fi][m];
    }
    for (int v = 0; v < nv; ++v) {
      if (clamp[v] >= 0) {
        p_new[v] = clamp[v];
      } else {
        p_new[v] = deg[v] ? p_new[v] / deg[v] : (graph.unary[v] > 0.0 ? 1.0 : 0.0);
      }
    }

    double primal = 0.0, dual = 0.0;
    for (size_t fi = 0; fi < graph.factors.size(); ++fi) {
      const Factor& f = graph.factors[fi];
      for (size_t m = 0; m < f.vars.size(); ++m) {
        const double r = q[fi][m] - p_new[f.vars[m]];
        st.lambda[fi][m] -= st.rho * r;
        primal += r * r;
      }
    }
    for (int v = 0; v < nv; ++v) dual += deg[v] * (p_new[v] - st.p[v]) * (p_new[v] - st.p[v]);
    primal = std::sqrt(primal / edges);
    dual = st.rho * std::sqrt(dual / edges);
    st.p.swap(p_new);
    out.iterations = it;
    if (history) {
      // Best bound so far; the per-iterate value is not monotone under ADMM.
      const double d = clamped_dual(graph, deg, st.lambda, clamp);
      history->push_back(history->empty() ? d : std::min(history->back(), d));
    }

    if (primal < options.tol && dual < options.tol) {
      out.converged = true;
      break;
    }
    if (it % 10 == 0) {
      if (clamped_dual(graph, deg, st.lambda, clamp) <= prune_at) {
        out.pruned = true;
        break;
      }
      if (primal > 10.0 * dual) {
        st.rho *= 2.0;
      } else if (dual > 10.0 * primal) {
        st.rho /= 2.0;
      }
    }
  }
  out.dual = clamped_dual(graph, deg, st.lambda, clamp);
  return out;
}

}  // namespace

double dual_value(const FactorGraph& graph, const std::vector<std::vector<double>>& lambda) {
  return clamped_dual(graph, degrees(graph), lambda, std::vector<int8_t>(graph.num_vars(), -1));
}

double assignment_score(const std::vector<double>& x, const FactorGraph& graph) {
  double s = 0.0;
  for (int v = 0; v < graph.num_vars(); ++v) s += graph.unary[v] * x[v];
  for (const auto& f : graph.factors) {
    if (f.kind != FactorKind::DenseAnd) continue;
    if (std::all_of(f.vars.begin(), f.vars.end(), [&](int v) { return x[v] > 0.5; })) s += f.potential;
  }
  return s;
}

std::vector<double> round_assignment(const std::vector<double>& posteriors, const FactorGraph& graph) {
  if (posteriors.size() != static_cast<size_t>(graph.num_vars())) {
    throw LogicError("round_assignment: posterior count does not match the factor graph");
  }
  std::vector<double> x(graph.num_vars(), 0.0);
  std::vector<int> arc_of(graph.num_vars(), -1);
  for (const auto& f : graph.factors) {
    if (f.kind != FactorKind::XorWithOutput) continue;
    const int ua = f.vars.back();
    for (size_t m = 0; m + 1 < f.vars.size(); ++m) arc_of[f.vars[m]] = ua;
    if (!(posteriors[ua] > 0.5)) continue;
    int best = f.vars.front();
    for (size_t m = 1; m + 1 < f.vars.size(); ++m) {
      if (posteriors[f.vars[m]] > posteriors[best]) best = f.vars[m];
    }
    x[best] = 1.0;
    x[ua] = 1.0;
  }
  for (const auto& f : graph.factors) {
    if (f.kind != FactorKind::AtMostOne) continue;
    int keep = -1;
    for (int v : f.vars) {
      if (x[v] > 0.5 && (keep < 0 || posteriors[v] > posteriors[keep])) keep = v;
    }
    for (int v : f.vars) {
      if (v == keep || x[v] < 0.5) continue;
      x[v] = 0.0;
      if (arc_of[v] >= 0) x[arc_of[v]] = 0.0;
    }
  }
  for (const auto& f : graph.factors) {
    if (f.kind != FactorKind::OrWithOutput) continue;
    bool any = false;
    for (size_t m = 0; m + 1 < f.vars.size(); ++m) any = any || x[f.vars[m]] > 0.5;
    x[f.vars.back()] = any ? 1.0 : 0.0;
  }
  return x;
}

namespace {

// Greedy coordinate ascent from a feasible assignment: each arc in turn moves
// to its best state (off or one of its labels) given the rest, until no move
// helps. Moves that would break an at-most-one factor are skipped, and
// predicate outputs follow their arcs, so feasibility is preserved.
void polish(std::vector<double>& x, const FactorGraph& graph) {
  const int nv = graph.num_vars();
  std::vector<std::vector<int>> dense_of(nv), amo_of(nv);
  std::vector<int> or_of(nv, -1);
  for (size_t k = 0; k < graph.factors.size(); ++k) {
    const auto& f = graph.factors[k];
    if (f.kind == FactorKind::DenseAnd) {
      for (int v : f.vars) dense_of[v].push_back(static_cast<int>(k));
    } else if (f.kind == FactorKind::AtMostOne) {
      for (int v : f.vars) amo_of[v].push_back(static_cast<int>(k));
    } else if (f.kind == FactorKind::OrWithOutput) {
      for (size_t m = 0; m + 1 < f.vars.size(); ++m) or_of[f.vars[m]] = static_cast<int>(k);
    }
  }
  auto on = [&](int v) { return x[v] > 0.5; };
  // Score terms that involve any of the given variables.
  std::vector<int> seen;
  auto local = [&](std::span<const int> vars) {
    double s = 0.0;
    seen.clear();
    for (int v : vars) {
      if (on(v)) s += graph.unary[v];
      for (int k : dense_of[v]) {
        if (std::find(seen.begin(), seen.end(), k) != seen.end()) continue;
        seen.push_back(k);
        const auto& f = graph.factors[k];
        if (std::all_of(f.vars.begin(), f.vars.end(), on)) s += f.potential;
      }
    }
    return s;
  };
  auto allowed = [&](int v) {
    for (int k : amo_of[v]) {
      for (int u : graph.factors[k].vars) {
        if (u != v && on(u)) return false;
      }
    }
    return true;
  };

  for (int pass = 0; pass < 20; ++pass) {
    bool moved = false;
    for (const auto& f : graph.factors) {
      if (f.kind != FactorKind::XorWithOutput) continue;
      const int ua = f.vars.back();
      const int nl = static_cast<int>(f.vars.size()) - 1;
      const int orf = or_of[ua];
      const int pred = orf >= 0 ? graph.factors[orf].vars.back() : -1;
      std::vector<int> touched(f.vars.begin(), f.vars.end());
      if (pred >= 0) touched.push_back(pred);
      int current = -1;
      for (int m = 0; m < nl; ++m) {
        if (on(f.vars[m])) current = m;
      }
      auto set_state = [&](int state) {
        for (int m = 0; m < nl; ++m) x[f.vars[m]] = m == state ? 1.0 : 0.0;
        x[ua] = state >= 0 ? 1.0 : 0.0;
        if (orf >= 0) {
          const auto& o = graph.factors[orf];
          bool any = false;
          for (size_t m = 0; m + 1 < o.vars.size(); ++m) any = any || on(o.vars[m]);
          x[pred] = any ? 1.0 : 0.0;
        }
      };
      const double base = local(touched);
      int best = current;
      double best_gain = 1e-12;
      for (int state = -1; state < nl; ++state) {
        if (state == current) continue;
        set_state(-1);
        if (state >= 0 && !allowed(f.vars[state])) continue;
        set_state(state);
        const double gain = local(touched) - base;
        if (gain > best_gain) {
          best_gain = gain;
          best = state;
        }
      }
      set_state(best);
      moved = moved || best != current;
    }
    if (!moved) break;
  }
}

Ad3Result ad3_connected(const FactorGraph& graph, const Ad3Options& options) {
  const int nv = graph.num_vars();
  const auto deg = degrees(graph);
  size_t edges = 0;
  for (const auto& f : graph.factors) edges += f.vars.size();
  Ad3Result result;
  if (edges == 0) {
    result.posteriors.assign(nv, 0.0);
    for (int v = 0; v < nv; ++v) result.posteriors[v] = graph.unary[v] > 0.0 ? 1.0 : 0.0;
    result.assignment = result.posteriors;
    result.converged = true;
    result.primal_objective = result.dual_bound = assignment_score(result.assignment, graph);
    return result;
  }

  // The empty assignment is always feasible.
  result.assignment.assign(nv, 0.0);
  double incumbent = 0.0;
  const double gap_tol = 1e-9;

  struct Node {
    std::vector<int8_t> clamp;
    State state;
  };
  State root;
  root.p.assign(nv, 0.0);
  root.rho = options.rho;
  for (const auto& f : graph.factors) root.lambda.emplace_back(f.vars.size(), 0.0);
  std::vector<Node> stack;
  stack.push_back({std::vector<int8_t>(nv, -1), std::move(root)});
  bool certified = true;
  double root_dual = 0.0;

  while (!stack.empty()) {
    if (result.nodes >= std::max(1, options.max_nodes)) {
      certified = false;
      break;
    }
    Node node = std::move(stack.back());
    stack.pop_back();
    const bool is_root = result.nodes == 0;
    ++result.nodes;
    auto out = solve_relaxation(graph, deg, edges, options, node.clamp, incumbent + gap_tol, node.state,
                                is_root && options.record_dual ? &result.dual_history : nullptr);
    result.iterations += out.iterations;
    if (is_root) {
      result.posteriors = node.state.p;
      for (double& v : result.posteriors) v = std::clamp(v, 0.0, 1.0);
      root_dual = out.dual;
    }
    if (out.pruned) continue;

    auto x = round_assignment(node.state.p, graph);
    polish(x, graph);
    const double val = assignment_score(x, graph);
    if (val > incumbent + gap_tol) {
      incumbent = val;
      result.assignment = std::move(x);
    }
    if (out.dual <= incumbent + gap_tol) continue;

    int branch = -1;
    double most = 1e-6;
    for (int v = 0; v < nv; ++v) {
      if (node.clamp[v] >= 0) continue;
      const double frac = std::min(node.state.p[v], 1.0 - node.state.p[v]);
      if (frac > most) {
        most = frac;
        branch = v;
      }
    }
    if (branch < 0) {
      // Integral: the relaxation optimum is a feasible assignment.
      if (!out.converged) certified = false;
      continue;
    }
    const int8_t first = node.state.p[branch] > 0.5 ? 1 : 0;
    Node other{node.clamp, node.state};
    other.clamp[branch] = static_cast<int8_t>(1 - first);
    node.clamp[branch] = first;
    stack.push_back(std::move(other));
    stack.push_back(std::move(node));
  }
  result.converged = certified;
  result.primal_objective = assignment_score(result.assignment, graph);
  result.dual_bound = certified ? result.primal_objective : root_dual;
  return result;
}

// Splits the graph into connected components. Every factor lives under one
// head, so components are small and each gets its own search and residuals.
std::vector<FactorGraph> components(const FactorGraph& graph, std::vector<std::vector<int>>& members) {
  const int nv = graph.num_vars();
  std::vector<int> parent(nv);
  for (int v = 0; v < nv; ++v) parent[v] = v;
  auto find = [&](int v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  for (const auto& f : graph.factors) {
    for (size_t k = 1; k < f.vars.size(); ++k) parent[find(f.vars[k])] = find(f.vars[0]);
  }
  std::vector<int> comp_of(nv, -1), local(nv, -1);
  members.clear();
  for (int v = 0; v < nv; ++v) {
    const int r = find(v);
    if (comp_of[r] < 0) {
      comp_of[r] = static_cast<int>(members.size());
      members.emplace_back();
    }
    const int c = comp_of[r];
    local[v] = static_cast<int>(members[c].size());
    members[c].push_back(v);
  }
  std::vector<FactorGraph> out(members.size());
  for (size_t c = 0; c < members.size(); ++c) {
    for (int v : members[c]) {
      out[c].unary.push_back(graph.unary[v]);
      out[c].var_part.push_back(graph.var_part[v]);
    }
  }
  for (const auto& f : graph.factors) {
    Factor g = f;
    for (int& v : g.vars) v = local[v];
    out[comp_of[find(f.vars[0])]].factors.push_back(std::move(g));
  }
  return out;
}

}  // namespace

Ad3Result ad3(const FactorGraph& graph, const Ad3Options& options) {
  std::vector<std::vector<int>> members;
  const auto parts = components(graph, members);
  if (parts.size() <= 1) return ad3_connected(graph, options);

  const int nv = graph.num_vars();
  Ad3Result result;
  result.posteriors.assign(nv, 0.0);
  result.assignment.assign(nv, 0.0);
  result.converged = true;
  for (size_t c = 0; c < parts.size(); ++c) {
    const auto r = ad3_connected(parts[c], options);
    for (size_t k = 0; k < members[c].size(); ++k) {
      result.posteriors[members[c][k]] = r.posteriors[k];
      result.assignment[members[c][k]] = r.assignment[k];
    }
    result.converged = result.converged && r.converged;
    result.iterations += r.iterations;
    result.nodes += r.nodes;
    result.primal_objective += r.primal_objective;
    result.dual_bound += r.dual_bound;
    if (options.record_dual) {
      // Sum of per-component bounds, each held at its last value once done.
      auto& h = result.dual_history;
      const double prev_last = h.empty() ? 0.0 : h.back();
      const double last = r.dual_history.empty() ? r.dual_bound : r.dual_history.back();
      const size_t len = std::max(h.size(), r.dual_history.size());
      h.resize(len, prev_last);
      for (size_t k = 0; k < len; ++k) h[k] += k < r.dual_history.size() ? r.dual_history[k] : last;
    }
  }
  return result;
}

}  // namespace mtsdp::decode
