#include "mtsdp/graph.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace mtsdp {

SemanticGraph SemanticGraph::from_arcs(TaskId task, int num_tokens,
                                       std::vector<LabeledArc> arcs) {
  SemanticGraph g;
  g.task = task;
  g.num_tokens = num_tokens;
  std::sort(arcs.begin(), arcs.end());
  g.arcs = std::move(arcs);
  for (const auto& arc : g.arcs) {
    if (g.predicates.empty() || g.predicates.back() != arc.head) {
      g.predicates.push_back(arc.head);
    }
  }
  return g;
}

std::optional<LabelId> SemanticGraph::label_of(int head, int modifier) const {
  auto it = std::lower_bound(arcs.begin(), arcs.end(), LabeledArc{head, modifier, -1});
  if (it != arcs.end() && it->head == head && it->modifier == modifier) return it->label;
  return std::nullopt;
}

const char* to_string(PartKind kind) {
  switch (kind) {
    case PartKind::Predicate: return "Pred";
    case PartKind::UnlabeledArc: return "UA";
    case PartKind::LabeledArc: return "LA";
    case PartKind::CrossUnlabeled: return "XUA";
    case PartKind::CrossLabeled: return "XLA";
  }
  return "?";
}

Part Part::predicate(TaskId t, int i) {
  Part p;
  p.kind = PartKind::Predicate;
  p.tasks[0] = t;
  p.head = i;
  return p;
}

Part Part::unlabeled_arc(TaskId t, int i, int j) {
  Part p;
  p.kind = PartKind::UnlabeledArc;
  p.tasks[0] = t;
  p.head = i;
  p.modifier = j;
  return p;
}

Part Part::labeled_arc(TaskId t, int i, int j, LabelId label) {
  Part p = unlabeled_arc(t, i, j);
  p.kind = PartKind::LabeledArc;
  p.labels[0] = label;
  return p;
}

Part Part::cross_unlabeled(std::span<const TaskId> tasks, int i, int j) {
  if (tasks.size() < 2 || tasks.size() > 3) {
    throw LogicError("cross-task part needs 2 or 3 tasks");
  }
  Part p;
  p.kind = PartKind::CrossUnlabeled;
  p.num_tasks = static_cast<std::uint8_t>(tasks.size());
  std::copy(tasks.begin(), tasks.end(), p.tasks.begin());
  if (!std::is_sorted(p.tasks.begin(), p.tasks.begin() + p.num_tasks)) {
    throw LogicError("cross-task part tasks must be sorted");
  }
  p.head = i;
  p.modifier = j;
  return p;
}

Part Part::cross_labeled(std::span<const TaskId> tasks, int i, int j,
                         std::span<const LabelId> labels) {
  if (labels.size() != tasks.size()) {
    throw LogicError("cross-task labeled part needs one label per task");
  }
  Part p = cross_unlabeled(tasks, i, j);
  p.kind = PartKind::CrossLabeled;
  std::copy(labels.begin(), labels.end(), p.labels.begin());
  return p;
}

std::string describe(const Part& p) {
  std::ostringstream out;
  out << to_string(p.kind) << '(';
  for (int k = 0; k < p.num_tasks; ++k) out << (k ? "," : "") << 't' << p.tasks[k];
  out << ';' << p.head;
  if (p.kind != PartKind::Predicate) out << "->" << p.modifier;
  if (p.kind == PartKind::LabeledArc || p.kind == PartKind::CrossLabeled) {
    out << ':';
    for (int k = 0; k < p.num_tasks; ++k) out << (k ? "," : "") << p.labels[k];
  }
  out << ')';
  return out.str();
}

std::size_t PartHash::operator()(const Part& p) const noexcept {
  std::size_t h = static_cast<std::size_t>(p.kind);
  auto mix = [&h](std::size_t v) { h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2); };
  mix(p.num_tasks);
  for (int k = 0; k < 3; ++k) {
    mix(static_cast<std::size_t>(p.tasks[k] + 1));
    mix(static_cast<std::size_t>(p.labels[k] + 1));
  }
  mix(static_cast<std::size_t>(p.head));
  mix(static_cast<std::size_t>(p.modifier + 1));
  return h;
}

LabelId LabelVocab::add(TaskId task, const std::string& label) {
  if (label.empty()) throw DataError("empty label");
  auto& t = tasks_.at(task);
  auto [it, inserted] = t.ids.emplace(label, static_cast<LabelId>(t.names.size()));
  if (inserted) {
    t.names.push_back(label);
    t.deterministic.push_back(false);
  }
  return it->second;
}

std::optional<LabelId> LabelVocab::find(TaskId task, const std::string& label) const {
  const auto& t = tasks_.at(task);
  auto it = t.ids.find(label);
  if (it == t.ids.end()) return std::nullopt;
  return it->second;
}

LabelId LabelVocab::id(TaskId task, const std::string& label) const {
  auto found = find(task, label);
  if (!found) throw DataError("unknown label '" + label + "'");
  return *found;
}

const std::string& LabelVocab::name(TaskId task, LabelId label) const {
  return tasks_.at(task).names.at(label);
}

int LabelVocab::size(TaskId task) const {
  return static_cast<int>(tasks_.at(task).names.size());
}

bool LabelVocab::contains(TaskId task, LabelId label) const {
  return task >= 0 && task < num_tasks() && label >= 0 && label < size(task);
}

bool LabelVocab::is_deterministic(TaskId task, LabelId label) const {
  return contains(task, label) && tasks_[task].deterministic[label];
}

void LabelVocab::set_deterministic(TaskId task, LabelId label, bool value) {
  tasks_.at(task).deterministic.at(label) = value;
}

void compute_determinism(LabelVocab& vocab, TaskId task,
                         std::span<const SemanticGraph> graphs) {
  std::vector<bool> repeated(vocab.size(task), false);
  for (const auto& g : graphs) {
    if (g.task != task) continue;
    std::map<std::pair<int, LabelId>, int> seen;
    for (const auto& arc : g.arcs) {
      if (!vocab.contains(task, arc.label)) continue;
      if (++seen[{arc.head, arc.label}] > 1) repeated[arc.label] = true;
    }
  }
  for (LabelId l = 0; l < vocab.size(task); ++l) {
    vocab.set_deterministic(task, l, !repeated[l]);
  }
}

const char* to_string(Violation::Kind kind) {
  switch (kind) {
    case Violation::Kind::PredicateWithoutArc: return "predicate-without-arc";
    case Violation::Kind::ArcWithoutPredicate: return "arc-without-predicate";
    case Violation::Kind::DuplicateArc: return "multiple-labels";
    case Violation::Kind::SelfLoop: return "self-loop";
    case Violation::Kind::IndexOutOfRange: return "index-out-of-range";
    case Violation::Kind::UnknownLabel: return "unknown-label";
    case Violation::Kind::Determinism: return "determinism";
  }
  return "?";
}

std::string describe(const Violation& v) {
  std::ostringstream out;
  out << to_string(v.kind) << " at head " << v.head;
  if (v.modifier > 0) out << " modifier " << v.modifier;
  if (v.label >= 0) out << " label " << v.label;
  return out.str();
}

std::vector<Violation> validate(const SemanticGraph& graph, const LabelVocab& vocab) {
  using K = Violation::Kind;
  std::vector<Violation> out;
  const int n = graph.num_tokens;

  std::set<int> heads;
  std::set<std::pair<int, int>> pairs;
  std::map<std::pair<int, LabelId>, int> det_counts;
  for (const auto& arc : graph.arcs) {
    if (arc.head == arc.modifier) out.push_back({K::SelfLoop, arc.head, arc.modifier, arc.label});
    if (arc.head < 1 || arc.modifier < 1 || (n > 0 && (arc.head > n || arc.modifier > n))) {
      out.push_back({K::IndexOutOfRange, arc.head, arc.modifier, arc.label});
    }
    if (!pairs.insert({arc.head, arc.modifier}).second) {
      out.push_back({K::DuplicateArc, arc.head, arc.modifier, arc.label});
    }
    if (!vocab.contains(graph.task, arc.label)) {
      out.push_back({K::UnknownLabel, arc.head, arc.modifier, arc.label});
    } else if (vocab.is_deterministic(graph.task, arc.label)) {
      if (++det_counts[{arc.head, arc.label}] == 2) {
        out.push_back({K::Determinism, arc.head, 0, arc.label});
      }
    }
    heads.insert(arc.head);
  }

  std::set<int> preds(graph.predicates.begin(), graph.predicates.end());
  for (int p : preds) {
    if (!heads.count(p)) out.push_back({K::PredicateWithoutArc, p, 0, -1});
  }
  for (int h : heads) {
    if (!preds.count(h)) out.push_back({K::ArcWithoutPredicate, h, 0, -1});
  }
  return out;
}

std::vector<Violation> validate(const Multigraph& graph, const LabelVocab& vocab) {
  std::vector<Violation> out;
  for (const auto& g : graph.graphs) {
    auto v = validate(g, vocab);
    out.insert(out.end(), v.begin(), v.end());
  }
  return out;
}

std::vector<Part> parts_of(const SemanticGraph& graph) {
  std::vector<Part> parts;
  parts.reserve(graph.predicates.size() + 2 * graph.arcs.size());
  for (int p : graph.predicates) parts.push_back(Part::predicate(graph.task, p));
  for (const auto& arc : graph.arcs) {
    parts.push_back(Part::unlabeled_arc(graph.task, arc.head, arc.modifier));
    parts.push_back(Part::labeled_arc(graph.task, arc.head, arc.modifier, arc.label));
  }
  std::sort(parts.begin(), parts.end());
  return parts;
}

std::vector<std::vector<TaskId>> cross_task_sets(int num_tasks) {
  std::vector<std::vector<TaskId>> sets;
  for (TaskId a = 0; a < num_tasks; ++a) {
    for (TaskId b = a + 1; b < num_tasks; ++b) {
      sets.push_back({a, b});
      for (TaskId c = b + 1; c < num_tasks; ++c) sets.push_back({a, b, c});
    }
  }
  std::sort(sets.begin(), sets.end());
  return sets;
}

std::vector<Part> parts_of(const Multigraph& graph, bool cross_task) {
  std::vector<Part> parts;
  for (const auto& g : graph.graphs) {
    auto p = parts_of(g);
    parts.insert(parts.end(), p.begin(), p.end());
  }
  if (cross_task) {
    for (const auto& set : cross_task_sets(graph.num_tasks())) {
      for (const auto& arc : graph.task(set[0]).arcs) {
        std::vector<LabelId> labels{arc.label};
        for (std::size_t k = 1; k < set.size(); ++k) {
          auto l = graph.task(set[k]).label_of(arc.head, arc.modifier);
          if (!l) break;
          labels.push_back(*l);
        }
        if (labels.size() != set.size()) continue;
        parts.push_back(Part::cross_unlabeled(set, arc.head, arc.modifier));
        parts.push_back(Part::cross_labeled(set, arc.head, arc.modifier, labels));
      }
    }
  }
  std::sort(parts.begin(), parts.end());
  return parts;
}

SemanticGraph graph_from_parts(std::span<const Part> parts, TaskId task, int num_tokens) {
  SemanticGraph g;
  g.task = task;
  g.num_tokens = num_tokens;
  for (const auto& p : parts) {
    if (p.is_cross_task() || p.task() != task) continue;
    if (p.kind == PartKind::Predicate) g.predicates.push_back(p.head);
    if (p.kind == PartKind::LabeledArc) g.arcs.push_back({p.head, p.modifier, p.label()});
  }
  std::sort(g.arcs.begin(), g.arcs.end());
  std::sort(g.predicates.begin(), g.predicates.end());
  g.predicates.erase(std::unique(g.predicates.begin(), g.predicates.end()), g.predicates.end());
  return g;
}

Multigraph multigraph_union(std::vector<SemanticGraph> graphs) {
  Multigraph m;
  if (graphs.empty()) return m;
  m.num_tokens = graphs.front().num_tokens;
  for (std::size_t t = 0; t < graphs.size(); ++t) {
    if (graphs[t].num_tokens != m.num_tokens) {
      throw DataError("multigraph components disagree on sentence length (" +
                      std::to_string(graphs[t].num_tokens) + " vs " +
                      std::to_string(m.num_tokens) + ")");
    }
    graphs[t].task = static_cast<TaskId>(t);
  }
  m.graphs = std::move(graphs);
  return m;
}

bool has_cycle(const SemanticGraph& graph) {
  const int n = graph.num_tokens;
  std::vector<std::vector<int>> adj(n + 1);
  for (const auto& arc : graph.arcs) {
    if (arc.head == arc.modifier) return true;
    if (arc.head >= 0 && arc.head <= n && arc.modifier >= 0 && arc.modifier <= n) {
      adj[arc.head].push_back(arc.modifier);
    }
  }
  // 0 = unvisited, 1 = on stack, 2 = done
  std::vector<int> state(n + 1, 0);
  std::function<bool(int)> visit = [&](int u) {
    state[u] = 1;
    for (int v : adj[u]) {
      if (state[v] == 1) return true;
      if (state[v] == 0 && visit(v)) return true;
    }
    state[u] = 2;
    return false;
  };
  for (int u = 0; u <= n; ++u) {
    if (state[u] == 0 && visit(u)) return true;
  }
  return false;
}

}  // namespace mtsdp
