#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "mtsdp/error.hpp"

namespace mtsdp {

using TaskId = int;
using LabelId = int;

// Index 0 is reserved for the virtual root used by the optional TOP convention.
inline constexpr int kVirtualRoot = 0;
inline constexpr const char* kTopLabel = "TOP";

struct Token {
  int index = 0;  // 1-based
  std::string form;
  std::string lemma;
  std::string pos;
};

struct Sentence {
  std::string id;
  std::vector<Token> tokens;

  int size() const { return static_cast<int>(tokens.size()); }
  const Token& token(int index) const { return tokens.at(index - 1); }
};

struct LabeledArc {
  int head = 0;
  int modifier = 0;
  LabelId label = -1;

  auto operator<=>(const LabeledArc&) const = default;
};

// A labeled directed graph for one task. Arcs are kept sorted by
// (head, modifier). Predicates are stored explicitly so that inconsistent
// graphs can be represented and reported by validate().
struct SemanticGraph {
  TaskId task = 0;
  int num_tokens = 0;
  std::vector<LabeledArc> arcs;
  std::vector<int> predicates;

  // Builds a graph whose predicate set is derived from the arc heads.
  static SemanticGraph from_arcs(TaskId task, int num_tokens,
                                 std::vector<LabeledArc> arcs);

  bool empty() const { return arcs.empty() && predicates.empty(); }
  std::optional<LabelId> label_of(int head, int modifier) const;
  bool operator==(const SemanticGraph&) const = default;
};

struct Multigraph {
  int num_tokens = 0;
  std::vector<SemanticGraph> graphs;  // indexed by task

  int num_tasks() const { return static_cast<int>(graphs.size()); }
  const SemanticGraph& task(TaskId t) const { return graphs.at(t); }
  bool operator==(const Multigraph&) const = default;
};

enum class PartKind : std::uint8_t {
  Predicate,
  UnlabeledArc,
  LabeledArc,
  CrossUnlabeled,
  CrossLabeled,
};

const char* to_string(PartKind kind);

// A scored local structure. First-order parts use tasks[0] only; cross-task
// parts list their (sorted) task set and, when labeled, one label per task.
struct Part {
  PartKind kind = PartKind::Predicate;
  std::uint8_t num_tasks = 1;
  std::array<TaskId, 3> tasks{-1, -1, -1};
  int head = 0;
  int modifier = -1;
  std::array<LabelId, 3> labels{-1, -1, -1};

  static Part predicate(TaskId t, int i);
  static Part unlabeled_arc(TaskId t, int i, int j);
  static Part labeled_arc(TaskId t, int i, int j, LabelId label);
  static Part cross_unlabeled(std::span<const TaskId> tasks, int i, int j);
  static Part cross_labeled(std::span<const TaskId> tasks, int i, int j,
                            std::span<const LabelId> labels);

  TaskId task() const { return tasks[0]; }
  LabelId label() const { return labels[0]; }
  bool is_cross_task() const {
    return kind == PartKind::CrossUnlabeled || kind == PartKind::CrossLabeled;
  }
  std::span<const TaskId> task_set() const { return {tasks.data(), num_tasks}; }

  auto operator<=>(const Part&) const = default;
};

std::string describe(const Part& part);

struct PartHash {
  std::size_t operator()(const Part& p) const noexcept;
};

// Per-task label inventories with interned ids and deterministic flags.
class LabelVocab {
 public:
  LabelVocab() = default;
  explicit LabelVocab(int num_tasks) : tasks_(num_tasks) {}

  int num_tasks() const { return static_cast<int>(tasks_.size()); }
  void resize(int num_tasks) { tasks_.resize(num_tasks); }

  LabelId add(TaskId task, const std::string& label);
  std::optional<LabelId> find(TaskId task, const std::string& label) const;
  LabelId id(TaskId task, const std::string& label) const;  // throws if absent
  const std::string& name(TaskId task, LabelId label) const;
  int size(TaskId task) const;
  bool contains(TaskId task, LabelId label) const;

  bool is_deterministic(TaskId task, LabelId label) const;
  void set_deterministic(TaskId task, LabelId label, bool value);

  const std::vector<std::string>& labels(TaskId task) const { return tasks_.at(task).names; }

 private:
  struct TaskLabels {
    std::vector<std::string> names;
    std::unordered_map<std::string, LabelId> ids;
    std::vector<bool> deterministic;
  };
  std::vector<TaskLabels> tasks_;
};

// Marks as deterministic every label that never labels two arcs under the
// same head in any of the given graphs (graphs of other tasks are ignored).
void compute_determinism(LabelVocab& vocab, TaskId task,
                         std::span<const SemanticGraph> graphs);

struct Violation {
  enum class Kind {
    PredicateWithoutArc,
    ArcWithoutPredicate,
    DuplicateArc,
    SelfLoop,
    IndexOutOfRange,
    UnknownLabel,
    Determinism,
  };
  Kind kind;
  int head = 0;
  int modifier = 0;
  LabelId label = -1;

  bool operator==(const Violation&) const = default;
};

const char* to_string(Violation::Kind kind);
std::string describe(const Violation& v);

// Checks the structural constraints: the predicate/outgoing-arc
// biconditional, one label per (head, modifier), determinism, label and index
// sanity. Returns an empty list for a well-formed graph.
std::vector<Violation> validate(const SemanticGraph& graph, const LabelVocab& vocab);
std::vector<Violation> validate(const Multigraph& graph, const LabelVocab& vocab);

// First-order parts: one Predicate per predicate, one UnlabeledArc and one
// LabeledArc per arc. Sorted.
std::vector<Part> parts_of(const SemanticGraph& graph);

// All parts of a multigraph, optionally including the cross-task parts implied
// by arcs (i, j) present in every task of a task set.
std::vector<Part> parts_of(const Multigraph& graph, bool cross_task);

// Inverse of parts_of for one task: arcs from LabeledArc parts, predicates
// from Predicate parts.
SemanticGraph graph_from_parts(std::span<const Part> parts, TaskId task, int num_tokens);

// Task sets of size 2 and 3 over num_tasks tasks, in lexicographic order.
std::vector<std::vector<TaskId>> cross_task_sets(int num_tasks);

Multigraph multigraph_union(std::vector<SemanticGraph> graphs);

bool has_cycle(const SemanticGraph& graph);

}  // namespace mtsdp
