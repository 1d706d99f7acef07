#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "mtsdp/graph.hpp"

namespace mtsdp::decode {

// Which (task, head, modifier) arcs survive pruning. Indexed over 1..n.
class ArcMask {
 public:
  ArcMask() = default;
  ArcMask(int num_tasks, int num_tokens, bool value);

  int num_tasks() const { return num_tasks_; }
  int num_tokens() const { return num_tokens_; }
  bool allowed(TaskId t, int i, int j) const { return kept_[index(t, i, j)] != 0; }
  void set(TaskId t, int i, int j, bool value) { kept_[index(t, i, j)] = value ? 1 : 0; }

 private:
  size_t index(TaskId t, int i, int j) const;
  int num_tasks_ = 0;
  int num_tokens_ = 0;
  std::vector<std::uint8_t> kept_;
};

class CandidateSet {
 public:
  CandidateSet() = default;
  CandidateSet(int num_tokens, int num_tasks) : num_tokens_(num_tokens), num_tasks_(num_tasks) {}

  int num_tokens() const { return num_tokens_; }
  int num_tasks() const { return num_tasks_; }
  bool has_cross_task() const { return has_cross_; }
  size_t size() const { return parts_.size(); }
  const std::vector<Part>& parts() const { return parts_; }
  const Part& part(size_t k) const { return parts_[k]; }

  // Returns the index of the part, adding it if new.
  size_t add(const Part& part);
  std::optional<size_t> find(const Part& part) const;
  bool contains(const Part& part) const { return find(part).has_value(); }

 private:
  int num_tokens_ = 0;
  int num_tasks_ = 0;
  bool has_cross_ = false;
  std::vector<Part> parts_;
  std::unordered_map<Part, size_t, PartHash> index_;
};

// All ordered pairs (i, j), i != j, per task with every label listed for that
// task, minus arcs the mask rejects. Predicates are added for heads with at
// least one candidate arc. With cross_task, adds for every task set of size 2
// and 3 an unlabeled part per arc shared by all member tasks, and a labeled
// part per label combination.
CandidateSet enumerate_candidates(int num_tokens,
                                  const std::vector<std::vector<LabelId>>& labels_per_task,
                                  const ArcMask* mask, bool cross_task);

struct CostSpec {
  double fp_cost = 0.4;
  double fn_cost = 0.6;
  bool enabled = true;
  const Multigraph* gold = nullptr;
};

// Part scores aligned with a CandidateSet.
struct ScoreTable {
  std::vector<double> scores;
  bool cost_augmented = false;
  double fp_cost = 0.0;
  double fn_cost = 0.0;
  int gold_labeled_arcs = 0;
  std::vector<std::uint8_t> in_gold;  // per part, labeled arcs only
};

// Weighted Hamming cost from labeled-arc false positive/negative counts.
double weighted_hamming(int false_positives, int false_negatives, double fp_cost, double fn_cost);

ScoreTable augment_costs(const ScoreTable& table, const CandidateSet& candidates,
                         const CostSpec& cost);

// Cost of `y` against the gold graph the table was augmented with.
double recovered_cost(const ScoreTable& table, const CandidateSet& candidates, const Multigraph& y);

// Sum of part scores of `y` (including cross-task parts when the candidate set
// has them). Throws LogicError if `y` uses a part outside the candidates.
double score_of(const ScoreTable& table, const CandidateSet& candidates, const Multigraph& y);

// Restricts `gold` to arcs that are candidates.
Multigraph restrict_to_candidates(const Multigraph& gold, const CandidateSet& candidates);

Multigraph empty_multigraph(int num_tasks, int num_tokens);

enum class FactorKind : std::uint8_t { XorWithOutput, OrWithOutput, AtMostOne, DenseAnd };

struct Factor {
  FactorKind kind = FactorKind::XorWithOutput;
  std::vector<int> vars;  // output variable last for the *WithOutput kinds
  double potential = 0.0;
};

struct FactorGraph {
  std::vector<double> unary;   // per variable
  std::vector<int> var_part;   // candidate part index per variable
  std::vector<int> part_var;   // variable per candidate part, -1 if none
  std::vector<Factor> factors;

  int num_vars() const { return static_cast<int>(unary.size()); }
};

FactorGraph build_factor_graph(const CandidateSet& candidates, const ScoreTable& table,
                               const LabelVocab& vocab);

struct Ad3Options {
  int max_iter = 500;
  double rho = 0.1;
  double tol = 1e-6;
  // Branch-and-bound over the relaxation when it is fractional; 1 disables.
  int max_nodes = 200;
  bool record_dual = false;
};

struct Ad3Result {
  std::vector<double> posteriors;  // of the root relaxation
  std::vector<double> assignment;  // best feasible 0/1 assignment found
  // Residuals fell below tol and the returned assignment is certified optimal
  // by the dual bound (fractional fixed points do not count).
  bool converged = false;
  int iterations = 0;  // summed over search nodes
  int nodes = 0;
  double primal_objective = 0.0;  // of the rounded solution
  double dual_bound = 0.0;
  std::vector<double> dual_history;  // root node: best dual bound per iteration
};

Ad3Result ad3(const FactorGraph& graph, const Ad3Options& options = {});

// Dual objective: sum over factors of the local maximum under the given
// per-factor duals (laid out as in ad3). Exposed for tests.
double dual_value(const FactorGraph& graph, const std::vector<std::vector<double>>& lambda);

// Factor-graph rounding: thresholds at 0.5 (ties inactive), then per active
// unlabeled arc keeps the argmax label, drops labels of inactive arcs, keeps
// the highest-posterior arc per deterministic label and head, and sets each
// predicate to whether any of its arcs survived. Returns a 0/1 vector.
std::vector<double> round_assignment(const std::vector<double>& posteriors, const FactorGraph& graph);

// Objective of a 0/1 assignment: unary scores plus potentials of DENSE-AND
// factors whose variables are all on.
double assignment_score(const std::vector<double>& x, const FactorGraph& graph);

// round_assignment followed by conversion to a multigraph.
Multigraph round_repair(const std::vector<double>& posteriors, const FactorGraph& graph,
                        const CandidateSet& candidates);

struct BruteForceResult {
  Multigraph graph;
  double objective = 0.0;
};

// Exact argmax by enumeration. All factors touch a single head, so heads are
// solved independently. Ties go to the lexicographically smallest part list
// per head. Throws LogicError when a head has more than `max_assignments`
// joint assignments.
BruteForceResult brute_force(const CandidateSet& candidates, const ScoreTable& table,
                             const LabelVocab& vocab, long long max_assignments = 1LL << 22);

enum class Method : std::uint8_t { Ad3, Exact };

struct DecodeOptions {
  Method method = Method::Ad3;
  Ad3Options ad3;
};

struct DecodeOutcome {
  Multigraph graph;
  double objective = 0.0;
  std::optional<Ad3Result> ad3;
};

DecodeOutcome decode_table(const CandidateSet& candidates, const ScoreTable& table,
                           const LabelVocab& vocab, const DecodeOptions& options = {});

}  // namespace mtsdp::decode
