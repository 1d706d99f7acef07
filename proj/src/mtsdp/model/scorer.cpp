#include "mtsdp/model/scorer.hpp"

#include <cmath>
#include <map>
#include <string>

#include "mtsdp/error.hpp"

namespace mtsdp::model {

double score_first_order(std::span<const double> phi, std::span<const double> psi) {
  if (phi.size() != psi.size()) {
    throw LogicError("score_first_order: dimensions " + std::to_string(phi.size()) + " and " +
                     std::to_string(psi.size()));
  }
  double s = 0.0;
  for (std::size_t k = 0; k < phi.size(); ++k) s += phi[k] * psi[k];
  return s;
}

namespace {

void check_members(std::span<const CrossMember> members, int rank) {
  if (members.size() != 2 && members.size() != 3) {
    throw LogicError("cross-task parts need 2 or 3 tasks");
  }
  if (rank <= 0) throw LogicError("rank must be positive");
  for (const auto& m : members) {
    if (m.labeled != members[0].labeled) {
      throw LogicError("cross-task part mixes labeled and unlabeled arcs");
    }
    if (m.phi.size() != m.psi.size() || m.phi.empty()) throw LogicError("phi and psi dims differ");
    if (m.U.size() != rank * m.phi.size() || m.V.size() != rank * m.psi.size()) {
      throw LogicError("U/V shape does not match rank x dim");
    }
  }
}

}  // namespace

double score_cross_task(std::span<const CrossMember> members, int rank) {
  check_members(members, rank);
  double s = 0.0;
  for (int j = 0; j < rank; ++j) {
    double prod = 1.0;
    for (const auto& m : members) {
      const std::size_t d = m.phi.size();
      prod *= score_first_order(m.U.subspan(j * d, d), m.phi) *
              score_first_order(m.V.subspan(j * d, d), m.psi);
    }
    s += prod;
  }
  return s;
}

double score_cross_task_explicit(std::span<const CrossMember> members, int rank) {
  check_members(members, rank);
  const std::size_t k = members.size();
  const std::size_t d = members[0].phi.size();
  for (const auto& m : members) {
    if (m.phi.size() != d) throw LogicError("explicit tensor needs equal dims");
  }
  const double entries = std::pow(double(d), double(2 * k));
  if (entries * rank > 1e8) throw LogicError("explicit tensor too large");
  const std::size_t total = static_cast<std::size_t>(entries);

  // Index digits: (a_1, b_1, ..., a_k, b_k), a for phi, b for psi.
  std::vector<double> W(total, 0.0);
  std::vector<std::size_t> digit(2 * k);
  for (std::size_t e = 0; e < total; ++e) {
    std::size_t rest = e;
    for (std::size_t p = 2 * k; p-- > 0;) {
      digit[p] = rest % d;
      rest /= d;
    }
    double w = 0.0;
    for (int j = 0; j < rank; ++j) {
      double prod = 1.0;
      for (std::size_t t = 0; t < k; ++t) {
        prod *= members[t].U[j * d + digit[2 * t]] * members[t].V[j * d + digit[2 * t + 1]];
      }
      w += prod;
    }
    W[e] = w;
  }
  double s = 0.0;
  for (std::size_t e = 0; e < total; ++e) {
    std::size_t rest = e;
    for (std::size_t p = 2 * k; p-- > 0;) {
      digit[p] = rest % d;
      rest /= d;
    }
    double x = 1.0;
    for (std::size_t t = 0; t < k; ++t) {
      x *= members[t].phi[digit[2 * t]] * members[t].psi[digit[2 * t + 1]];
    }
    s += W[e] * x;
  }
  return s;
}

namespace {

// Per-sentence memo of the factorized cross-task terms.
class CrossTerms {
 public:
  explicit CrossTerms(InputReps& reps) : reps_(reps), tape_(reps.tape()) {}

  // [U phi]_j [V psi]_j as an r-vector for one member arc.
  ad::Var member(TaskId t, bool labeled, int i, int j, LabelId l) {
    const auto key = std::make_tuple(t, labeled ? l : -1, i, j);
    auto it = member_.find(key);
    if (it != member_.end()) return it->second;
    const ad::Var v = tape_.mul(left(t, labeled, i, j), right(t, labeled, l));
    member_.emplace(key, v);
    return v;
  }

 private:
  std::string name(TaskId t, const char* what) { return "t" + std::to_string(t) + "." + what; }

  ad::Var left(TaskId t, bool labeled, int i, int j) {
    const auto key = std::make_tuple(t, labeled ? 1 : 0, i, j);
    auto it = left_.find(key);
    if (it != left_.end()) return it->second;
    const ad::Var phi = reps_.arc(t, labeled ? PartKind::LabeledArc : PartKind::UnlabeledArc, i, j);
    const ad::Var v =
        tape_.matvec(reps_.model().params.at(name(t, labeled ? "cross.U_la" : "cross.U_ua")), phi);
    left_.emplace(key, v);
    return v;
  }

  ad::Var right(TaskId t, bool labeled, LabelId l) {
    const auto key = std::make_pair(t, labeled ? l : -1);
    auto it = right_.find(key);
    if (it != right_.end()) return it->second;
    const ad::Var psi =
        labeled ? reps_.param_row(name(t, "psi.la"), l) : reps_.param_row(name(t, "psi.ua"), 0);
    const ad::Var v =
        tape_.matvec(reps_.model().params.at(name(t, labeled ? "cross.V_la" : "cross.V_ua")), psi);
    right_.emplace(key, v);
    return v;
  }

  InputReps& reps_;
  ad::Tape& tape_;
  std::map<std::tuple<TaskId, int, int, int>, ad::Var> left_;
  std::map<std::pair<TaskId, int>, ad::Var> right_;
  std::map<std::tuple<TaskId, int, int, int>, ad::Var> member_;
};

}  // namespace

ScoredParts build_score_table(InputReps& reps, const decode::CandidateSet& candidates) {
  ad::Tape& tape = reps.tape();
  Model& model = reps.model();
  if (candidates.has_cross_task() && !uses_cross_task(model.config.variant)) {
    throw LogicError(std::string("variant ") + to_string(model.config.variant) +
                     " has no cross-task parameters");
  }
  ScoredParts out;
  out.vars.reserve(candidates.size());
  out.table.scores.reserve(candidates.size());
  std::map<std::tuple<TaskId, int, int>, ad::Var> la_scores;
  CrossTerms cross(reps);
  for (const Part& p : candidates.parts()) {
    const std::string t = "t" + std::to_string(p.task());
    ad::Var s;
    switch (p.kind) {
      case PartKind::Predicate:
        s = tape.dot(reps.pred(p.task(), p.head), reps.param_row(t + ".psi.pred", 0));
        break;
      case PartKind::UnlabeledArc:
        s = tape.dot(reps.arc(p.task(), PartKind::UnlabeledArc, p.head, p.modifier),
                     reps.param_row(t + ".psi.ua", 0));
        break;
      case PartKind::LabeledArc: {
        // All label scores of an arc in one product.
        const auto key = std::make_tuple(p.task(), p.head, p.modifier);
        auto it = la_scores.find(key);
        if (it == la_scores.end()) {
          const ad::Var phi = reps.arc(p.task(), PartKind::LabeledArc, p.head, p.modifier);
          it = la_scores.emplace(key, tape.matvec(model.params.at(t + ".psi.la"), phi)).first;
        }
        s = tape.pick(it->second, p.label());
        break;
      }
      case PartKind::CrossUnlabeled:
      case PartKind::CrossLabeled: {
        const bool labeled = p.kind == PartKind::CrossLabeled;
        ad::Var prod;
        for (int k = 0; k < p.num_tasks; ++k) {
          const ad::Var m =
              cross.member(p.tasks[k], labeled, p.head, p.modifier, labeled ? p.labels[k] : -1);
          prod = prod.valid() ? tape.mul(prod, m) : m;
        }
        s = tape.sum(prod);
        break;
      }
    }
    out.vars.push_back(s);
    out.table.scores.push_back(tape.scalar(s));
  }
  return out;
}

decode::CandidateSet model_candidates(const Model& model, const Sentence& sentence) {
  std::optional<decode::ArcMask> mask;
  if (model.config.use_pruner && !model.pruner.empty()) {
    mask = model.pruner.prune(sentence, model.config.prune_threshold);
  }
  return decode::enumerate_candidates(sentence.size(), model.candidate_labels,
                                      mask ? &*mask : nullptr, uses_cross_task(model.config.variant));
}

}  // namespace mtsdp::model
