#pragma once

#include <span>
#include <vector>

#include "mtsdp/ad/tape.hpp"
#include "mtsdp/decode/decoder.hpp"
#include "mtsdp/model/encoder.hpp"

namespace mtsdp::model {

// <phi, psi>. Throws LogicError on a dimension mismatch.
double score_first_order(std::span<const double> phi, std::span<const double> psi);

// One task's contribution to a cross-task part. U and V are row-major
// rank x dim matrices.
struct CrossMember {
  bool labeled = true;
  std::span<const double> phi;
  std::span<const double> psi;
  std::span<const double> U;
  std::span<const double> V;
};

// sum_j prod_t [U_t phi_t]_j [V_t psi_t]_j over 2 or 3 members.
double score_cross_task(std::span<const CrossMember> members, int rank);

// Same value through the explicit parameter tensor
// W = sum_j outer_t (U_t[j,:] outer V_t[j,:]) contracted with
// outer_t (phi_t outer psi_t). For tests on small dimensions only; throws
// LogicError when rank * dim^(2 * members) exceeds 1e8.
double score_cross_task_explicit(std::span<const CrossMember> members, int rank);

struct ScoredParts {
  decode::ScoreTable table;
  std::vector<ad::Var> vars;  // per candidate part, on the tape
};

// Scores every candidate on `tape`. Cross-task candidates are an error for
// variants without cross-task parameters.
ScoredParts build_score_table(InputReps& reps, const decode::CandidateSet& candidates);

// Candidate parts of a sentence under the model's label filter, pruner and
// variant.
decode::CandidateSet model_candidates(const Model& model, const Sentence& sentence);

}  // namespace mtsdp::model
