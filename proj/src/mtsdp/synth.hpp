#pragma once

#include <cstdint>

#include "mtsdp/sdp_io.hpp"

namespace mtsdp::synth {

// Rule-generated parallel corpora for tests and demos. Tokens get random POS
// tags from {N, V, A, D, P} and forms like "n3". Every arc is a function of
// (head POS, modifier POS, signed distance bucket), so the corpus is
// separable for the arc pruner and learnable by the parser.
//
// Task 0 ("dm"): V->N (ARG1 left, ARG2 right), A->N at +1 (MOD), D->N at
// +1/+2 (BV), P->N at +1..+3 (OBJ).
// Task 1 ("pas"): as task 0 with other label names, except that determiner
// arcs run N->D.
// Task 2 ("psd"): V->N (ACT/PAT), N->A at -1 (RSTR), V->P (LOC).
// Pairwise unlabeled similarity of the three tasks is about 70%.
struct Options {
  int sentences = 50;
  int min_tokens = 5;
  int max_tokens = 9;
  int tasks = 1;  // 1 to 3
  std::uint64_t seed = 1;
};

MultitaskCorpus generate(const Options& options);

// Mean over task pairs of the unlabeled arc F1 between their gold graphs.
double arc_overlap(const MultitaskCorpus& corpus);

}  // namespace mtsdp::synth
