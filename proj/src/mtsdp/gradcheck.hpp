#pragma once

#include <cstdint>

#include "mtsdp/ad/optim.hpp"
#include "mtsdp/config.hpp"

namespace mtsdp {

// Finite-difference check of the full training loss (encoder, scorer,
// hinge with exact decoding, l2) on one random sentence with a tiny model
// whose parameters are drawn from U[-0.5, 0.5].
struct GradcheckOptions {
  std::uint64_t seed = 7;
  Variant variant = Variant::Freda3;
  int tasks = 2;
  int tokens = 3;
  int lstm_dim = 8;
  int rep_dim = 8;
  int rank = 4;
  double h = 1e-5;
};

struct GradcheckReport {
  ad::GradCheckResult check;
  double loss = 0.0;  // at the unperturbed parameters
};

GradcheckReport gradcheck_full_loss(const GradcheckOptions& options);

}  // namespace mtsdp
