#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mtsdp/ad/param.hpp"

namespace mtsdp::ad {

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.9;
  double eps = 1e-8;
};

// First and second moments for every parameter of a store, in store order.
struct AdamState {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  long step = 0;

  static AdamState for_store(const ParamStore& store);
};

// One bias-corrected Adam update of every trainable parameter from its
// accumulated gradient. Throws naming the parameter if a gradient is not
// finite; nothing is modified in that case.
void adam_step(ParamStore& store, AdamState& state, double eta, const AdamOptions& options = {});

// Adam restricted to the listed coordinates of one parameter; moments of
// other coordinates are left untouched. Advances `step` once.
void adam_step_sparse(Param& param, std::vector<double>& m, std::vector<double>& v, long& step,
                      std::span<const std::size_t> coords, double eta,
                      const AdamOptions& options = {});

// Rescales the gradients so that their joint l2 norm is at most max_norm.
// Returns the norm before clipping.
double clip_global_norm(std::span<const std::span<double>> grads, double max_norm = 1.0);
double clip_global_norm(ParamStore& store, double max_norm = 1.0);
double global_grad_norm(const ParamStore& store);

// Adds l2 * value to the gradient of every trainable parameter; returns
// l2/2 * ||theta||^2.
double add_l2_gradient(ParamStore& store, double l2);

// Objective for finite-difference checks: returns f(params) and, when asked,
// leaves df/dparams in the parameters' gradient accumulators (the checker
// zeroes them first).
using Objective = std::function<double(bool with_gradient)>;

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t checked = 0;
};

// Central differences per coordinate; relative error is
// |analytic - numeric| / max(1, |analytic|). When max_coords_per_param > 0,
// only that many evenly spaced coordinates of each parameter are probed.
GradCheckResult finite_diff_check(const Objective& f, std::span<Param* const> params,
                                  double h = 1e-5, std::size_t max_coords_per_param = 0);

}  // namespace mtsdp::ad
