#include "mtsdp/ad/optim.hpp"

#include <algorithm>
#include <cmath>

#include "mtsdp/error.hpp"

namespace mtsdp::ad {

AdamState AdamState::for_store(const ParamStore& store) {
  AdamState s;
  for (const auto* p : store.all()) {
    s.m.emplace_back(p->size(), 0.0);
    s.v.emplace_back(p->size(), 0.0);
  }
  return s;
}

void adam_step(ParamStore& store, AdamState& state, double eta, const AdamOptions& options) {
  auto params = store.all();
  if (state.m.size() != params.size()) throw LogicError("Adam state does not match the parameters");
  for (const auto* p : params) {
    if (!p->trainable()) continue;
    for (double g : p->grads()) {
      if (!std::isfinite(g)) throw LogicError("non-finite gradient in parameter " + p->name());
    }
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(options.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(options.beta2, static_cast<double>(state.step));
  for (std::size_t k = 0; k < params.size(); ++k) {
    Param& p = *params[k];
    if (!p.trainable()) continue;
    auto values = p.values();
    auto grads = p.grads();
    auto& m = state.m[k];
    auto& v = state.v[k];
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double g = grads[i];
      m[i] = options.beta1 * m[i] + (1.0 - options.beta1) * g;
      v[i] = options.beta2 * v[i] + (1.0 - options.beta2) * g * g;
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      values[i] -= eta * mhat / (std::sqrt(vhat) + options.eps);
    }
  }
}

void adam_step_sparse(Param& param, std::vector<double>& m, std::vector<double>& v, long& step,
                      std::span<const std::size_t> coords, double eta, const AdamOptions& options) {
  auto values = param.values();
  auto grads = param.grads();
  if (m.size() != values.size() || v.size() != values.size()) {
    throw LogicError("Adam moments do not match " + param.name());
  }
  for (std::size_t i : coords) {
    if (!std::isfinite(grads[i])) throw LogicError("non-finite gradient in parameter " + param.name());
  }
  ++step;
  const double c1 = 1.0 - std::pow(options.beta1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(options.beta2, static_cast<double>(step));
  for (std::size_t i : coords) {
    const double g = grads[i];
    m[i] = options.beta1 * m[i] + (1.0 - options.beta1) * g;
    v[i] = options.beta2 * v[i] + (1.0 - options.beta2) * g * g;
    values[i] -= eta * (m[i] / c1) / (std::sqrt(v[i] / c2) + options.eps);
  }
}

double clip_global_norm(std::span<const std::span<double>> grads, double max_norm) {
  double sq = 0.0;
  for (auto g : grads) {
    for (double x : g) sq += x * x;
  }
  const double norm = std::sqrt(sq);
  if (norm > max_norm) {
    const double factor = max_norm / norm;
    for (auto g : grads) {
      for (double& x : g) x *= factor;
    }
  }
  return norm;
}

double clip_global_norm(ParamStore& store, double max_norm) {
  std::vector<std::span<double>> grads;
  for (auto* p : store.trainable()) grads.push_back(p->grads());
  return clip_global_norm(grads, max_norm);
}

double global_grad_norm(const ParamStore& store) {
  double sq = 0.0;
  for (const auto* p : store.all()) {
    if (!p->trainable()) continue;
    for (double x : p->grads()) sq += x * x;
  }
  return std::sqrt(sq);
}

double add_l2_gradient(ParamStore& store, double l2) {
  if (l2 == 0.0) return 0.0;
  double sq = 0.0;
  for (auto* p : store.trainable()) {
    auto values = p->values();
    auto grads = p->grads();
    for (std::size_t i = 0; i < values.size(); ++i) {
      grads[i] += l2 * values[i];
      sq += values[i] * values[i];
    }
  }
  return 0.5 * l2 * sq;
}

GradCheckResult finite_diff_check(const Objective& f, std::span<Param* const> params, double h,
                                  std::size_t max_coords_per_param) {
  for (auto* p : params) p->zero_grad();
  f(true);
  std::vector<std::vector<double>> analytic;
  for (auto* p : params) analytic.emplace_back(p->grads().begin(), p->grads().end());

  GradCheckResult result;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Param& p = *params[k];
    auto values = p.values();
    const std::size_t n = values.size();
    std::size_t stride = 1;
    if (max_coords_per_param > 0 && n > max_coords_per_param) {
      stride = (n + max_coords_per_param - 1) / max_coords_per_param;
    }
    for (std::size_t i = 0; i < n; i += stride) {
      const double saved = values[i];
      values[i] = saved + h;
      const double up = f(false);
      values[i] = saved - h;
      const double down = f(false);
      values[i] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double a = analytic[k][i];
      const double err = std::abs(a - numeric) / std::max(1.0, std::abs(a));
      ++result.checked;
      if (err > result.max_rel_error || result.worst_param.empty()) {
        if (err >= result.max_rel_error) {
          result.max_rel_error = err;
          result.worst_param = p.name();
          result.worst_index = i;
          result.analytic = a;
          result.numeric = numeric;
        }
      }
    }
  }
  for (auto* p : params) p->zero_grad();
  return result;
}

}  // namespace mtsdp::ad
