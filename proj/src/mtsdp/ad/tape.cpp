#include "mtsdp/ad/tape.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mtsdp/error.hpp"

namespace mtsdp::ad {
namespace {

double logistic(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

[[noreturn]] void shape_error(const char* op, int got, int want) {
  throw LogicError(std::string(op) + ": dimension " + std::to_string(got) + " does not match " +
                   std::to_string(want));
}

}  // namespace

void Tape::check_var(Var v) const {
  if (v.id < 0 || v.id >= static_cast<int>(nodes_.size())) throw LogicError("invalid tape variable");
}

Var Tape::push(Node node, int len) {
  node.off = values_.size();
  node.len = len;
  values_.resize(values_.size() + len, 0.0);
  nodes_.push_back(node);
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Tape::constant(std::span<const double> values) {
  Var v = push({Op::Constant}, static_cast<int>(values.size()));
  std::copy(values.begin(), values.end(), val(v.id));
  return v;
}

Var Tape::zeros(int dim) { return push({Op::Constant}, dim); }

Var Tape::param(Param& p) {
  Node n{Op::ParamRef};
  n.param = &p;
  n.param_off = 0;
  Var v = push(n, static_cast<int>(p.size()));
  std::copy(p.values().begin(), p.values().end(), val(v.id));
  return v;
}

Var Tape::param_row(Param& p, int row) {
  if (row < 0 || row >= p.rows()) {
    throw LogicError("row " + std::to_string(row) + " out of range for " + p.name());
  }
  Node n{Op::ParamRef};
  n.param = &p;
  n.param_off = std::size_t(row) * p.cols();
  Var v = push(n, p.cols());
  auto r = p.row(row);
  std::copy(r.begin(), r.end(), val(v.id));
  return v;
}

Var Tape::matvec(Param& w, Var x) {
  check_var(x);
  if (dim(x) != w.cols()) shape_error("matvec", dim(x), w.cols());
  return matvec_cols(w, 0, x);
}

Var Tape::matvec_cols(Param& w, int col0, Var x) {
  check_var(x);
  const int m = dim(x);
  if (col0 < 0 || col0 + m > w.cols()) shape_error("matvec_cols", col0 + m, w.cols());
  Node n{Op::MatVec};
  n.a = x.id;
  n.param = &w;
  n.aux = col0;
  Var y = push(n, w.rows());
  const double* xv = val(x.id);
  double* yv = val(y.id);
  const int cols = w.cols();
  const double* wv = w.values().data();
  for (int r = 0; r < w.rows(); ++r) {
    const double* row = wv + std::size_t(r) * cols + col0;
    double s = 0.0;
    for (int c = 0; c < m; ++c) s += row[c] * xv[c];
    yv[r] = s;
  }
  return y;
}

Var Tape::add(Var a, Var b) {
  check_var(a);
  check_var(b);
  if (dim(a) != dim(b)) shape_error("add", dim(b), dim(a));
  Node n{Op::Add};
  n.a = a.id;
  n.b = b.id;
  Var y = push(n, dim(a));
  const double* av = val(a.id);
  const double* bv = val(b.id);
  double* yv = val(y.id);
  for (int k = 0; k < dim(y); ++k) yv[k] = av[k] + bv[k];
  return y;
}

Var Tape::add(std::span<const Var> terms) {
  if (terms.empty()) throw LogicError("add: no terms");
  const int d = dim(terms[0]);
  Node n{Op::AddN};
  n.list_off = lists_.size();
  n.list_len = static_cast<int>(terms.size());
  for (Var t : terms) {
    check_var(t);
    if (dim(t) != d) shape_error("add", dim(t), d);
    lists_.push_back(t.id);
  }
  Var y = push(n, d);
  double* yv = val(y.id);
  for (Var t : terms) {
    const double* tv = val(t.id);
    for (int k = 0; k < d; ++k) yv[k] += tv[k];
  }
  return y;
}

Var Tape::mul(Var a, Var b) {
  check_var(a);
  check_var(b);
  if (dim(a) != dim(b)) shape_error("mul", dim(b), dim(a));
  Node n{Op::Mul};
  n.a = a.id;
  n.b = b.id;
  Var y = push(n, dim(a));
  const double* av = val(a.id);
  const double* bv = val(b.id);
  double* yv = val(y.id);
  for (int k = 0; k < dim(y); ++k) yv[k] = av[k] * bv[k];
  return y;
}

Var Tape::tanh(Var a) {
  check_var(a);
  Node n{Op::Tanh};
  n.a = a.id;
  Var y = push(n, dim(a));
  const double* av = val(a.id);
  double* yv = val(y.id);
  for (int k = 0; k < dim(y); ++k) yv[k] = std::tanh(av[k]);
  return y;
}

Var Tape::sigmoid(Var a) {
  check_var(a);
  Node n{Op::Sigmoid};
  n.a = a.id;
  Var y = push(n, dim(a));
  const double* av = val(a.id);
  double* yv = val(y.id);
  for (int k = 0; k < dim(y); ++k) yv[k] = logistic(av[k]);
  return y;
}

Var Tape::concat(std::span<const Var> parts) {
  Node n{Op::Concat};
  n.list_off = lists_.size();
  n.list_len = static_cast<int>(parts.size());
  int total = 0;
  for (Var p : parts) {
    check_var(p);
    lists_.push_back(p.id);
    total += dim(p);
  }
  Var y = push(n, total);
  double* yv = val(y.id);
  for (Var p : parts) {
    const double* pv = val(p.id);
    std::copy(pv, pv + dim(p), yv);
    yv += dim(p);
  }
  return y;
}

Var Tape::slice(Var a, int offset, int length) {
  check_var(a);
  if (offset < 0 || length < 0 || offset + length > dim(a)) shape_error("slice", offset + length, dim(a));
  Node n{Op::Slice};
  n.a = a.id;
  n.aux = offset;
  Var y = push(n, length);
  const double* av = val(a.id) + offset;
  std::copy(av, av + length, val(y.id));
  return y;
}

Var Tape::dot(Var a, Var b) {
  check_var(a);
  check_var(b);
  if (dim(a) != dim(b)) shape_error("dot", dim(b), dim(a));
  Node n{Op::Dot};
  n.a = a.id;
  n.b = b.id;
  Var y = push(n, 1);
  const double* av = val(a.id);
  const double* bv = val(b.id);
  double s = 0.0;
  for (int k = 0; k < dim(a); ++k) s += av[k] * bv[k];
  *val(y.id) = s;
  return y;
}

Var Tape::sum(Var a) {
  check_var(a);
  Node n{Op::Sum};
  n.a = a.id;
  Var y = push(n, 1);
  const double* av = val(a.id);
  double s = 0.0;
  for (int k = 0; k < dim(a); ++k) s += av[k];
  *val(y.id) = s;
  return y;
}

Var Tape::pick(Var a, int index) {
  check_var(a);
  if (index < 0 || index >= dim(a)) shape_error("pick", index, dim(a));
  Node n{Op::Pick};
  n.a = a.id;
  n.aux = index;
  Var y = push(n, 1);
  *val(y.id) = val(a.id)[index];
  return y;
}

Var Tape::scale(Var a, double factor) {
  check_var(a);
  Node n{Op::Scale};
  n.a = a.id;
  n.factor = factor;
  Var y = push(n, dim(a));
  const double* av = val(a.id);
  double* yv = val(y.id);
  for (int k = 0; k < dim(y); ++k) yv[k] = factor * av[k];
  return y;
}

Var Tape::weighted_sum(std::span<const Var> terms, std::span<const double> coeffs) {
  if (terms.size() != coeffs.size()) throw LogicError("weighted_sum: size mismatch");
  Node n{Op::WeightedSum};
  n.list_off = lists_.size();
  n.list_len = static_cast<int>(terms.size());
  // coeffs_ is kept parallel to lists_ so one offset indexes both.
  coeffs_.resize(lists_.size(), 0.0);
  double s = 0.0;
  for (std::size_t k = 0; k < terms.size(); ++k) {
    check_var(terms[k]);
    if (dim(terms[k]) != 1) shape_error("weighted_sum", dim(terms[k]), 1);
    lists_.push_back(terms[k].id);
    coeffs_.push_back(coeffs[k]);
    s += coeffs[k] * val(terms[k].id)[0];
  }
  Var y = push(n, 1);
  *val(y.id) = s;
  return y;
}

std::span<const double> Tape::value(Var v) const {
  check_var(v);
  return {val(v.id), std::size_t(nodes_[v.id].len)};
}

double Tape::scalar(Var v) const {
  check_var(v);
  if (nodes_[v.id].len != 1) throw LogicError("scalar(): variable is not a scalar");
  return *val(v.id);
}

std::span<const double> Tape::grad(Var v) const {
  check_var(v);
  if (grads_.size() != values_.size()) return {};
  return {grads_.data() + nodes_[v.id].off, std::size_t(nodes_[v.id].len)};
}

void Tape::backward(Var out, double seed) {
  check_var(out);
  if (dim(out) != 1) throw LogicError("backward() needs a scalar output");
  grads_.assign(values_.size(), 0.0);
  grads_[nodes_[out.id].off] = seed;

  auto g = [this](int id) { return grads_.data() + nodes_[id].off; };

  for (int id = out.id; id >= 0; --id) {
    const Node& n = nodes_[id];
    const double* dy = grads_.data() + n.off;
    const double* y = values_.data() + n.off;
    bool any = false;
    for (int k = 0; k < n.len && !any; ++k) any = dy[k] != 0.0;
    if (!any) continue;

    switch (n.op) {
      case Op::Constant:
        break;
      case Op::ParamRef: {
        if (!n.param->trainable()) break;
        double* pg = n.param->grads().data() + n.param_off;
        for (int k = 0; k < n.len; ++k) pg[k] += dy[k];
        break;
      }
      case Op::MatVec: {
        Param& w = *n.param;
        const int m = nodes_[n.a].len;
        const int cols = w.cols();
        const double* xv = val(n.a);
        double* dx = g(n.a);
        const double* wv = w.values().data();
        double* dw = w.grads().data();
        const bool train = w.trainable();
        for (int r = 0; r < n.len; ++r) {
          const double d = dy[r];
          if (d == 0.0) continue;
          const std::size_t base = std::size_t(r) * cols + n.aux;
          for (int c = 0; c < m; ++c) dx[c] += wv[base + c] * d;
          if (train) {
            for (int c = 0; c < m; ++c) dw[base + c] += d * xv[c];
          }
        }
        break;
      }
      case Op::Add: {
        double* da = g(n.a);
        double* db = g(n.b);
        for (int k = 0; k < n.len; ++k) {
          da[k] += dy[k];
          db[k] += dy[k];
        }
        break;
      }
      case Op::AddN:
        for (int t = 0; t < n.list_len; ++t) {
          double* dt = g(lists_[n.list_off + t]);
          for (int k = 0; k < n.len; ++k) dt[k] += dy[k];
        }
        break;
      case Op::Mul: {
        const double* av = val(n.a);
        const double* bv = val(n.b);
        double* da = g(n.a);
        double* db = g(n.b);
        for (int k = 0; k < n.len; ++k) {
          da[k] += dy[k] * bv[k];
          db[k] += dy[k] * av[k];
        }
        break;
      }
      case Op::Tanh: {
        double* da = g(n.a);
        for (int k = 0; k < n.len; ++k) da[k] += dy[k] * (1.0 - y[k] * y[k]);
        break;
      }
      case Op::Sigmoid: {
        double* da = g(n.a);
        for (int k = 0; k < n.len; ++k) da[k] += dy[k] * y[k] * (1.0 - y[k]);
        break;
      }
      case Op::Concat: {
        const double* src = dy;
        for (int t = 0; t < n.list_len; ++t) {
          const int part = lists_[n.list_off + t];
          double* dp = g(part);
          for (int k = 0; k < nodes_[part].len; ++k) dp[k] += src[k];
          src += nodes_[part].len;
        }
        break;
      }
      case Op::Slice: {
        double* da = g(n.a) + n.aux;
        for (int k = 0; k < n.len; ++k) da[k] += dy[k];
        break;
      }
      case Op::Dot: {
        const double* av = val(n.a);
        const double* bv = val(n.b);
        double* da = g(n.a);
        double* db = g(n.b);
        const int m = nodes_[n.a].len;
        for (int k = 0; k < m; ++k) {
          da[k] += dy[0] * bv[k];
          db[k] += dy[0] * av[k];
        }
        break;
      }
      case Op::Sum: {
        double* da = g(n.a);
        for (int k = 0; k < nodes_[n.a].len; ++k) da[k] += dy[0];
        break;
      }
      case Op::Pick:
        g(n.a)[n.aux] += dy[0];
        break;
      case Op::Scale: {
        double* da = g(n.a);
        for (int k = 0; k < n.len; ++k) da[k] += n.factor * dy[k];
        break;
      }
      case Op::WeightedSum:
        for (int t = 0; t < n.list_len; ++t) {
          g(lists_[n.list_off + t])[0] += coeffs_[n.list_off + t] * dy[0];
        }
        break;
    }
  }
}

}  // namespace mtsdp::ad
