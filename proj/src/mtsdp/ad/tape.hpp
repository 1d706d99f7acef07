#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mtsdp/ad/param.hpp"

namespace mtsdp::ad {

// Handle to a node recorded on a Tape.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

// Records vector-valued operations in topological order and replays them in
// reverse to accumulate gradients into the Params they read. Shapes are
// checked when an operation is recorded.
//
// Spans returned by value()/grad() are invalidated by the next recorded op.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(std::span<const double> values);
  Var zeros(int dim);
  Var param(Param& p);                  // all values of p, flattened
  Var param_row(Param& p, int row);     // one row of p
  Var matvec(Param& w, Var x);          // W x
  // W[:, col0 : col0 + dim(x)] x
  Var matvec_cols(Param& w, int col0, Var x);
  Var add(Var a, Var b);
  Var add(std::span<const Var> terms);
  Var mul(Var a, Var b);  // elementwise
  Var tanh(Var a);
  Var sigmoid(Var a);
  Var concat(std::span<const Var> parts);
  Var slice(Var a, int offset, int length);
  Var dot(Var a, Var b);  // scalar
  Var sum(Var a);         // scalar
  Var pick(Var a, int index);
  Var scale(Var a, double factor);
  // Scalar sum_k coeffs[k] * terms[k]; every term must be a scalar.
  Var weighted_sum(std::span<const Var> terms, std::span<const double> coeffs);

  int dim(Var v) const { return nodes_.at(v.id).len; }
  std::span<const double> value(Var v) const;
  double scalar(Var v) const;
  std::span<const double> grad(Var v) const;
  std::size_t size() const { return nodes_.size(); }

  // Seeds d(out) = seed and propagates to every recorded input, adding the
  // results into Param::grads().
  void backward(Var out, double seed = 1.0);

 private:
  enum class Op : std::uint8_t {
    Constant, ParamRef, MatVec, Add, AddN, Mul, Tanh, Sigmoid, Concat, Slice, Dot, Sum, Pick,
    Scale, WeightedSum,
  };

  struct Node {
    Op op;
    int a = -1;
    int b = -1;
    std::size_t off = 0;  // into values_/grads_
    int len = 0;
    Param* param = nullptr;
    std::size_t param_off = 0;
    int aux = 0;
    double factor = 0.0;
    std::size_t list_off = 0;  // into lists_/coeffs_
    int list_len = 0;
  };

  Var push(Node node, int len);
  double* val(int id) { return values_.data() + nodes_[id].off; }
  const double* val(int id) const { return values_.data() + nodes_[id].off; }
  void check_var(Var v) const;

  std::vector<Node> nodes_;
  std::vector<double> values_;
  std::vector<double> grads_;
  std::vector<int> lists_;
  std::vector<double> coeffs_;
};

}  // namespace mtsdp::ad
