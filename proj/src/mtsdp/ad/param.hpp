#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace mtsdp::ad {

using Rng = std::mt19937_64;

// A named row-major matrix of trainable values with a gradient accumulator.
// Vectors are stored as 1 x n matrices.
class Param {
 public:
  Param(std::string name, int rows, int cols, bool trainable = true);

  const std::string& name() const { return name_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return value_.size(); }
  bool trainable() const { return trainable_; }

  std::span<double> values() { return value_; }
  std::span<const double> values() const { return value_; }
  std::span<double> grads() { return grad_; }
  std::span<const double> grads() const { return grad_; }

  std::span<double> row(int r) { return {value_.data() + std::size_t(r) * cols_, std::size_t(cols_)}; }
  std::span<const double> row(int r) const {
    return {value_.data() + std::size_t(r) * cols_, std::size_t(cols_)};
  }
  std::span<double> grad_row(int r) { return {grad_.data() + std::size_t(r) * cols_, std::size_t(cols_)}; }

  double& at(int r, int c) { return value_[std::size_t(r) * cols_ + c]; }
  double at(int r, int c) const { return value_[std::size_t(r) * cols_ + c]; }

  void zero_grad();
  void fill(double v);

 private:
  std::string name_;
  int rows_;
  int cols_;
  bool trainable_;
  std::vector<double> value_;
  std::vector<double> grad_;
};

// Owns parameters in creation order; addresses are stable.
class ParamStore {
 public:
  Param& add(const std::string& name, int rows, int cols, bool trainable = true);
  Param* find(const std::string& name);
  const Param* find(const std::string& name) const;
  Param& at(const std::string& name);
  const Param& at(const std::string& name) const;

  std::size_t size() const { return params_.size(); }
  std::vector<Param*> all();
  std::vector<const Param*> all() const;
  std::vector<Param*> trainable();

  void zero_grad();
  std::size_t num_values() const;
  double squared_norm() const;

  // Copies all values from another store with the same layout.
  void copy_values_from(const ParamStore& other);

 private:
  std::vector<std::unique_ptr<Param>> params_;
  std::unordered_map<std::string, std::size_t> index_;
};

double glorot_bound(int rows, int cols);
// Uniform samples in [-sqrt(6/(rows+cols)), +sqrt(6/(rows+cols))], row-major.
std::vector<double> glorot_init(int rows, int cols, Rng& rng);
void glorot_fill(Param& p, Rng& rng);
// Fills a block [row0, row0+rows) x [col0, col0+cols) with its own bound.
void glorot_fill_block(Param& p, int row0, int rows, int col0, int cols, Rng& rng);

// Text serialization. Each parameter is written as
//   param <name> <rows> <cols> dense
//   <row 0 values> ...
// or, when mostly zero,
//   param <name> <rows> <cols> sparse <nnz>
//   <index> <value> per line.
void save_params(std::ostream& out, const ParamStore& store);
// Reads parameters into an existing store; names and shapes must match.
void load_params(std::istream& in, ParamStore& store);

}  // namespace mtsdp::ad
