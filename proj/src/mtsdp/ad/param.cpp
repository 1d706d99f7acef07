#include "mtsdp/ad/param.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "mtsdp/error.hpp"

namespace mtsdp::ad {

Param::Param(std::string name, int rows, int cols, bool trainable)
    : name_(std::move(name)),
      rows_(rows),
      cols_(cols),
      trainable_(trainable),
      value_(std::size_t(rows) * cols, 0.0),
      grad_(std::size_t(rows) * cols, 0.0) {
  if (rows < 0 || cols < 0) throw LogicError("negative shape for parameter " + name_);
}

void Param::zero_grad() { std::fill(grad_.begin(), grad_.end(), 0.0); }
void Param::fill(double v) { std::fill(value_.begin(), value_.end(), v); }

Param& ParamStore::add(const std::string& name, int rows, int cols, bool trainable) {
  if (index_.count(name)) throw LogicError("duplicate parameter " + name);
  index_.emplace(name, params_.size());
  params_.push_back(std::make_unique<Param>(name, rows, cols, trainable));
  return *params_.back();
}

Param* ParamStore::find(const std::string& name) {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : params_[it->second].get();
}

const Param* ParamStore::find(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : params_[it->second].get();
}

Param& ParamStore::at(const std::string& name) {
  if (auto* p = find(name)) return *p;
  throw LogicError("no parameter named " + name);
}

const Param& ParamStore::at(const std::string& name) const {
  if (const auto* p = find(name)) return *p;
  throw LogicError("no parameter named " + name);
}

std::vector<Param*> ParamStore::all() {
  std::vector<Param*> out;
  for (auto& p : params_) out.push_back(p.get());
  return out;
}

std::vector<const Param*> ParamStore::all() const {
  std::vector<const Param*> out;
  for (const auto& p : params_) out.push_back(p.get());
  return out;
}

std::vector<Param*> ParamStore::trainable() {
  std::vector<Param*> out;
  for (auto& p : params_) {
    if (p->trainable()) out.push_back(p.get());
  }
  return out;
}

void ParamStore::zero_grad() {
  for (auto& p : params_) p->zero_grad();
}

std::size_t ParamStore::num_values() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p->size();
  return n;
}

double ParamStore::squared_norm() const {
  double s = 0.0;
  for (const auto& p : params_) {
    if (!p->trainable()) continue;
    for (double v : p->values()) s += v * v;
  }
  return s;
}

void ParamStore::copy_values_from(const ParamStore& other) {
  if (other.params_.size() != params_.size()) throw LogicError("parameter layouts differ");
  for (std::size_t k = 0; k < params_.size(); ++k) {
    auto& dst = *params_[k];
    const auto& src = *other.params_[k];
    if (dst.name() != src.name() || dst.size() != src.size()) {
      throw LogicError("parameter layouts differ at " + dst.name());
    }
    std::copy(src.values().begin(), src.values().end(), dst.values().begin());
  }
}

double glorot_bound(int rows, int cols) {
  if (rows < 1 || cols < 1) throw LogicError("glorot_bound needs rows, cols >= 1");
  return std::sqrt(6.0 / static_cast<double>(rows + cols));
}

std::vector<double> glorot_init(int rows, int cols, Rng& rng) {
  const double bound = glorot_bound(rows, cols);
  std::uniform_real_distribution<double> dist(-bound, bound);
  std::vector<double> out(std::size_t(rows) * cols);
  for (auto& v : out) v = dist(rng);
  return out;
}

void glorot_fill(Param& p, Rng& rng) {
  if (p.size() == 0) return;
  auto values = glorot_init(p.rows(), p.cols(), rng);
  std::copy(values.begin(), values.end(), p.values().begin());
}

void glorot_fill_block(Param& p, int row0, int rows, int col0, int cols, Rng& rng) {
  if (rows == 0 || cols == 0) return;
  auto values = glorot_init(rows, cols, rng);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) p.at(row0 + r, col0 + c) = values[std::size_t(r) * cols + c];
  }
}

namespace {

void put(std::ostream& out, double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.write(buf, res.ptr - buf);
}

double get_double(const std::string& tok, const std::string& where) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw DataError("malformed value '" + tok + "' in " + where);
  }
  return v;
}

}  // namespace

void save_params(std::ostream& out, const ParamStore& store) {
  out << "params " << store.size() << '\n';
  for (const auto* p : store.all()) {
    std::size_t nnz = 0;
    for (double v : p->values()) nnz += v != 0.0;
    const bool sparse = p->size() >= 1024 && nnz * 4 < p->size();
    out << "param " << p->name() << ' ' << p->rows() << ' ' << p->cols();
    if (sparse) {
      out << " sparse " << nnz << '\n';
      const auto values = p->values();
      for (std::size_t k = 0; k < values.size(); ++k) {
        if (values[k] == 0.0) continue;
        out << k << ' ';
        put(out, values[k]);
        out << '\n';
      }
    } else {
      out << " dense\n";
      for (int r = 0; r < p->rows(); ++r) {
        const auto row = p->row(r);
        for (int c = 0; c < p->cols(); ++c) {
          if (c) out << ' ';
          put(out, row[c]);
        }
        out << '\n';
      }
    }
  }
}

void load_params(std::istream& in, ParamStore& store) {
  std::string word;
  std::size_t count = 0;
  if (!(in >> word >> count) || word != "params") throw DataError("missing 'params' header");
  if (count != store.size()) {
    throw DataError("checkpoint has " + std::to_string(count) + " parameters, model expects " +
                    std::to_string(store.size()));
  }
  for (std::size_t k = 0; k < count; ++k) {
    std::string tag, name, layout;
    int rows = 0, cols = 0;
    if (!(in >> tag >> name >> rows >> cols >> layout) || tag != "param") {
      throw DataError("malformed parameter header #" + std::to_string(k));
    }
    Param* p = store.find(name);
    if (!p) throw DataError("checkpoint parameter " + name + " is not part of the model");
    if (p->rows() != rows || p->cols() != cols) {
      throw DataError("shape mismatch for " + name + ": checkpoint " + std::to_string(rows) + "x" +
                      std::to_string(cols) + ", model " + std::to_string(p->rows()) + "x" +
                      std::to_string(p->cols()));
    }
    auto values = p->values();
    std::string tok;
    if (layout == "dense") {
      for (auto& v : values) {
        if (!(in >> tok)) throw DataError("truncated values for " + name);
        v = get_double(tok, name);
      }
    } else if (layout == "sparse") {
      std::size_t nnz = 0;
      if (!(in >> nnz)) throw DataError("missing nnz for " + name);
      std::fill(values.begin(), values.end(), 0.0);
      for (std::size_t e = 0; e < nnz; ++e) {
        std::size_t idx = 0;
        if (!(in >> idx >> tok) || idx >= values.size()) {
          throw DataError("bad sparse entry for " + name);
        }
        values[idx] = get_double(tok, name);
      }
    } else {
      throw DataError("unknown layout '" + layout + "' for " + name);
    }
  }
}

}  // namespace mtsdp::ad
