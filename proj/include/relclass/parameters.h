#ifndef RELCLASS_PARAMETERS_H_
#define RELCLASS_PARAMETERS_H_

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "relclass/tensor.h"

namespace relclass {

// How a tensor is treated by the optimizer.
//   kWeight     dense, L2-regularized (filters, recurrences, scorers)
//   kBias       dense, not regularized
//   kEmbedding  row-sparse updates, not regularized
enum class ParamKind { kWeight, kBias, kEmbedding };

const char* to_string(ParamKind kind);
ParamKind param_kind_from_string(const std::string& s);

struct Parameter {
  std::string name;
  ParamKind kind = ParamKind::kWeight;
  Matrix value;
  // Rows held constant (the PADDING word vector). Only meaningful for
  // embeddings.
  std::vector<std::size_t> frozen_rows;

  bool is_frozen_row(std::size_t r) const;
};

// Ordered collection of named trainable tensors. Order is insertion order and
// is part of the checkpoint format.
class ParameterSet {
 public:
  std::size_t add(std::string name, ParamKind kind, Matrix value);

  std::size_t size() const { return params_.size(); }
  Parameter& operator[](std::size_t i) { return params_[i]; }
  const Parameter& operator[](std::size_t i) const { return params_[i]; }

  std::optional<std::size_t> find(const std::string& name) const;
  // Throws std::out_of_range when missing.
  std::size_t index_of(const std::string& name) const;
  Matrix& value(const std::string& name) { return params_[index_of(name)].value; }
  const Matrix& value(const std::string& name) const {
    return params_[index_of(name)].value;
  }

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  friend bool operator==(const ParameterSet& a, const ParameterSet& b);

 private:
  std::vector<Parameter> params_;
};

// Gradient storage mirroring a ParameterSet: dense matrices for weights and
// biases, sparse rows for embedding tables. Gradient sent to a frozen row is
// dropped.
class GradientSet {
 public:
  GradientSet() = default;
  explicit GradientSet(const ParameterSet& params);

  std::size_t size() const { return entries_.size(); }

  Matrix& dense(std::size_t i) { return entries_[i].dense; }
  const Matrix& dense(std::size_t i) const { return entries_[i].dense; }

  bool is_sparse(std::size_t i) const { return entries_[i].sparse; }
  const std::map<std::size_t, std::vector<double>>& rows(std::size_t i) const {
    return entries_[i].rows;
  }

  // Adds scale * g into row r of sparse entry i.
  void add_row(std::size_t i, std::size_t r, std::span<const double> g,
               double scale = 1.0);

  // Gradient of coordinate (r, c) of parameter i; zero for untouched sparse rows.
  double at(std::size_t i, std::size_t r, std::size_t c) const;

  void accumulate(const GradientSet& other, double scale = 1.0);
  void scale(double factor);
  void clear();
  double squared_norm() const;
  bool all_finite() const;

 private:
  struct Entry {
    bool sparse = false;
    std::size_t cols = 0;
    std::vector<std::size_t> frozen_rows;
    Matrix dense;
    std::map<std::size_t, std::vector<double>> rows;
  };
  std::vector<Entry> entries_;
};

}  // namespace relclass

#endif  // RELCLASS_PARAMETERS_H_
