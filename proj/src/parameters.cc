#include "relclass/parameters.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace relclass {

const char* to_string(ParamKind kind) {
  switch (kind) {
    case ParamKind::kWeight: return "weight";
    case ParamKind::kBias: return "bias";
    case ParamKind::kEmbedding: return "embedding";
  }
  return "weight";
}

ParamKind param_kind_from_string(const std::string& s) {
  if (s == "weight") return ParamKind::kWeight;
  if (s == "bias") return ParamKind::kBias;
  if (s == "embedding") return ParamKind::kEmbedding;
  throw std::invalid_argument("unknown parameter kind '" + s + "'");
}

bool Parameter::is_frozen_row(std::size_t r) const {
  return std::find(frozen_rows.begin(), frozen_rows.end(), r) != frozen_rows.end();
}

std::size_t ParameterSet::add(std::string name, ParamKind kind, Matrix value) {
  if (find(name)) throw std::invalid_argument("duplicate parameter '" + name + "'");
  params_.push_back(Parameter{std::move(name), kind, std::move(value), {}});
  return params_.size() - 1;
}

std::optional<std::size_t> ParameterSet::find(const std::string& name) const {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (params_[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t ParameterSet::index_of(const std::string& name) const {
  auto i = find(name);
  if (!i) throw std::out_of_range("no parameter named '" + name + "'");
  return *i;
}

bool operator==(const ParameterSet& a, const ParameterSet& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& x = a[i];
    const auto& y = b[i];
    if (x.name != y.name || x.kind != y.kind || !(x.value == y.value) ||
        x.frozen_rows != y.frozen_rows) {
      return false;
    }
  }
  return true;
}

GradientSet::GradientSet(const ParameterSet& params) {
  entries_.reserve(params.size());
  for (const auto& p : params) {
    Entry e;
    e.sparse = p.kind == ParamKind::kEmbedding;
    e.cols = p.value.cols();
    e.frozen_rows = p.frozen_rows;
    if (!e.sparse) e.dense = Matrix(p.value.rows(), p.value.cols());
    entries_.push_back(std::move(e));
  }
}

void GradientSet::add_row(std::size_t i, std::size_t r, std::span<const double> g,
                          double scale) {
  Entry& e = entries_[i];
  require_shape(g.size() == e.cols, "embedding gradient row has wrong width");
  if (std::find(e.frozen_rows.begin(), e.frozen_rows.end(), r) != e.frozen_rows.end()) {
    return;
  }
  if (!e.sparse) {
    auto row = e.dense.row(r);
    for (std::size_t c = 0; c < g.size(); ++c) row[c] += scale * g[c];
    return;
  }
  auto [it, inserted] = e.rows.try_emplace(r, e.cols, 0.0);
  auto& row = it->second;
  for (std::size_t c = 0; c < g.size(); ++c) row[c] += scale * g[c];
}

double GradientSet::at(std::size_t i, std::size_t r, std::size_t c) const {
  const Entry& e = entries_[i];
  if (!e.sparse) return e.dense(r, c);
  auto it = e.rows.find(r);
  return it == e.rows.end() ? 0.0 : it->second[c];
}

void GradientSet::accumulate(const GradientSet& other, double scale) {
  require_shape(other.entries_.size() == entries_.size(),
                "gradient sets belong to different parameter sets");
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    Entry& e = entries_[i];
    const Entry& o = other.entries_[i];
    if (!e.sparse) {
      auto& d = e.dense.data();
      const auto& s = o.dense.data();
      for (std::size_t k = 0; k < d.size(); ++k) d[k] += scale * s[k];
    } else {
      for (const auto& [r, g] : o.rows) add_row(i, r, g, scale);
    }
  }
}

void GradientSet::scale(double factor) {
  for (Entry& e : entries_) {
    for (double& v : e.dense.data()) v *= factor;
    for (auto& [r, g] : e.rows) {
      for (double& v : g) v *= factor;
    }
  }
}

void GradientSet::clear() {
  for (Entry& e : entries_) {
    e.dense.fill(0.0);
    e.rows.clear();
  }
}

double GradientSet::squared_norm() const {
  double s = 0.0;
  for (const Entry& e : entries_) {
    s += e.dense.squared_norm();
    for (const auto& [r, g] : e.rows) {
      for (double v : g) s += v * v;
    }
  }
  return s;
}

bool GradientSet::all_finite() const {
  for (const Entry& e : entries_) {
    if (!e.dense.all_finite()) return false;
    for (const auto& [r, g] : e.rows) {
      if (!relclass::all_finite(g)) return false;
    }
  }
  return true;
}

}  // namespace relclass
