#include "gaitvib/core/param_store.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gaitvib/core/rng.hpp"

namespace gaitvib::num {

const Slice& ParamStore::add(const std::string& name, Shape shape, Init init) {
  if (shape.size() == 0) throw std::invalid_argument("empty parameter slice: " + name);
  if (slices_.count(name)) throw std::invalid_argument("duplicate parameter slice: " + name);
  Slice s{values_.size(), shape};
  values_.resize(values_.size() + shape.size(), 0.0);
  auto out = std::span<double>(values_).subspan(s.offset, shape.size());
  switch (init) {
    case Init::Zeros:
      break;
    case Init::Ones:
      std::fill(out.begin(), out.end(), 1.0);
      break;
    case Init::Glorot: {
      const double limit = std::sqrt(6.0 / static_cast<double>(shape.rows + shape.cols));
      for (auto& v : out) v = limit * (2.0 * uniform01(rng_) - 1.0);
      break;
    }
    case Init::Small:
      for (auto& v : out) v = 0.1 * (2.0 * uniform01(rng_) - 1.0);
      break;
  }
  return slices_.emplace(name, s).first->second;
}

const Slice& ParamStore::slice(const std::string& name) const {
  auto it = slices_.find(name);
  if (it == slices_.end()) throw std::out_of_range("unregistered parameter slice: " + name);
  return it->second;
}

std::span<double> ParamStore::view(const std::string& name) {
  const auto& s = slice(name);
  return std::span<double>(values_).subspan(s.offset, s.shape.size());
}

std::span<const double> ParamStore::view(const std::string& name) const {
  const auto& s = slice(name);
  return std::span<const double>(values_).subspan(s.offset, s.shape.size());
}

std::vector<std::string> ParamStore::names_by_offset() const {
  std::vector<std::string> names;
  names.reserve(slices_.size());
  for (const auto& [n, _] : slices_) names.push_back(n);
  std::sort(names.begin(), names.end(), [&](const auto& a, const auto& b) {
    return slices_.at(a).offset < slices_.at(b).offset;
  });
  return names;
}

bool ParamStore::layout_equal(const ParamStore& other) const {
  if (slices_.size() != other.slices_.size()) return false;
  for (const auto& [n, s] : slices_) {
    auto it = other.slices_.find(n);
    if (it == other.slices_.end() || it->second.offset != s.offset || !(it->second.shape == s.shape))
      return false;
  }
  return true;
}

}  // namespace gaitvib::num
