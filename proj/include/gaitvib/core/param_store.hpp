#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace gaitvib::num {

struct Shape {
  std::size_t rows = 1;
  std::size_t cols = 1;
  std::size_t size() const noexcept { return rows * cols; }
  friend bool operator==(const Shape&, const Shape&) = default;
};

struct Slice {
  std::size_t offset = 0;
  Shape shape;
};

enum class Init { Zeros, Ones, Glorot, Small };

/// Flat vector of learnable values with named, disjoint, contiguous slices.
/// Slices are appended in registration order, so together they always cover
/// [0, size()). Shapes cannot change once registered.
class ParamStore {
 public:
  ParamStore() = default;
  explicit ParamStore(std::uint64_t rng_seed) : rng_seed_(rng_seed), rng_(rng_seed) {}

  /// Registers a slice and initialises it. Throws if the name is taken.
  const Slice& add(const std::string& name, Shape shape, Init init = Init::Glorot);

  bool contains(const std::string& name) const { return slices_.count(name) != 0; }
  /// Throws std::out_of_range naming the slice when it is not registered.
  const Slice& slice(const std::string& name) const;
  const std::map<std::string, Slice>& slices() const noexcept { return slices_; }

  std::span<double> view(const std::string& name);
  std::span<const double> view(const std::string& name) const;

  std::vector<double>& values() noexcept { return values_; }
  const std::vector<double>& values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::uint64_t rng_seed() const noexcept { return rng_seed_; }

  /// Slice names ordered by offset.
  std::vector<std::string> names_by_offset() const;

  friend bool operator==(const ParamStore& a, const ParamStore& b) {
    return a.values_ == b.values_ && a.layout_equal(b);
  }
  bool layout_equal(const ParamStore& other) const;

 private:
  std::uint64_t rng_seed_ = 0;
  std::mt19937_64 rng_{0};
  std::vector<double> values_;
  std::map<std::string, Slice> slices_;
};

}  // namespace gaitvib::num
