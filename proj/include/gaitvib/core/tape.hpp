#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "gaitvib/core/param_store.hpp"

namespace gaitvib::num {

enum class OpKind : std::uint8_t {
  Constant,
  Param,
  Add,
  Sub,
  Mul,
  Scale,
  MatMul,
  Tanh,
  Sigmoid,
  Sin,
  Cos,
  Exp,
  Sum,
  Softmax,
  Concat,
  Slice,
  SumN,
};

std::string_view op_name(OpKind op) noexcept;

class Tape;

/// Handle to a tape node. Cheap to copy; only valid while its tape is alive
/// and has not been cleared.
struct Var {
  Tape* tape = nullptr;
  std::uint32_t id = 0;
};

/// Reverse-mode tape over small dense matrices (row-major, column vectors are
/// n x 1). Nodes are appended in evaluation order, so the node list is a
/// topological order and backward() is a single reverse sweep.
///
/// Parameters are read from a ParamStore and their adjoints are scattered back
/// into a flat gradient of the same length. Each forward op checks its output
/// for NaN/Inf and throws NumericError naming the node.
class Tape {
 public:
  explicit Tape(const ParamStore& params);

  void clear();

  Var constant(std::span<const double> values, Shape shape);
  Var constant(std::span<const double> values) { return constant(values, {values.size(), 1}); }
  Var scalar(double v) { return constant(std::span<const double>(&v, 1), {1, 1}); }
  /// Leaf bound to a registered slice. Repeated calls return the same node.
  Var param(const std::string& name);

  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  /// Elementwise product; a 1x1 operand broadcasts.
  Var mul(Var a, Var b);
  Var scale(Var a, double c);
  Var matmul(Var a, Var b);
  Var tanh(Var a);
  Var sigmoid(Var a);
  Var sin(Var a);
  Var cos(Var a);
  Var exp(Var a);
  Var sum(Var a);
  Var mean(Var a);
  Var softmax(Var a);
  Var concat(std::span<const Var> parts);
  Var slice(Var a, std::size_t row_begin, std::size_t rows);
  /// Sum of equally shaped operands. Every component is summed over the
  /// operands' values in sorted order, so the result is bit-identical under
  /// any permutation of the operands.
  Var sum_n(std::span<const Var> parts);

  std::span<const double> value(Var v) const;
  double item(Var v) const;
  Shape shape(Var v) const { return nodes_[v.id].shape; }
  OpKind kind(Var v) const { return nodes_[v.id].op; }
  std::size_t size() const noexcept { return nodes_.size(); }
  const ParamStore& params() const noexcept { return *params_; }

  /// Accumulates d(out)/d(params) into grad (length params().size()).
  /// `out` must be a 1x1 node.
  void backward(Var out, std::span<double> grad);

 private:
  struct Node {
    OpKind op;
    std::uint32_t in_begin;
    std::uint32_t in_count;
    std::size_t offset;
    Shape shape;
    double c;
    std::size_t aux;
  };

  Var push(OpKind op, std::initializer_list<Var> in, Shape shape, double c = 0.0,
           std::size_t aux = 0);
  Var push_n(OpKind op, std::span<const Var> in, Shape shape, double c = 0.0, std::size_t aux = 0);
  double* data(std::uint32_t id) { return vals_.data() + nodes_[id].offset; }
  const double* data(std::uint32_t id) const { return vals_.data() + nodes_[id].offset; }
  void check_finite(std::uint32_t id) const;
  void check_same_tape(Var v) const;
  std::uint32_t input(const Node& n, std::size_t k) const { return inputs_[n.in_begin + k]; }

  const ParamStore* params_;
  std::vector<Node> nodes_;
  std::vector<std::uint32_t> inputs_;
  std::vector<double> vals_;
  std::vector<double> adj_;
  std::unordered_map<std::string, std::uint32_t> param_nodes_;
};

inline Var operator+(Var a, Var b) { return a.tape->add(a, b); }
inline Var operator-(Var a, Var b) { return a.tape->sub(a, b); }
inline Var operator*(Var a, Var b) { return a.tape->mul(a, b); }
inline Var operator*(double c, Var a) { return a.tape->scale(a, c); }

/// Gradient of a scalar objective recorded on a fresh tape.
std::vector<double> grad(const std::function<Var(Tape&)>& objective, const ParamStore& params);

}  // namespace gaitvib::num
