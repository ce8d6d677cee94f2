#include "gaitvib/core/tape.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gaitvib/core/error.hpp"

namespace gaitvib::num {

std::string_view op_name(OpKind op) noexcept {
  switch (op) {
    case OpKind::Constant: return "constant";
    case OpKind::Param: return "param";
    case OpKind::Add: return "add";
    case OpKind::Sub: return "sub";
    case OpKind::Mul: return "mul";
    case OpKind::Scale: return "scale";
    case OpKind::MatMul: return "matmul";
    case OpKind::Tanh: return "tanh";
    case OpKind::Sigmoid: return "sigmoid";
    case OpKind::Sin: return "sin";
    case OpKind::Cos: return "cos";
    case OpKind::Exp: return "exp";
    case OpKind::Sum: return "sum";
    case OpKind::Softmax: return "softmax";
    case OpKind::Concat: return "concat";
    case OpKind::Slice: return "slice";
    case OpKind::SumN: return "sum_n";
  }
  return "?";
}

Tape::Tape(const ParamStore& params) : params_(&params) {}

void Tape::clear() {
  nodes_.clear();
  inputs_.clear();
  vals_.clear();
  param_nodes_.clear();
}

Var Tape::push(OpKind op, std::initializer_list<Var> in, Shape shape, double c, std::size_t aux) {
  return push_n(op, std::span<const Var>(in.begin(), in.size()), shape, c, aux);
}

Var Tape::push_n(OpKind op, std::span<const Var> in, Shape shape, double c, std::size_t aux) {
  Node n{op, static_cast<std::uint32_t>(inputs_.size()), static_cast<std::uint32_t>(in.size()),
         vals_.size(), shape, c, aux};
  for (const auto& v : in) {
    check_same_tape(v);
    inputs_.push_back(v.id);
  }
  vals_.resize(vals_.size() + shape.size());
  nodes_.push_back(n);
  return Var{this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

void Tape::check_same_tape(Var v) const {
  if (v.tape != this || v.id >= nodes_.size())
    throw std::invalid_argument("tape variable does not belong to this tape");
}

void Tape::check_finite(std::uint32_t id) const {
  const auto& n = nodes_[id];
  const double* p = data(id);
  for (std::size_t i = 0; i < n.shape.size(); ++i) {
    if (!std::isfinite(p[i])) {
      throw NumericError("non-finite value at tape node " + std::to_string(id) + " (" +
                         std::string(op_name(n.op)) + ")");
    }
  }
}

Var Tape::constant(std::span<const double> values, Shape shape) {
  if (values.size() != shape.size()) throw std::invalid_argument("constant: shape/size mismatch");
  Var v = push(OpKind::Constant, {}, shape);
  std::copy(values.begin(), values.end(), data(v.id));
  check_finite(v.id);
  return v;
}

Var Tape::param(const std::string& name) {
  if (auto it = param_nodes_.find(name); it != param_nodes_.end()) return Var{this, it->second};
  const Slice& s = params_->slice(name);
  Var v = push(OpKind::Param, {}, s.shape, 0.0, s.offset);
  const auto src = params_->view(name);
  std::copy(src.begin(), src.end(), data(v.id));
  check_finite(v.id);
  param_nodes_.emplace(name, v.id);
  return v;
}

namespace {
bool broadcastable(Shape a, Shape b) { return a == b || a.size() == 1 || b.size() == 1; }
Shape broadcast_shape(Shape a, Shape b) { return a.size() == 1 ? b : a; }
}  // namespace

Var Tape::add(Var a, Var b) {
  check_same_tape(a);
  check_same_tape(b);
  const Shape sa = shape(a), sb = shape(b);
  if (!broadcastable(sa, sb)) throw std::invalid_argument("add: shape mismatch");
  const Shape so = broadcast_shape(sa, sb);
  Var v = push(OpKind::Add, {a, b}, so);
  const double* pa = data(a.id);
  const double* pb = data(b.id);
  double* po = data(v.id);
  const std::size_t ia = sa.size() == 1 ? 0 : 1, ib = sb.size() == 1 ? 0 : 1;
  for (std::size_t i = 0; i < so.size(); ++i) po[i] = pa[i * ia] + pb[i * ib];
  check_finite(v.id);
  return v;
}

Var Tape::sub(Var a, Var b) {
  check_same_tape(a);
  check_same_tape(b);
  const Shape sa = shape(a), sb = shape(b);
  if (!broadcastable(sa, sb)) throw std::invalid_argument("sub: shape mismatch");
  const Shape so = broadcast_shape(sa, sb);
  Var v = push(OpKind::Sub, {a, b}, so);
  const double* pa = data(a.id);
  const double* pb = data(b.id);
  double* po = data(v.id);
  const std::size_t ia = sa.size() == 1 ? 0 : 1, ib = sb.size() == 1 ? 0 : 1;
  for (std::size_t i = 0; i < so.size(); ++i) po[i] = pa[i * ia] - pb[i * ib];
  check_finite(v.id);
  return v;
}

Var Tape::mul(Var a, Var b) {
  check_same_tape(a);
  check_same_tape(b);
  const Shape sa = shape(a), sb = shape(b);
  if (!broadcastable(sa, sb)) throw std::invalid_argument("mul: shape mismatch");
  const Shape so = broadcast_shape(sa, sb);
  Var v = push(OpKind::Mul, {a, b}, so);
  const double* pa = data(a.id);
  const double* pb = data(b.id);
  double* po = data(v.id);
  const std::size_t ia = sa.size() == 1 ? 0 : 1, ib = sb.size() == 1 ? 0 : 1;
  for (std::size_t i = 0; i < so.size(); ++i) po[i] = pa[i * ia] * pb[i * ib];
  check_finite(v.id);
  return v;
}

Var Tape::scale(Var a, double c) {
  check_same_tape(a);
  Var v = push(OpKind::Scale, {a}, shape(a), c);
  const double* pa = data(a.id);
  double* po = data(v.id);
  for (std::size_t i = 0; i < shape(a).size(); ++i) po[i] = c * pa[i];
  check_finite(v.id);
  return v;
}

Var Tape::matmul(Var a, Var b) {
  check_same_tape(a);
  check_same_tape(b);
  const Shape sa = shape(a), sb = shape(b);
  if (sa.cols != sb.rows) throw std::invalid_argument("matmul: inner dimension mismatch");
  Var v = push(OpKind::MatMul, {a, b}, {sa.rows, sb.cols});
  const double* pa = data(a.id);
  const double* pb = data(b.id);
  double* po = data(v.id);
  const std::size_t m = sa.rows, k = sa.cols, n = sb.cols;
  if (n == 1) {
    // Four independent partial sums keep the multiply-add pipeline busy.
    for (std::size_t i = 0; i < m; ++i) {
      const double* row = pa + i * k;
      double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
      std::size_t j = 0;
      for (; j + 4 <= k; j += 4) {
        a0 += row[j] * pb[j];
        a1 += row[j + 1] * pb[j + 1];
        a2 += row[j + 2] * pb[j + 2];
        a3 += row[j + 3] * pb[j + 3];
      }
      for (; j < k; ++j) a0 += row[j] * pb[j];
      po[i] = (a0 + a1) + (a2 + a3);
    }
  } else {
    std::fill(po, po + m * n, 0.0);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < k; ++j) {
        const double aij = pa[i * k + j];
        for (std::size_t c = 0; c < n; ++c) po[i * n + c] += aij * pb[j * n + c];
      }
  }
  check_finite(v.id);
  return v;
}

#define GAITVIB_UNARY(NAME, KIND, EXPR)                  \
  Var Tape::NAME(Var a) {                                \
    check_same_tape(a);                                  \
    Var v = push(OpKind::KIND, {a}, shape(a));           \
    const double* pa = data(a.id);                       \
    double* po = data(v.id);                             \
    for (std::size_t i = 0; i < shape(a).size(); ++i) {  \
      const double x = pa[i];                            \
      po[i] = (EXPR);                                    \
    }                                                    \
    check_finite(v.id);                                  \
    return v;                                            \
  }

GAITVIB_UNARY(tanh, Tanh, std::tanh(x))
GAITVIB_UNARY(sigmoid, Sigmoid, x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)))
GAITVIB_UNARY(sin, Sin, std::sin(x))
GAITVIB_UNARY(cos, Cos, std::cos(x))
GAITVIB_UNARY(exp, Exp, std::exp(x))

#undef GAITVIB_UNARY

Var Tape::sum(Var a) {
  check_same_tape(a);
  Var v = push(OpKind::Sum, {a}, {1, 1});
  const double* pa = data(a.id);
  double acc = 0.0;
  for (std::size_t i = 0; i < shape(a).size(); ++i) acc += pa[i];
  *data(v.id) = acc;
  check_finite(v.id);
  return v;
}

Var Tape::mean(Var a) { return scale(sum(a), 1.0 / static_cast<double>(shape(a).size())); }

Var Tape::softmax(Var a) {
  check_same_tape(a);
  Var v = push(OpKind::Softmax, {a}, shape(a));
  const double* pa = data(a.id);
  double* po = data(v.id);
  const std::size_t n = shape(a).size();
  const double mx = *std::max_element(pa, pa + n);
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) z += (po[i] = std::exp(pa[i] - mx));
  for (std::size_t i = 0; i < n; ++i) po[i] /= z;
  check_finite(v.id);
  return v;
}

Var Tape::concat(std::span<const Var> parts) {
  if (parts.empty()) throw std::invalid_argument("concat: no operands");
  const std::size_t cols = shape(parts[0]).cols;
  std::size_t rows = 0;
  for (const auto& p : parts) {
    check_same_tape(p);
    if (shape(p).cols != cols) throw std::invalid_argument("concat: column mismatch");
    rows += shape(p).rows;
  }
  Var v = push_n(OpKind::Concat, parts, {rows, cols});
  double* po = data(v.id);
  for (const auto& p : parts) {
    const double* pp = data(p.id);
    po = std::copy(pp, pp + shape(p).size(), po);
  }
  return v;
}

Var Tape::slice(Var a, std::size_t row_begin, std::size_t rows) {
  check_same_tape(a);
  const Shape sa = shape(a);
  if (row_begin + rows > sa.rows || rows == 0) throw std::invalid_argument("slice: out of range");
  Var v = push(OpKind::Slice, {a}, {rows, sa.cols}, 0.0, row_begin);
  const double* pa = data(a.id) + row_begin * sa.cols;
  std::copy(pa, pa + rows * sa.cols, data(v.id));
  return v;
}

Var Tape::sum_n(std::span<const Var> parts) {
  if (parts.empty()) throw std::invalid_argument("sum_n: no operands");
  const Shape s = shape(parts[0]);
  for (const auto& p : parts) {
    check_same_tape(p);
    if (!(shape(p) == s)) throw std::invalid_argument("sum_n: shape mismatch");
  }
  Var v = push_n(OpKind::SumN, parts, s);
  std::vector<double> column(parts.size());
  double* po = data(v.id);
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t k = 0; k < parts.size(); ++k) column[k] = data(parts[k].id)[i];
    std::sort(column.begin(), column.end());
    double acc = 0.0;
    for (double x : column) acc += x;
    po[i] = acc;
  }
  check_finite(v.id);
  return v;
}

std::span<const double> Tape::value(Var v) const {
  check_same_tape(v);
  return {data(v.id), nodes_[v.id].shape.size()};
}

double Tape::item(Var v) const {
  check_same_tape(v);
  if (nodes_[v.id].shape.size() != 1) throw std::invalid_argument("item: node is not a scalar");
  return *data(v.id);
}

void Tape::backward(Var out, std::span<double> grad) {
  check_same_tape(out);
  if (nodes_[out.id].shape.size() != 1) throw std::invalid_argument("backward: output must be 1x1");
  if (grad.size() != params_->size()) throw std::invalid_argument("backward: gradient size mismatch");

  adj_.assign(vals_.size(), 0.0);
  adj_[nodes_[out.id].offset] = 1.0;

  for (std::uint32_t id = out.id + 1; id-- > 0;) {
    const Node& n = nodes_[id];
    const double* g = adj_.data() + n.offset;
    const std::size_t size = n.shape.size();
    const double* y = vals_.data() + n.offset;

    auto adj_of = [&](std::size_t k) { return adj_.data() + nodes_[input(n, k)].offset; };
    auto val_of = [&](std::size_t k) { return vals_.data() + nodes_[input(n, k)].offset; };
    auto size_of = [&](std::size_t k) { return nodes_[input(n, k)].shape.size(); };

    switch (n.op) {
      case OpKind::Constant:
        break;
      case OpKind::Param: {
        for (std::size_t i = 0; i < size; ++i) grad[n.aux + i] += g[i];
        break;
      }
      case OpKind::Add:
      case OpKind::Sub: {
        const double sign = n.op == OpKind::Add ? 1.0 : -1.0;
        double* ga = adj_of(0);
        double* gb = adj_of(1);
        const bool ba = size_of(0) == 1 && size != 1;
        const bool bb = size_of(1) == 1 && size != 1;
        for (std::size_t i = 0; i < size; ++i) {
          ga[ba ? 0 : i] += g[i];
          gb[bb ? 0 : i] += sign * g[i];
        }
        break;
      }
      case OpKind::Mul: {
        double* ga = adj_of(0);
        double* gb = adj_of(1);
        const double* a = val_of(0);
        const double* b = val_of(1);
        const std::size_t ia = size_of(0) == 1 ? 0 : 1, ib = size_of(1) == 1 ? 0 : 1;
        for (std::size_t i = 0; i < size; ++i) {
          ga[i * ia] += g[i] * b[i * ib];
          gb[i * ib] += g[i] * a[i * ia];
        }
        break;
      }
      case OpKind::Scale: {
        double* ga = adj_of(0);
        for (std::size_t i = 0; i < size; ++i) ga[i] += n.c * g[i];
        break;
      }
      case OpKind::MatMul: {
        const Shape sa = nodes_[input(n, 0)].shape;
        const std::size_t m = sa.rows, k = sa.cols, c = n.shape.cols;
        const double* a = val_of(0);
        const double* b = val_of(1);
        double* ga = adj_of(0);
        double* gb = adj_of(1);
        const bool a_const = nodes_[input(n, 0)].op == OpKind::Constant;
        const bool b_const = nodes_[input(n, 1)].op == OpKind::Constant;
        if (c == 1) {
          for (std::size_t i = 0; i < m; ++i) {
            const double gi = g[i];
            if (gi == 0.0) continue;
            if (!a_const) {
              double* gr = ga + i * k;
              for (std::size_t j = 0; j < k; ++j) gr[j] += gi * b[j];
            }
            if (!b_const) {
              const double* ar = a + i * k;
              for (std::size_t j = 0; j < k; ++j) gb[j] += gi * ar[j];
            }
          }
          break;
        }
        for (std::size_t i = 0; i < m; ++i) {
          for (std::size_t cc = 0; cc < c; ++cc) {
            const double gi = g[i * c + cc];
            if (gi == 0.0) continue;
            if (!a_const)
              for (std::size_t j = 0; j < k; ++j) ga[i * k + j] += gi * b[j * c + cc];
            if (!b_const)
              for (std::size_t j = 0; j < k; ++j) gb[j * c + cc] += gi * a[i * k + j];
          }
        }
        break;
      }
      case OpKind::Tanh: {
        double* ga = adj_of(0);
        for (std::size_t i = 0; i < size; ++i) ga[i] += g[i] * (1.0 - y[i] * y[i]);
        break;
      }
      case OpKind::Sigmoid: {
        double* ga = adj_of(0);
        for (std::size_t i = 0; i < size; ++i) ga[i] += g[i] * y[i] * (1.0 - y[i]);
        break;
      }
      case OpKind::Sin: {
        double* ga = adj_of(0);
        const double* x = val_of(0);
        for (std::size_t i = 0; i < size; ++i) ga[i] += g[i] * std::cos(x[i]);
        break;
      }
      case OpKind::Cos: {
        double* ga = adj_of(0);
        const double* x = val_of(0);
        for (std::size_t i = 0; i < size; ++i) ga[i] -= g[i] * std::sin(x[i]);
        break;
      }
      case OpKind::Exp: {
        double* ga = adj_of(0);
        for (std::size_t i = 0; i < size; ++i) ga[i] += g[i] * y[i];
        break;
      }
      case OpKind::Sum: {
        double* ga = adj_of(0);
        for (std::size_t i = 0; i < size_of(0); ++i) ga[i] += g[0];
        break;
      }
      case OpKind::Softmax: {
        double* ga = adj_of(0);
        double dot = 0.0;
        for (std::size_t i = 0; i < size; ++i) dot += g[i] * y[i];
        for (std::size_t i = 0; i < size; ++i) ga[i] += y[i] * (g[i] - dot);
        break;
      }
      case OpKind::Concat: {
        const double* gp = g;
        for (std::size_t k = 0; k < n.in_count; ++k) {
          double* ga = adj_of(k);
          const std::size_t s = size_of(k);
          for (std::size_t i = 0; i < s; ++i) ga[i] += gp[i];
          gp += s;
        }
        break;
      }
      case OpKind::Slice: {
        const std::size_t cols = nodes_[input(n, 0)].shape.cols;
        double* ga = adj_of(0) + n.aux * cols;
        for (std::size_t i = 0; i < size; ++i) ga[i] += g[i];
        break;
      }
      case OpKind::SumN: {
        for (std::size_t k = 0; k < n.in_count; ++k) {
          double* ga = adj_of(k);
          for (std::size_t i = 0; i < size; ++i) ga[i] += g[i];
        }
        break;
      }
    }
    for (std::size_t i = 0; i < size; ++i) {
      if (!std::isfinite(g[i])) {
        throw NumericError("non-finite adjoint at tape node " + std::to_string(id) + " (" +
                           std::string(op_name(n.op)) + ")");
      }
    }
  }
}

std::vector<double> grad(const std::function<Var(Tape&)>& objective, const ParamStore& params) {
  Tape tape(params);
  Var out = objective(tape);
  std::vector<double> g(params.size(), 0.0);
  tape.backward(out, g);
  return g;
}

}  // namespace gaitvib::num
