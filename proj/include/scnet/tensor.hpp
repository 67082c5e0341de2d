#pragma once

// Dense-tensor reverse-mode differentiation engine. Tensors are flat
// row-major arrays with a shape vector; differentiable results carry a
// node index into the Tape that owns the backward closures.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace scnet::nd {

using Shape = std::vector<int>;

inline std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < s.size(); ++i) os << (i ? "x" : "") << s[i];
  os << "]";
  return os.str();
}

inline size_t shape_numel(const Shape& s) {
  size_t n = 1;
  for (int d : s) n *= static_cast<size_t>(d);
  return n;
}

[[noreturn]] inline void dim_error(const std::string& what, const Shape& a, const Shape& b) {
  throw std::invalid_argument(what + ": " + shape_str(a) + " vs " + shape_str(b));
}

template <typename Real>
class Tape;

template <typename Real>
struct Tensor {
  Shape shape;
  std::shared_ptr<std::vector<Real>> data;
  Tape<Real>* tape = nullptr;
  int node = -1;  // -1: constant, not on any tape

  Tensor() = default;
  Tensor(Shape s, std::vector<Real> v) : shape(std::move(s)), data(std::make_shared<std::vector<Real>>(std::move(v))) {
    if (shape_numel(shape) != data->size())
      throw std::invalid_argument("tensor size mismatch: " + shape_str(shape) + " vs " + std::to_string(data->size()));
  }
  static Tensor zeros(Shape s) { return Tensor(std::move(s), {}, Real(0)); }
  static Tensor full(Shape s, Real fill) { return Tensor(std::move(s), {}, fill); }
  static Tensor scalar(Real v) { return Tensor({1}, std::vector<Real>{v}); }

  size_t size() const { return data ? data->size() : 0; }
  int dim(int i) const { return shape[i < 0 ? static_cast<int>(shape.size()) + i : i]; }
  int ndim() const { return static_cast<int>(shape.size()); }
  Real* ptr() { return data->data(); }
  const Real* ptr() const { return data->data(); }
  Real& at(size_t i) { return (*data)[i]; }
  Real at(size_t i) const { return (*data)[i]; }
  bool on_tape() const { return tape != nullptr && node >= 0; }

 private:
  Tensor(Shape s, std::vector<Real>, Real fill) : shape(std::move(s)) {
    data = std::make_shared<std::vector<Real>>(shape_numel(shape), fill);
  }
};

// Ordered record of backward closures. Replaying them in reverse order
// propagates the root gradient to every recorded node exactly once.
template <typename Real>
class Tape {
 public:
  int push(size_t grad_size, std::function<void()> backprop) {
    nodes_.push_back(Node{std::move(backprop), std::vector<Real>(grad_size, Real(0))});
    return static_cast<int>(nodes_.size()) - 1;
  }

  std::vector<Real>& grad(int node) { return nodes_[static_cast<size_t>(node)].grad; }

  void backward(const Tensor<Real>& root) {
    if (root.size() != 1) throw std::invalid_argument("backward: root must be scalar");
    if (root.tape != this || root.node < 0) throw std::invalid_argument("backward: root not on this tape");
    nodes_[static_cast<size_t>(root.node)].grad[0] = Real(1);
    for (int i = static_cast<int>(nodes_.size()) - 1; i >= 0; --i)
      if (nodes_[static_cast<size_t>(i)].backprop) nodes_[static_cast<size_t>(i)].backprop();
  }

  void clear() { nodes_.clear(); }
  size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    std::function<void()> backprop;
    std::vector<Real> grad;
  };
  std::vector<Node> nodes_;
};

namespace detail {

template <typename Real>
Tape<Real>* joint_tape(const Tensor<Real>& a, const Tensor<Real>& b) {
  if (a.tape && b.tape && a.tape != b.tape) throw std::invalid_argument("operands on different tapes");
  return a.tape ? a.tape : b.tape;
}

// Row-major Eigen views.
template <typename Real>
using Mat = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Real>
using MapM = Eigen::Map<Mat<Real>>;
template <typename Real>
using CMapM = Eigen::Map<const Mat<Real>>;

// numpy-style broadcast of b's shape against a's; returns output shape.
inline Shape broadcast_shape(const Shape& a, const Shape& b) {
  Shape out(std::max(a.size(), b.size()));
  for (size_t i = 0; i < out.size(); ++i) {
    int da = i < out.size() - a.size() ? 1 : a[i - (out.size() - a.size())];
    int db = i < out.size() - b.size() ? 1 : b[i - (out.size() - b.size())];
    if (da != db && da != 1 && db != 1) dim_error("broadcast mismatch", a, b);
    out[i] = std::max(da, db);
  }
  return out;
}

inline std::vector<size_t> strides_for(const Shape& shape, const Shape& out) {
  // stride of `shape` viewed inside `out`, 0 along broadcast dims
  std::vector<size_t> st(out.size(), 0);
  size_t acc = 1;
  for (int i = static_cast<int>(shape.size()) - 1; i >= 0; --i) {
    size_t oi = out.size() - shape.size() + static_cast<size_t>(i);
    st[oi] = (shape[static_cast<size_t>(i)] == 1 && out[oi] != 1) ? 0 : acc;
    acc *= static_cast<size_t>(shape[static_cast<size_t>(i)]);
  }
  return st;
}

// Calls f(out_index, a_index, b_index) for every output element.
template <class F>
void for_each_bcast(const Shape& sa, const Shape& sb, const Shape& out, F&& f) {
  auto sta = strides_for(sa, out);
  auto stb = strides_for(sb, out);
  size_t n = shape_numel(out);
  std::vector<int> idx(out.size(), 0);
  size_t ia = 0, ib = 0;
  for (size_t io = 0; io < n; ++io) {
    f(io, ia, ib);
    for (int d = static_cast<int>(out.size()) - 1; d >= 0; --d) {
      size_t du = static_cast<size_t>(d);
      if (++idx[du] < out[du]) {
        ia += sta[du];
        ib += stb[du];
        break;
      }
      idx[du] = 0;
      ia -= sta[du] * static_cast<size_t>(out[du] - 1);
      ib -= stb[du] * static_cast<size_t>(out[du] - 1);
    }
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// binary elementwise ops with broadcasting

template <typename Real, class Fwd, class Bwd>
Tensor<Real> binary_op(const Tensor<Real>& a, const Tensor<Real>& b, Fwd fwd, Bwd bwd) {
  Shape out_shape = detail::broadcast_shape(a.shape, b.shape);
  Tensor<Real> out = Tensor<Real>::zeros(out_shape);
  const Real* pa = a.ptr();
  const Real* pb = b.ptr();
  Real* po = out.ptr();
  if (a.shape == b.shape) {
    for (size_t i = 0; i < out.size(); ++i) po[i] = fwd(pa[i], pb[i]);
  } else {
    detail::for_each_bcast(a.shape, b.shape, out_shape, [&](size_t io, size_t ia, size_t ib) { po[io] = fwd(pa[ia], pb[ib]); });
  }
  Tape<Real>* tape = detail::joint_tape(a, b);
  if (!tape) return out;
  out.tape = tape;
  const int id = static_cast<int>(tape->size());
  out.node = tape->push(out.size(), [tape, a, b, out, bwd, id]() {
    const auto& g = tape->grad(id);
    Real* ga = a.on_tape() ? tape->grad(a.node).data() : nullptr;
    Real* gb = b.on_tape() ? tape->grad(b.node).data() : nullptr;
    const Real* pa = a.ptr();
    const Real* pb = b.ptr();
    if (a.shape == b.shape) {
      for (size_t i = 0; i < out.size(); ++i) {
        auto [da, db] = bwd(pa[i], pb[i]);
        if (ga) ga[i] += g[i] * da;
        if (gb) gb[i] += g[i] * db;
      }
    } else {
      detail::for_each_bcast(a.shape, b.shape, out.shape, [&](size_t io, size_t ia, size_t ib) {
        auto [da, db] = bwd(pa[ia], pb[ib]);
        if (ga) ga[ia] += g[io] * da;
        if (gb) gb[ib] += g[io] * db;
      });
    }
  });
  return out;
}

template <typename Real>
Tensor<Real> add(const Tensor<Real>& a, const Tensor<Real>& b) {
  return binary_op(a, b, [](Real x, Real y) { return x + y; }, [](Real, Real) { return std::pair<Real, Real>(1, 1); });
}
template <typename Real>
Tensor<Real> sub(const Tensor<Real>& a, const Tensor<Real>& b) {
  return binary_op(a, b, [](Real x, Real y) { return x - y; }, [](Real, Real) { return std::pair<Real, Real>(1, -1); });
}
template <typename Real>
Tensor<Real> mul(const Tensor<Real>& a, const Tensor<Real>& b) {
  return binary_op(a, b, [](Real x, Real y) { return x * y; }, [](Real x, Real y) { return std::pair<Real, Real>(y, x); });
}
// caller guards: |y| must stay away from 0 (add an epsilon tensor upstream)
template <typename Real>
Tensor<Real> div(const Tensor<Real>& a, const Tensor<Real>& b) {
  return binary_op(a, b, [](Real x, Real y) { return x / y; },
                   [](Real x, Real y) { return std::pair<Real, Real>(Real(1) / y, -x / (y * y)); });
}

// ---------------------------------------------------------------------------
// unary elementwise ops

template <typename Real, class Fwd, class Bwd>
Tensor<Real> unary_op(const Tensor<Real>& a, Fwd fwd, Bwd bwd) {
  Tensor<Real> out = Tensor<Real>::zeros(a.shape);
  const Real* pa = a.ptr();
  Real* po = out.ptr();
  for (size_t i = 0; i < a.size(); ++i) po[i] = fwd(pa[i]);
  if (!a.tape) return out;
  out.tape = a.tape;
  Tape<Real>* tape = a.tape;
  const int id = static_cast<int>(tape->size());
  out.node = tape->push(out.size(), [tape, a, out, bwd, id]() {
    const auto& g = tape->grad(id);
    if (!a.on_tape()) return;
    Real* ga = tape->grad(a.node).data();
    const Real* pa = a.ptr();
    const Real* po = out.ptr();
    for (size_t i = 0; i < out.size(); ++i) ga[i] += g[i] * bwd(pa[i], po[i]);
  });
  return out;
}

template <typename Real>
Tensor<Real> neg(const Tensor<Real>& a) {
  return unary_op(a, [](Real x) { return -x; }, [](Real, Real) { return Real(-1); });
}
template <typename Real>
Tensor<Real> scale(const Tensor<Real>& a, Real c) {
  return unary_op(a, [c](Real x) { return c * x; }, [c](Real, Real) { return c; });
}
template <typename Real>
Tensor<Real> add_const(const Tensor<Real>& a, Real c) {
  return unary_op(a, [c](Real x) { return x + c; }, [](Real, Real) { return Real(1); });
}
template <typename Real>
Tensor<Real> relu(const Tensor<Real>& a) {
  return unary_op(a, [](Real x) { return x > 0 ? x : Real(0); }, [](Real x, Real) { return x > 0 ? Real(1) : Real(0); });
}
template <typename Real>
Tensor<Real> sigmoid(const Tensor<Real>& a) {
  return unary_op(
      a,
      [](Real x) {
        if (x >= 0) return Real(1) / (Real(1) + std::exp(-x));
        Real e = std::exp(x);
        return e / (Real(1) + e);
      },
      [](Real, Real y) { return y * (Real(1) - y); });
}
template <typename Real>
Tensor<Real> exp_t(const Tensor<Real>& a) {
  return unary_op(a, [](Real x) { return std::exp(x); }, [](Real, Real y) { return y; });
}
// log(x + eps), the epsilon keeps zeros finite
template <typename Real>
Tensor<Real> log_t(const Tensor<Real>& a, Real eps = Real(0)) {
  return unary_op(a, [eps](Real x) { return std::log(x + eps); }, [eps](Real x, Real) { return Real(1) / (x + eps); });
}
// sqrt(x + eps); eps > 0 keeps the derivative finite at x = 0
template <typename Real>
Tensor<Real> sqrt_t(const Tensor<Real>& a, Real eps = Real(0)) {
  return unary_op(a, [eps](Real x) { return std::sqrt(x + eps); }, [](Real, Real y) { return Real(1) / (2 * y); });
}
template <typename Real>
Tensor<Real> pow_const(const Tensor<Real>& a, Real p) {
  return unary_op(a, [p](Real x) { return std::pow(x, p); },
                  [p](Real x, Real) { return x == Real(0) && p > 1 ? Real(0) : p * std::pow(x, p - 1); });
}

// ---------------------------------------------------------------------------
// matmul: 2D x 2D, 3D x 3D (batched), 3D x 2D (rhs shared across batch);
// ta/tb transpose the last two dims of the respective operand.

template <typename Real>
Tensor<Real> matmul(const Tensor<Real>& a, const Tensor<Real>& b, bool ta = false, bool tb = false) {
  if (a.ndim() < 2 || b.ndim() < 2 || a.ndim() > 3 || b.ndim() > 3) dim_error("matmul rank", a.shape, b.shape);
  if (b.ndim() == 3 && a.ndim() == 2) dim_error("matmul: 2D x 3D unsupported", a.shape, b.shape);
  const int batch = a.ndim() == 3 ? a.shape[0] : 1;
  if (b.ndim() == 3 && b.shape[0] != batch) dim_error("matmul batch", a.shape, b.shape);
  const int ar = a.dim(-2), ac = a.dim(-1);
  const int br = b.dim(-2), bc = b.dim(-1);
  const int n = ta ? ac : ar, m = ta ? ar : ac;
  const int m2 = tb ? bc : br, p = tb ? br : bc;
  if (m != m2) dim_error("matmul inner", a.shape, b.shape);

  Shape out_shape = a.ndim() == 3 ? Shape{batch, n, p} : Shape{n, p};
  Tensor<Real> out = Tensor<Real>::zeros(out_shape);
  const size_t as = static_cast<size_t>(ar) * ac, bs = b.ndim() == 3 ? static_cast<size_t>(br) * bc : 0;
  const size_t os = static_cast<size_t>(n) * p;
  for (int i = 0; i < batch; ++i) {
    detail::CMapM<Real> A(a.ptr() + as * i, ar, ac);
    detail::CMapM<Real> B(b.ptr() + (b.ndim() == 3 ? bs * i : 0), br, bc);
    detail::MapM<Real> C(out.ptr() + os * i, n, p);
    if (!ta && !tb) C.noalias() = A * B;
    else if (ta && !tb) C.noalias() = A.transpose() * B;
    else if (!ta && tb) C.noalias() = A * B.transpose();
    else C.noalias() = A.transpose() * B.transpose();
  }

  Tape<Real>* tape = detail::joint_tape(a, b);
  if (!tape) return out;
  out.tape = tape;
  const int id = static_cast<int>(tape->size());
  out.node = tape->push(out.size(), [tape, a, b, out, ta, tb, batch, ar, ac, br, bc, n, p, as, bs, os, id]() {
    const Real* g = tape->grad(id).data();
    Real* ga = a.on_tape() ? tape->grad(a.node).data() : nullptr;
    Real* gb = b.on_tape() ? tape->grad(b.node).data() : nullptr;
    for (int i = 0; i < batch; ++i) {
      detail::CMapM<Real> A(a.ptr() + as * i, ar, ac);
      detail::CMapM<Real> B(b.ptr() + (b.ndim() == 3 ? bs * i : 0), br, bc);
      detail::CMapM<Real> G(g + os * i, n, p);
      if (ga) {
        detail::MapM<Real> GA(ga + as * i, ar, ac);
        if (!ta && !tb) GA.noalias() += G * B.transpose();
        else if (!ta && tb) GA.noalias() += G * B;
        else if (ta && !tb) GA.noalias() += B * G.transpose();
        else GA.noalias() += B.transpose() * G.transpose();
      }
      if (gb) {
        detail::MapM<Real> GB(gb + (b.ndim() == 3 ? bs * i : 0), br, bc);
        if (!ta && !tb) GB.noalias() += A.transpose() * G;
        else if (!ta && tb) GB.noalias() += G.transpose() * A;
        else if (ta && !tb) GB.noalias() += A * G;
        else GB.noalias() += G.transpose() * A.transpose();
      }
    }
  });
  return out;
}

// ---------------------------------------------------------------------------
// reductions and structure ops

template <typename Real>
Tensor<Real> sum_all(const Tensor<Real>& a) {
  Real s = std::accumulate(a.ptr(), a.ptr() + a.size(), Real(0));
  Tensor<Real> out = Tensor<Real>::scalar(s);
  if (!a.tape) return out;
  Tape<Real>* tape = a.tape;
  out.tape = tape;
  const int id = static_cast<int>(tape->size());
  out.node = tape->push(1, [tape, a, id]() {
    if (!a.on_tape()) return;
    const Real g = tape->grad(id)[0];
    Real* ga = tape->grad(a.node).data();
    for (size_t i = 0; i < a.size(); ++i) ga[i] += g;
  });
  return out;
}

template <typename Real>
Tensor<Real> sum_axis(const Tensor<Real>& a, int axis, bool keepdim = false) {
  if (axis < 0) axis += a.ndim();
  if (axis < 0 || axis >= a.ndim()) throw std::invalid_argument("sum_axis: bad axis");
  size_t outer = 1, inner = 1;
  const size_t mid = static_cast<size_t>(a.shape[static_cast<size_t>(axis)]);
  for (int i = 0; i < axis; ++i) outer *= static_cast<size_t>(a.shape[static_cast<size_t>(i)]);
  for (int i = axis + 1; i < a.ndim(); ++i) inner *= static_cast<size_t>(a.shape[static_cast<size_t>(i)]);
  Shape out_shape;
  for (int i = 0; i < a.ndim(); ++i) {
    if (i == axis) {
      if (keepdim) out_shape.push_back(1);
    } else {
      out_shape.push_back(a.shape[static_cast<size_t>(i)]);
    }
  }
  if (out_shape.empty()) out_shape = {1};
  Tensor<Real> out = Tensor<Real>::zeros(out_shape);
  const Real* pa = a.ptr();
  Real* po = out.ptr();
  for (size_t o = 0; o < outer; ++o)
    for (size_t m = 0; m < mid; ++m)
      for (size_t i = 0; i < inner; ++i) po[o * inner + i] += pa[(o * mid + m) * inner + i];
  if (!a.tape) return out;
  Tape<Real>* tape = a.tape;
  out.tape = tape;
  const int id = static_cast<int>(tape->size());
  out.node = tape->push(out.size(), [tape, a, outer, mid, inner, id]() {
    if (!a.on_tape()) return;
    const Real* g = tape->grad(id).data();
    Real* ga = tape->grad(a.node).data();
    for (size_t o = 0; o < outer; ++o)
      for (size_t m = 0; m < mid; ++m)
        for (size_t i = 0; i < inner; ++i) ga[(o * mid + m) * inner + i] += g[o * inner + i];
  });
  return out;
}

template <typename Real>
Tensor<Real> mean_axis(const Tensor<Real>& a, int axis, bool keepdim = false) {
  int ax = axis < 0 ? axis + a.ndim() : axis;
  return scale(sum_axis(a, axis, keepdim), Real(1) / Real(a.shape[static_cast<size_t>(ax)]));
}

// row-max over the last dim, kept as a size-1 trailing dim; gradient flows
// to the first maximal entry of each row
template <typename Real>
Tensor<Real> max_lastdim(const Tensor<Real>& a) {
  const int s = a.dim(-1);
  const size_t rows = a.size() / static_cast<size_t>(s);
  Shape out_shape = a.shape;
  out_shape.back() = 1;
  Tensor<Real> out = Tensor<Real>::zeros(out_shape);
  auto argmax = std::make_shared<std::vector<int>>(rows);
  const Real* pa = a.ptr();
  for (size_t r = 0; r < rows; ++r) {
    int best = 0;
    for (int j = 1; j < s; ++j)
      if (pa[r * static_cast<size_t>(s) + static_cast<size_t>(j)] > pa[r * static_cast<size_t>(s) + static_cast<size_t>(best)]) best = j;
    (*argmax)[r] = best;
    out.at(r) = pa[r * static_cast<size_t>(s) + static_cast<size_t>(best)];
  }
  if (!a.tape) return out;
  Tape<Real>* tape = a.tape;
  out.tape = tape;
  const int id = static_cast<int>(tape->size());
  out.node = tape->push(out.size(), [tape, a, argmax, s, rows, id]() {
    if (!a.on_tape()) return;
    const Real* g = tape->grad(id).data();
    Real* ga = tape->grad(a.node).data();
    for (size_t r = 0; r < rows; ++r) ga[r * static_cast<size_t>(s) + static_cast<size_t>((*argmax)[r])] += g[r];
  });
  return out;
}

// softmax over the last dim, max-stabilized; rows whose mask entry is 0
// come out all-zero (padding rows). mask has one entry per row or is empty.
template <typename Real>
Tensor<Real> softmax_lastdim(const Tensor<Real>& a, const std::vector<Real>& row_mask = {}) {
  const int s = a.dim(-1);
  const size_t rows = a.size() / static_cast<size_t>(s);
  if (!row_mask.empty() && row_mask.size() != rows)
    throw std::invalid_argument("softmax_lastdim: mask length " + std::to_string(row_mask.size()) + " vs rows " + std::to_string(rows));
  Tensor<Real> out = Tensor<Real>::zeros(a.shape);
  const Real* pa = a.ptr();
  Real* po = out.ptr();
  for (size_t r = 0; r < rows; ++r) {
    if (!row_mask.empty() && row_mask[r] == Real(0)) continue;
    const Real* x = pa + r * static_cast<size_t>(s);
    Real* y = po + r * static_cast<size_t>(s);
    Real mx = x[0];
    for (int j = 1; j < s; ++j) mx = std::max(mx, x[j]);
    Real z = 0;
    for (int j = 0; j < s; ++j) {
      y[j] = std::exp(x[j] - mx);
      z += y[j];
    }
    for (int j = 0; j < s; ++j) y[j] /= z;
  }
  if (!a.tape) return out;
  Tape<Real>* tape = a.tape;
  out.tape = tape;
  const int id = static_cast<int>(tape->size());
  out.node = tape->push(out.size(), [tape, a, out, row_mask, s, rows, id]() {
    if (!a.on_tape()) return;
    const Real* g = tape->grad(id).data();
    const Real* y = out.ptr();
    Real* ga = tape->grad(a.node).data();
    for (size_t r = 0; r < rows; ++r) {
      if (!row_mask.empty() && row_mask[r] == Real(0)) continue;
      const size_t off = r * static_cast<size_t>(s);
      Real dot = 0;
      for (int j = 0; j < s; ++j) dot += g[off + static_cast<size_t>(j)] * y[off + static_cast<size_t>(j)];
      for (int j = 0; j < s; ++j)
        ga[off + static_cast<size_t>(j)] += y[off + static_cast<size_t>(j)] * (g[off + static_cast<size_t>(j)] - dot);
    }
  });
  return out;
}

template <typename Real>
Tensor<Real> reshape(const Tensor<Real>& a, Shape new_shape) {
  if (shape_numel(new_shape) != a.size()) dim_error("reshape", a.shape, new_shape);
  Tensor<Real> out;
  out.shape = std::move(new_shape);
  out.data = std::make_shared<std::vector<Real>>(*a.data);
  if (!a.tape) return out;
  Tape<Real>* tape = a.tape;
  out.tape = tape;
  const int id = static_cast<int>(tape->size());
  out.node = tape->push(out.size(), [tape, a, id]() {
    if (!a.on_tape()) return;
    const auto& g = tape->grad(id);
    Real* ga = tape->grad(a.node).data();
    for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
  });
  return out;
}

template <typename Real>
Tensor<Real> concat_lastdim(const std::vector<Tensor<Real>>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_lastdim: no inputs");
  Shape lead(parts[0].shape.begin(), parts[0].shape.end() - 1);
  int total = 0;
  Tape<Real>* tape = nullptr;
  for (const auto& p : parts) {
    Shape pl(p.shape.begin(), p.shape.end() - 1);
    if (pl != lead) dim_error("concat_lastdim", parts[0].shape, p.shape);
    total += p.dim(-1);
    if (p.tape) tape = p.tape;
  }
  Shape out_shape = lead;
  out_shape.push_back(total);
  Tensor<Real> out = Tensor<Real>::zeros(out_shape);
  const size_t rows = shape_numel(lead);
  size_t col = 0;
  for (const auto& p : parts) {
    const size_t w = static_cast<size_t>(p.dim(-1));
    for (size_t r = 0; r < rows; ++r)
      std::copy_n(p.ptr() + r * w, w, out.ptr() + r * static_cast<size_t>(total) + col);
    col += w;
  }
  if (!tape) return out;
  out.tape = tape;
  const int id = static_cast<int>(tape->size());
  out.node = tape->push(out.size(), [tape, parts, rows, total, id]() {
    const Real* g = tape->grad(id).data();
    size_t col = 0;
    for (const auto& p : parts) {
      const size_t w = static_cast<size_t>(p.dim(-1));
      if (p.on_tape()) {
        Real* gp = tape->grad(p.node).data();
        for (size_t r = 0; r < rows; ++r)
          for (size_t j = 0; j < w; ++j) gp[r * w + j] += g[r * static_cast<size_t>(total) + col + j];
      }
      col += w;
    }
  });
  return out;
}

// gather rows of a 2D tensor; backward scatter-adds
template <typename Real>
Tensor<Real> gather_rows(const Tensor<Real>& a, std::vector<int> rows) {
  if (a.ndim() != 2) throw std::invalid_argument("gather_rows: need 2D, got " + shape_str(a.shape));
  const int d = a.shape[1];
  Tensor<Real> out = Tensor<Real>::zeros({static_cast<int>(rows.size()), d});
  for (size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] < 0 || rows[r] >= a.shape[0]) throw std::out_of_range("gather_rows: row " + std::to_string(rows[r]));
    std::copy_n(a.ptr() + static_cast<size_t>(rows[r]) * static_cast<size_t>(d), static_cast<size_t>(d),
                out.ptr() + r * static_cast<size_t>(d));
  }
  if (!a.tape) return out;
  Tape<Real>* tape = a.tape;
  out.tape = tape;
  auto idx = std::make_shared<std::vector<int>>(std::move(rows));
  const int id = static_cast<int>(tape->size());
  out.node = tape->push(out.size(), [tape, a, idx, d, id]() {
    if (!a.on_tape()) return;
    const Real* g = tape->grad(id).data();
    Real* ga = tape->grad(a.node).data();
    for (size_t r = 0; r < idx->size(); ++r)
      for (int j = 0; j < d; ++j)
        ga[static_cast<size_t>((*idx)[r]) * static_cast<size_t>(d) + static_cast<size_t>(j)] += g[r * static_cast<size_t>(d) + static_cast<size_t>(j)];
  });
  return out;
}

// selects column k of the last dim, kept as a size-1 trailing dim
template <typename Real>
Tensor<Real> take_lastdim(const Tensor<Real>& a, int k) {
  const int s = a.dim(-1);
  if (k < 0 || k >= s) throw std::out_of_range("take_lastdim: column " + std::to_string(k) + " of " + shape_str(a.shape));
  const size_t rows = a.size() / static_cast<size_t>(s);
  Shape out_shape = a.shape;
  out_shape.back() = 1;
  Tensor<Real> out = Tensor<Real>::zeros(out_shape);
  for (size_t r = 0; r < rows; ++r) out.at(r) = a.at(r * static_cast<size_t>(s) + static_cast<size_t>(k));
  if (!a.tape) return out;
  Tape<Real>* tape = a.tape;
  out.tape = tape;
  const int id = static_cast<int>(tape->size());
  out.node = tape->push(out.size(), [tape, a, k, s, rows, id]() {
    if (!a.on_tape()) return;
    const Real* g = tape->grad(id).data();
    Real* ga = tape->grad(a.node).data();
    for (size_t r = 0; r < rows; ++r) ga[r * static_cast<size_t>(s) + static_cast<size_t>(k)] += g[r];
  });
  return out;
}

// stacks 2D tensors of equal width on top of each other
template <typename Real>
Tensor<Real> concat_rows(const std::vector<Tensor<Real>>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_rows: no inputs");
  const int d = parts[0].dim(-1);
  int rows = 0;
  Tape<Real>* tape = nullptr;
  for (const auto& p : parts) {
    if (p.ndim() != 2 || p.shape[1] != d) dim_error("concat_rows", parts[0].shape, p.shape);
    rows += p.shape[0];
    if (p.tape) tape = p.tape;
  }
  Tensor<Real> out = Tensor<Real>::zeros({rows, d});
  size_t off = 0;
  for (const auto& p : parts) {
    std::copy_n(p.ptr(), p.size(), out.ptr() + off);
    off += p.size();
  }
  if (!tape) return out;
  out.tape = tape;
  const int id = static_cast<int>(tape->size());
  out.node = tape->push(out.size(), [tape, parts, id]() {
    const Real* g = tape->grad(id).data();
    size_t off = 0;
    for (const auto& p : parts) {
      if (p.on_tape()) {
        Real* gp = tape->grad(p.node).data();
        for (size_t i = 0; i < p.size(); ++i) gp[i] += g[off + i];
      }
      off += p.size();
    }
  });
  return out;
}

// contiguous row range of a 2D tensor
template <typename Real>
Tensor<Real> slice_rows(const Tensor<Real>& a, int begin, int count) {
  if (a.ndim() != 2) throw std::invalid_argument("slice_rows: need 2D, got " + shape_str(a.shape));
  if (begin < 0 || count < 0 || begin + count > a.shape[0]) throw std::out_of_range("slice_rows: bad range");
  const size_t d = static_cast<size_t>(a.shape[1]);
  Tensor<Real> out = Tensor<Real>::zeros({count, a.shape[1]});
  std::copy_n(a.ptr() + static_cast<size_t>(begin) * d, static_cast<size_t>(count) * d, out.ptr());
  if (!a.tape) return out;
  Tape<Real>* tape = a.tape;
  out.tape = tape;
  const int id = static_cast<int>(tape->size());
  out.node = tape->push(out.size(), [tape, a, begin, count, d, id]() {
    if (!a.on_tape()) return;
    const Real* g = tape->grad(id).data();
    Real* ga = tape->grad(a.node).data() + static_cast<size_t>(begin) * d;
    for (size_t i = 0; i < static_cast<size_t>(count) * d; ++i) ga[i] += g[i];
  });
  return out;
}

template <typename Real>
bool all_finite(const Tensor<Real>& a) {
  for (size_t i = 0; i < a.size(); ++i)
    if (!std::isfinite(a.at(i))) return false;
  return true;
}

}  // namespace scnet::nd
