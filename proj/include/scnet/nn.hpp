#pragma once

// Learnable parameters, masked batch normalization, Glorot init and the
// Adam optimizer, on top of the tensor engine.

#include "scnet/tensor.hpp"

#include <random>
#include <string>
#include <unordered_map>
#include <vector>

namespace scnet::nd {

template <typename Real>
struct Parameter {
  std::string name;
  Tensor<Real> value;
  std::vector<Real> grad;

  Parameter() = default;
  Parameter(std::string n, Tensor<Real> v) : name(std::move(n)), value(std::move(v)), grad(value.size(), Real(0)) {}

  void zero_grad() { std::fill(grad.begin(), grad.end(), Real(0)); }

  // Binds the parameter to the tape for one forward pass; the returned
  // tensor's backward accumulates into this->grad.
  Tensor<Real> use(Tape<Real>& tape) {
    Tensor<Real> t = value;
    t.tape = &tape;
    Parameter* self = this;
    const int id = static_cast<int>(tape.size());
    Tape<Real>* tp = &tape;
    t.node = tape.push(t.size(), [tp, self, id]() {
      const auto& g = tp->grad(id);
      for (size_t i = 0; i < g.size(); ++i) self->grad[i] += g[i];
    });
    return t;
  }
};

template <typename Real>
using ParamRefs = std::vector<Parameter<Real>*>;

// Glorot-uniform init: U(-a, a) with a = sqrt(6 / (fan_in + fan_out)).
template <typename Real>
Tensor<Real> glorot_uniform(int fan_in, int fan_out, Shape shape, std::mt19937_64& rng) {
  Real a = std::sqrt(Real(6) / Real(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-static_cast<double>(a), static_cast<double>(a));
  Tensor<Real> t = Tensor<Real>::zeros(std::move(shape));
  for (size_t i = 0; i < t.size(); ++i) t.at(i) = static_cast<Real>(dist(rng));
  return t;
}

// ---------------------------------------------------------------------------
// batch normalization over the rows of a 2D tensor; rows with mask 0 are
// excluded from the statistics but still transformed (they are re-masked
// downstream). Running stats follow the usual momentum update.

template <typename Real>
struct BatchNormState {
  std::vector<Real> running_mean;
  std::vector<Real> running_var;
  Real momentum = Real(0.1);
  Real eps = Real(1e-5);

  explicit BatchNormState(int d = 0)
      : running_mean(static_cast<size_t>(d), Real(0)), running_var(static_cast<size_t>(d), Real(1)) {}
};

template <typename Real>
Tensor<Real> batch_norm(const Tensor<Real>& x, Parameter<Real>& gamma, Parameter<Real>& beta,
                        BatchNormState<Real>& state, bool training, Tape<Real>* tape,
                        const std::vector<Real>& row_mask = {}) {
  if (x.ndim() != 2) throw std::invalid_argument("batch_norm: need 2D, got " + shape_str(x.shape));
  const int d = x.shape[1];
  const size_t rows = static_cast<size_t>(x.shape[0]);
  if (static_cast<size_t>(d) != state.running_mean.size())
    throw std::invalid_argument("batch_norm: width " + std::to_string(d) + " vs state " + std::to_string(state.running_mean.size()));
  if (!row_mask.empty() && row_mask.size() != rows) throw std::invalid_argument("batch_norm: mask length mismatch");

  Real count = 0;
  if (row_mask.empty()) {
    count = static_cast<Real>(rows);
  } else {
    for (Real m : row_mask) count += (m != Real(0)) ? Real(1) : Real(0);
  }
  if (training && count < Real(1)) throw std::invalid_argument("batch_norm: no unmasked rows in training mode");

  std::vector<Real> mean(static_cast<size_t>(d), Real(0)), var(static_cast<size_t>(d), Real(0));
  if (training) {
    const Real* px = x.ptr();
    for (size_t r = 0; r < rows; ++r) {
      if (!row_mask.empty() && row_mask[r] == Real(0)) continue;
      for (int j = 0; j < d; ++j) mean[static_cast<size_t>(j)] += px[r * static_cast<size_t>(d) + static_cast<size_t>(j)];
    }
    for (int j = 0; j < d; ++j) mean[static_cast<size_t>(j)] /= count;
    for (size_t r = 0; r < rows; ++r) {
      if (!row_mask.empty() && row_mask[r] == Real(0)) continue;
      for (int j = 0; j < d; ++j) {
        Real dv = px[r * static_cast<size_t>(d) + static_cast<size_t>(j)] - mean[static_cast<size_t>(j)];
        var[static_cast<size_t>(j)] += dv * dv;
      }
    }
    for (int j = 0; j < d; ++j) var[static_cast<size_t>(j)] /= count;
    for (int j = 0; j < d; ++j) {
      state.running_mean[static_cast<size_t>(j)] =
          (Real(1) - state.momentum) * state.running_mean[static_cast<size_t>(j)] + state.momentum * mean[static_cast<size_t>(j)];
      state.running_var[static_cast<size_t>(j)] =
          (Real(1) - state.momentum) * state.running_var[static_cast<size_t>(j)] + state.momentum * var[static_cast<size_t>(j)];
    }
  } else {
    mean = state.running_mean;
    var = state.running_var;
  }

  std::vector<Real> inv_std(static_cast<size_t>(d));
  for (int j = 0; j < d; ++j) inv_std[static_cast<size_t>(j)] = Real(1) / std::sqrt(var[static_cast<size_t>(j)] + state.eps);

  Tensor<Real> out = Tensor<Real>::zeros(x.shape);
  auto xhat = std::make_shared<std::vector<Real>>(x.size());
  {
    const Real* px = x.ptr();
    Real* po = out.ptr();
    const Real* pg = gamma.value.ptr();
    const Real* pb = beta.value.ptr();
    for (size_t r = 0; r < rows; ++r)
      for (int j = 0; j < d; ++j) {
        size_t i = r * static_cast<size_t>(d) + static_cast<size_t>(j);
        (*xhat)[i] = (px[i] - mean[static_cast<size_t>(j)]) * inv_std[static_cast<size_t>(j)];
        po[i] = pg[static_cast<size_t>(j)] * (*xhat)[i] + pb[static_cast<size_t>(j)];
      }
  }
  if (!tape) return out;

  Tensor<Real> gt = gamma.use(*tape);
  Tensor<Real> bt = beta.use(*tape);
  out.tape = tape;
  const int id = static_cast<int>(tape->size());
  auto means = std::make_shared<std::vector<Real>>(mean);
  auto istds = std::make_shared<std::vector<Real>>(inv_std);
  out.node = tape->push(out.size(), [tape, x, gt, bt, xhat, means, istds, row_mask, rows, d, count, training, id]() {
    const Real* g = tape->grad(id).data();
    Real* ggamma = gt.on_tape() ? tape->grad(gt.node).data() : nullptr;
    Real* gbeta = bt.on_tape() ? tape->grad(bt.node).data() : nullptr;
    for (size_t r = 0; r < rows; ++r)
      for (int j = 0; j < d; ++j) {
        size_t i = r * static_cast<size_t>(d) + static_cast<size_t>(j);
        if (ggamma) ggamma[static_cast<size_t>(j)] += g[i] * (*xhat)[i];
        if (gbeta) gbeta[static_cast<size_t>(j)] += g[i];
      }
    if (!x.on_tape()) return;
    Real* gx = tape->grad(x.node).data();
    const Real* pg = gt.ptr();
    if (!training) {
      for (size_t r = 0; r < rows; ++r)
        for (int j = 0; j < d; ++j) {
          size_t i = r * static_cast<size_t>(d) + static_cast<size_t>(j);
          gx[i] += g[i] * pg[static_cast<size_t>(j)] * (*istds)[static_cast<size_t>(j)];
        }
      return;
    }
    // training mode: grads flow through the masked batch statistics
    for (int j = 0; j < d; ++j) {
      const size_t ju = static_cast<size_t>(j);
      Real sum_g = 0, sum_g_xhat = 0;
      for (size_t r = 0; r < rows; ++r) {
        size_t i = r * static_cast<size_t>(d) + ju;
        sum_g += g[i] * pg[ju];
        sum_g_xhat += g[i] * pg[ju] * (*xhat)[i];
      }
      const Real istd = (*istds)[ju];
      for (size_t r = 0; r < rows; ++r) {
        size_t i = r * static_cast<size_t>(d) + ju;
        gx[i] += g[i] * pg[ju] * istd;
        if (row_mask.empty() || row_mask[r] != Real(0))
          gx[i] -= istd / count * (sum_g + (*xhat)[i] * sum_g_xhat);
      }
    }
  });
  return out;
}

// ---------------------------------------------------------------------------
// Adam

template <typename Real>
struct AdamState {
  Real lr = Real(1e-3);
  Real beta1 = Real(0.9);
  Real beta2 = Real(0.999);
  Real eps = Real(1e-8);
  long t = 0;
  std::unordered_map<const Parameter<Real>*, std::pair<std::vector<Real>, std::vector<Real>>> moments;
};

template <typename Real>
void adam_step(const ParamRefs<Real>& params, AdamState<Real>& state) {
  state.t += 1;
  const Real bc1 = Real(1) - std::pow(state.beta1, static_cast<Real>(state.t));
  const Real bc2 = Real(1) - std::pow(state.beta2, static_cast<Real>(state.t));
  for (Parameter<Real>* p : params) {
    auto& [m, v] = state.moments[p];
    if (m.empty()) {
      m.assign(p->value.size(), Real(0));
      v.assign(p->value.size(), Real(0));
    }
    if (m.size() != p->value.size()) throw std::invalid_argument("adam_step: moment shape mismatch for " + p->name);
    Real* w = p->value.ptr();
    for (size_t i = 0; i < m.size(); ++i) {
      const Real g = p->grad[i];
      m[i] = state.beta1 * m[i] + (Real(1) - state.beta1) * g;
      v[i] = state.beta2 * v[i] + (Real(1) - state.beta2) * g * g;
      w[i] -= state.lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + state.eps);
    }
  }
}

template <typename Real>
void zero_grads(const ParamRefs<Real>& params) {
  for (Parameter<Real>* p : params) p->zero_grad();
}

}  // namespace scnet::nd
