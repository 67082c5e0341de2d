#pragma once

// The SCN training objective: cross-entropy plus entropy, connectivity
// (positive/negative/isolation penalties), utilisation and consistency
// terms. Every custom term is masked against padding and normalized to
// [0, 1].

#include "scnet/graph.hpp"
#include "scnet/model.hpp"
#include "scnet/tensor.hpp"

#include <random>
#include <vector>

namespace scnet::losses {

using nd::Tape;
using nd::Tensor;

struct LossWeights {
  double lambda_entropy = 0.1;
  double lambda_connectivity = 0.1;
  double lambda_utilisation = 0.1;
  double lambda_consistency = 0.1;
  double alpha_pos = 1.0;
  double alpha_neg = 0.5;
  double alpha_iso = 2.0;   // isolated nodes are penalised hardest
  double margin = 0.5;      // hinge margin for the positive similarity penalty
  double tau = 0.5;         // isolation threshold
  double gamma = 4.0;       // consistency cosine sharpening
  int pair_cap = 4096;      // consistency pairs sampled per batch
};

template <typename Real>
struct LossBreakdown {
  Tensor<Real> total;
  double total_value = 0;
  double cross_entropy = 0;
  double entropy = 0;
  double connectivity = 0;
  double pos = 0;
  double neg = 0;
  double iso = 0;
  double utilisation = 0;
  double consistency = 0;
};

// mean over the batch of -log softmax(logits)[label], max-stabilized
template <typename Real>
Tensor<Real> cross_entropy(const Tensor<Real>& logits, const std::vector<int>& labels) {
  if (logits.ndim() != 2) throw std::invalid_argument("cross_entropy: logits must be 2D");
  const int B = logits.shape[0], C = logits.shape[1];
  if (static_cast<int>(labels.size()) != B) throw std::invalid_argument("cross_entropy: label count mismatch");
  for (int y : labels)
    if (y < 0 || y >= C) throw std::invalid_argument("cross_entropy: label " + std::to_string(y) + " out of range");
  auto probs = std::make_shared<std::vector<Real>>(logits.size());
  Real loss = 0;
  const Real* pl = logits.ptr();
  for (int r = 0; r < B; ++r) {
    const Real* x = pl + static_cast<size_t>(r) * static_cast<size_t>(C);
    Real mx = x[0];
    for (int j = 1; j < C; ++j) mx = std::max(mx, x[j]);
    Real z = 0;
    for (int j = 0; j < C; ++j) z += std::exp(x[j] - mx);
    for (int j = 0; j < C; ++j)
      (*probs)[static_cast<size_t>(r) * static_cast<size_t>(C) + static_cast<size_t>(j)] = std::exp(x[j] - mx) / z;
    loss += mx + std::log(z) - x[labels[static_cast<size_t>(r)]];
  }
  Tensor<Real> out = Tensor<Real>::scalar(loss / static_cast<Real>(B));
  if (!logits.tape) return out;
  Tape<Real>* tape = logits.tape;
  out.tape = tape;
  const int id = static_cast<int>(tape->size());
  out.node = tape->push(1, [tape, logits, labels, probs, B, C, id]() {
    if (!logits.on_tape()) return;
    const Real g = tape->grad(id)[0] / static_cast<Real>(B);
    Real* gl = tape->grad(logits.node).data();
    for (int r = 0; r < B; ++r)
      for (int j = 0; j < C; ++j) {
        size_t i = static_cast<size_t>(r) * static_cast<size_t>(C) + static_cast<size_t>(j);
        gl[i] += g * ((*probs)[i] - (j == labels[static_cast<size_t>(r)] ? Real(1) : Real(0)));
      }
  });
  return out;
}

namespace detail {

inline double unmasked_count(const data::PaddedBatch& batch) {
  double c = 0;
  for (double m : batch.mask) c += m != 0.0 ? 1.0 : 0.0;
  return c;
}

// A as a constant tensor (already zero at padding rows/columns)
template <typename Real>
Tensor<Real> adjacency_const(const data::PaddedBatch& batch) {
  return model::detail::to_tensor<Real>(batch.adjacency, {batch.B, batch.N, batch.N});
}

}  // namespace detail

// mean over unmasked nodes of row entropy / ln K
template <typename Real>
Tensor<Real> entropy_loss(const Tensor<Real>& assignments, const data::PaddedBatch& batch) {
  const int K = assignments.dim(-1);
  const double n = detail::unmasked_count(batch);
  // 0 * ln 0 := 0 via the epsilon inside the log; padding rows are all-zero
  Tensor<Real> plogp = nd::mul(assignments, nd::log_t(assignments, Real(1e-12)));
  return nd::scale(nd::sum_all(plogp), static_cast<Real>(-1.0 / (std::log(static_cast<double>(K)) * n)));
}

// mean over unmasked edges of max(0, m - c_i . c_j) / m; 0 if no edges
template <typename Real>
Tensor<Real> pos_sim_penalty(const Tensor<Real>& assignments, const data::PaddedBatch& batch, double margin) {
  Tensor<Real> a = detail::adjacency_const<Real>(batch);
  double ordered_edges = 0;
  for (double v : batch.adjacency) ordered_edges += v;
  if (ordered_edges == 0) return Tensor<Real>::scalar(0);
  Tensor<Real> sim = nd::matmul(assignments, assignments, false, true);  // B x N x N
  Tensor<Real> hinge = nd::relu(nd::add_const(nd::neg(sim), static_cast<Real>(margin)));
  return nd::scale(nd::sum_all(nd::mul(hinge, a)), static_cast<Real>(1.0 / (margin * ordered_edges)));
}

// mean over unmasked non-adjacent distinct within-graph pairs of c_i . c_j
template <typename Real>
Tensor<Real> neg_sim_penalty(const Tensor<Real>& assignments, const data::PaddedBatch& batch) {
  const int B = batch.B, N = batch.N;
  std::vector<Real> ne(static_cast<size_t>(B) * static_cast<size_t>(N) * static_cast<size_t>(N), Real(0));
  double count = 0;
  for (int b = 0; b < B; ++b)
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) {
        if (i == j) continue;
        size_t bi = static_cast<size_t>(b) * static_cast<size_t>(N);
        if (batch.mask[bi + static_cast<size_t>(i)] == 0.0 || batch.mask[bi + static_cast<size_t>(j)] == 0.0) continue;
        size_t idx = (bi + static_cast<size_t>(i)) * static_cast<size_t>(N) + static_cast<size_t>(j);
        if (batch.adjacency[idx] != 0.0) continue;
        ne[idx] = Real(1);
        count += 1;
      }
  if (count == 0) return Tensor<Real>::scalar(0);
  Tensor<Real> ne_t(nd::Shape{B, N, N}, std::move(ne));
  Tensor<Real> sim = nd::matmul(assignments, assignments, false, true);
  return nd::scale(nd::sum_all(nd::mul(sim, ne_t)), static_cast<Real>(1.0 / count));
}

// mean over unmasked nodes with >= 1 neighbour of max(0, tau - v_i) / tau,
// where v_i sums the assignment similarity with the node's neighbours
template <typename Real>
Tensor<Real> isolation_penalty(const Tensor<Real>& assignments, const data::PaddedBatch& batch, double tau) {
  if (tau <= 0) throw std::invalid_argument("isolation_penalty: tau must be positive");
  const int B = batch.B, N = batch.N;
  std::vector<Real> has_nbr(static_cast<size_t>(B) * static_cast<size_t>(N), Real(0));
  double count = 0;
  for (int b = 0; b < B; ++b)
    for (int i = 0; i < N; ++i) {
      size_t bi = static_cast<size_t>(b) * static_cast<size_t>(N);
      if (batch.mask[bi + static_cast<size_t>(i)] == 0.0) continue;
      double deg = 0;
      for (int j = 0; j < N; ++j) deg += batch.adjacency[(bi + static_cast<size_t>(i)) * static_cast<size_t>(N) + static_cast<size_t>(j)];
      if (deg > 0) {
        has_nbr[bi + static_cast<size_t>(i)] = Real(1);
        count += 1;
      }
    }
  if (count == 0) return Tensor<Real>::scalar(0);
  Tensor<Real> a = detail::adjacency_const<Real>(batch);
  Tensor<Real> sim = nd::matmul(assignments, assignments, false, true);
  Tensor<Real> v = nd::sum_axis(nd::mul(sim, a), 2);  // B x N
  Tensor<Real> pen = nd::relu(nd::add_const(nd::neg(v), static_cast<Real>(tau)));
  Tensor<Real> gate(nd::Shape{B, N}, std::move(has_nbr));
  return nd::scale(nd::sum_all(nd::mul(pen, gate)), static_cast<Real>(1.0 / (tau * count)));
}

template <typename Real>
struct ConnectivityParts {
  Tensor<Real> pos, neg, iso, combined;
};

template <typename Real>
ConnectivityParts<Real> connectivity_loss(const Tensor<Real>& assignments, const data::PaddedBatch& batch,
                                          const LossWeights& w) {
  const double asum = w.alpha_pos + w.alpha_neg + w.alpha_iso;
  if (asum <= 0) throw std::invalid_argument("connectivity_loss: all alpha weights are zero");
  ConnectivityParts<Real> parts;
  parts.pos = pos_sim_penalty(assignments, batch, w.margin);
  parts.neg = neg_sim_penalty(assignments, batch);
  parts.iso = isolation_penalty(assignments, batch, w.tau);
  parts.combined = nd::scale(
      nd::add(nd::add(nd::scale(parts.pos, static_cast<Real>(w.alpha_pos)), nd::scale(parts.neg, static_cast<Real>(w.alpha_neg))),
              nd::scale(parts.iso, static_cast<Real>(w.alpha_iso))),
      static_cast<Real>(1.0 / asum));
  return parts;
}

// 1 - H(mean cluster usage) / ln K
template <typename Real>
Tensor<Real> utilisation_loss(const Tensor<Real>& assignments, const data::PaddedBatch& batch) {
  const int K = assignments.dim(-1);
  const double n = detail::unmasked_count(batch);
  const int B = assignments.shape[0], N = assignments.shape[1];
  Tensor<Real> flat = nd::reshape(assignments, {B * N, K});
  Tensor<Real> usage = nd::scale(nd::sum_axis(flat, 0), static_cast<Real>(1.0 / n));  // K
  Tensor<Real> h = nd::neg(nd::sum_all(nd::mul(usage, nd::log_t(usage, Real(1e-12)))));
  return nd::add_const(nd::scale(h, static_cast<Real>(-1.0 / std::log(static_cast<double>(K)))), Real(1));
}

// cosine-weighted normalized assignment distance over sampled node pairs
template <typename Real>
Tensor<Real> consistency_loss(const Tensor<Real>& embeddings, const Tensor<Real>& assignments,
                              const data::PaddedBatch& batch, const LossWeights& w, std::mt19937_64& rng) {
  const int B = batch.B, N = batch.N;
  const int d = embeddings.dim(-1), K = assignments.dim(-1);
  std::vector<int> nodes;
  for (int i = 0; i < B * N; ++i)
    if (batch.mask[static_cast<size_t>(i)] != 0.0) nodes.push_back(i);
  const size_t n = nodes.size();
  if (n < 2) return Tensor<Real>::scalar(0);

  std::vector<int> lhs, rhs;
  const size_t all_pairs = n * (n - 1) / 2;
  if (all_pairs <= static_cast<size_t>(w.pair_cap)) {
    for (size_t i = 0; i < n; ++i)
      for (size_t j = i + 1; j < n; ++j) {
        lhs.push_back(nodes[i]);
        rhs.push_back(nodes[j]);
      }
  } else {
    std::uniform_int_distribution<size_t> pick(0, n - 1);
    for (int p = 0; p < w.pair_cap; ++p) {
      size_t i = pick(rng), j = pick(rng);
      while (j == i) j = pick(rng);
      lhs.push_back(nodes[i]);
      rhs.push_back(nodes[j]);
    }
  }

  Tensor<Real> emb = nd::reshape(embeddings, {B * N, d});
  Tensor<Real> asg = nd::reshape(assignments, {B * N, K});
  Tensor<Real> hi = nd::gather_rows(emb, lhs), hj = nd::gather_rows(emb, rhs);
  Tensor<Real> ci = nd::gather_rows(asg, lhs), cj = nd::gather_rows(asg, rhs);

  const Real eps = Real(1e-8);
  Tensor<Real> dot = nd::sum_axis(nd::mul(hi, hj), 1);
  Tensor<Real> ni = nd::sqrt_t(nd::sum_axis(nd::mul(hi, hi), 1), Real(1e-20));
  Tensor<Real> nj = nd::sqrt_t(nd::sum_axis(nd::mul(hj, hj), 1), Real(1e-20));
  Tensor<Real> cosine = nd::div(dot, nd::add_const(nd::mul(ni, nj), eps));
  Tensor<Real> weight = nd::pow_const(nd::scale(nd::add_const(cosine, Real(1)), Real(0.5)), static_cast<Real>(w.gamma));

  Tensor<Real> diff = nd::sub(ci, cj);
  Tensor<Real> dist = nd::scale(nd::sqrt_t(nd::sum_axis(nd::mul(diff, diff), 1), Real(1e-20)),
                                static_cast<Real>(1.0 / std::sqrt(2.0)));
  Tensor<Real> num = nd::sum_all(nd::mul(weight, dist));
  Tensor<Real> den = nd::add_const(nd::sum_all(weight), eps);
  return nd::div(num, den);
}

template <typename Real>
LossBreakdown<Real> total_loss(const model::SCNTrace<Real>& trace, const data::PaddedBatch& batch,
                               const LossWeights& w, std::mt19937_64& rng) {
  LossBreakdown<Real> out;
  Tensor<Real> ce = cross_entropy(trace.logits, batch.labels);
  Tensor<Real> ent = entropy_loss(trace.assignments, batch);
  ConnectivityParts<Real> conn = connectivity_loss(trace.assignments, batch, w);
  Tensor<Real> util = utilisation_loss(trace.assignments, batch);
  Tensor<Real> cons = consistency_loss(trace.embeddings, trace.assignments, batch, w, rng);
  out.total = nd::add(
      nd::add(nd::add(ce, nd::scale(ent, static_cast<Real>(w.lambda_entropy))),
              nd::add(nd::scale(conn.combined, static_cast<Real>(w.lambda_connectivity)),
                      nd::scale(util, static_cast<Real>(w.lambda_utilisation)))),
      nd::scale(cons, static_cast<Real>(w.lambda_consistency)));
  out.total_value = static_cast<double>(out.total.at(0));
  out.cross_entropy = static_cast<double>(ce.at(0));
  out.entropy = static_cast<double>(ent.at(0));
  out.connectivity = static_cast<double>(conn.combined.at(0));
  out.pos = static_cast<double>(conn.pos.at(0));
  out.neg = static_cast<double>(conn.neg.at(0));
  out.iso = static_cast<double>(conn.iso.at(0));
  out.utilisation = static_cast<double>(util.at(0));
  out.consistency = static_cast<double>(cons.at(0));
  return out;
}

}  // namespace scnet::losses
