#pragma once

// Comparison models: a concept graph network with mean pooling, and the same
// network with a DiffPool layer (plus its link-prediction and entropy
// auxiliary losses) before pooling.

#include "scnet/model.hpp"

namespace scnet::baselines {

using model::ConvLayer;
using model::SCNConfig;
using nd::Parameter;
using nd::ParamRefs;
using nd::Tape;
using nd::Tensor;

enum class CGNVariant { mean_pool, diffpool };

template <typename Real>
struct CGNParams {
  SCNConfig config;
  CGNVariant variant = CGNVariant::mean_pool;
  std::vector<ConvLayer<Real>> initial;  // f -> hidden -> ... -> s
  ConvLayer<Real> assign_conv;           // s -> K (diffpool only)
  ConvLayer<Real> embed_conv;            // s -> s (diffpool only)
  Parameter<Real> readout_w, readout_b;  // s -> classes

  CGNParams() = default;
  CGNParams(const SCNConfig& cfg, CGNVariant v, std::mt19937_64& rng) : config(cfg), variant(v) {
    initial = model::make_stack<Real>("init", cfg.layers, cfg.f, cfg.hidden, cfg.s, rng);
    if (variant == CGNVariant::diffpool) {
      assign_conv = ConvLayer<Real>("pool.assign", cfg.s, cfg.K, rng);
      embed_conv = ConvLayer<Real>("pool.embed", cfg.s, cfg.s, rng);
    }
    readout_w = Parameter<Real>("readout.w", nd::glorot_uniform<Real>(cfg.s, cfg.classes, {cfg.s, cfg.classes}, rng));
    readout_b = Parameter<Real>("readout.b", Tensor<Real>::zeros({cfg.classes}));
  }

  ParamRefs<Real> params() {
    ParamRefs<Real> out;
    for (auto& l : initial) l.collect(out);
    if (variant == CGNVariant::diffpool) {
      assign_conv.collect(out);
      embed_conv.collect(out);
    }
    out.push_back(&readout_w);
    out.push_back(&readout_b);
    return out;
  }
};

template <typename Real>
struct CGNTrace {
  Tensor<Real> node_concepts;      // B x N x s
  Tensor<Real> assignments;        // B x N x K (diffpool S; mean-pool: empty)
  Tensor<Real> subgraph_concepts;  // B x K x s (diffpool only)
  Tensor<Real> graph_concept;      // B x s
  Tensor<Real> logits;             // B x classes
  Tensor<Real> aux_link;           // scalar, diffpool link-prediction loss
  Tensor<Real> aux_entropy;        // scalar, diffpool assignment entropy
};

// masked mean over the node axis: sum(h * mask) / count
template <typename Real>
Tensor<Real> masked_mean_nodes(const Tensor<Real>& h, const Tensor<Real>& mask_col) {
  Tensor<Real> num = nd::sum_axis(nd::mul(h, mask_col), 1);                              // B x d
  Tensor<Real> den = nd::add_const(nd::sum_axis(mask_col, 1), static_cast<Real>(1e-12));  // B x 1
  return nd::div(num, den);
}

template <typename Real>
CGNTrace<Real> cgn_meanpool_forward(const data::PaddedBatch& batch, CGNParams<Real>& params, Tape<Real>* tape) {
  const SCNConfig& cfg = params.config;
  const int B = batch.B, N = batch.N;
  Tensor<Real> adjacency = model::detail::to_tensor<Real>(batch.adjacency, {B, N, N});
  Tensor<Real> features = model::detail::to_tensor<Real>(batch.features, {B, N, cfg.f});
  Tensor<Real> mask_col = model::detail::to_tensor<Real>(batch.mask, {B, N, 1});
  std::vector<Real> row_mask = model::detail::row_mask_of<Real>(batch);

  CGNTrace<Real> trace;
  Tensor<Real> h = model::run_stack(features, adjacency, mask_col, params.initial, tape);
  trace.node_concepts = model::normalized_softmax(h, row_mask);
  Tensor<Real> pooled = masked_mean_nodes(trace.node_concepts, mask_col);  // B x s
  trace.graph_concept = model::normalized_softmax(pooled);
  Tensor<Real> rw = tape ? params.readout_w.use(*tape) : params.readout_w.value;
  Tensor<Real> rb = tape ? params.readout_b.use(*tape) : params.readout_b.value;
  trace.logits = nd::add(nd::matmul(trace.graph_concept, rw), rb);
  return trace;
}

// DiffPool: S = softmax(conv_assign(h, A)), Z = conv_embed(h, A),
// coarse_h = S^T Z, coarse_A = S^T A S, plus link-prediction and entropy
// auxiliary losses (both normalized to [0, 1]).
template <typename Real>
void diffpool_layer(const Tensor<Real>& h, const Tensor<Real>& adjacency, const Tensor<Real>& mask_col,
                    const std::vector<Real>& row_mask, CGNParams<Real>& params, Tape<Real>* tape,
                    Tensor<Real>& s_out, Tensor<Real>& coarse_h, Tensor<Real>& coarse_a,
                    Tensor<Real>& aux_link, Tensor<Real>& aux_entropy) {
  const int B = h.shape[0], N = h.shape[1], K = params.config.K;
  Tensor<Real> logits = model::graph_conv(h, adjacency, mask_col, params.assign_conv, tape, true);
  Tensor<Real> flat = nd::reshape(logits, {B * N, K});
  s_out = nd::reshape(nd::softmax_lastdim(flat, row_mask), {B, N, K});
  Tensor<Real> z = model::graph_conv(h, adjacency, mask_col, params.embed_conv, tape, true);
  coarse_h = nd::matmul(s_out, z, true, false);                              // B x K x d
  coarse_a = nd::matmul(nd::matmul(s_out, adjacency, true, false), s_out);   // B x K x K

  // link prediction: ||A - S S^T||_F^2 / N^2 per graph, averaged over the batch
  Tensor<Real> sst = nd::matmul(s_out, s_out, false, true);  // B x N x N
  Tensor<Real> diff = nd::sub(adjacency, sst);
  aux_link = nd::scale(nd::sum_all(nd::mul(diff, diff)),
                       Real(1) / static_cast<Real>(static_cast<double>(B) * N * N));

  // assignment entropy, masked, normalized by ln K
  Tensor<Real> s_flat = nd::reshape(s_out, {B * N, K});
  Tensor<Real> plogp = nd::mul(s_flat, nd::log_t(nd::add_const(s_flat, Real(1e-12))));
  Tensor<Real> mask_flat = nd::reshape(mask_col, {B * N, 1});
  Real count = 0;
  for (Real m : row_mask) count += m;
  aux_entropy = nd::scale(nd::sum_all(nd::mul(plogp, mask_flat)),
                          Real(-1) / (count * static_cast<Real>(std::log(static_cast<double>(K)))));
}

template <typename Real>
CGNTrace<Real> cgn_diffpool_forward(const data::PaddedBatch& batch, CGNParams<Real>& params, Tape<Real>* tape) {
  const SCNConfig& cfg = params.config;
  const int B = batch.B, N = batch.N;
  Tensor<Real> adjacency = model::detail::to_tensor<Real>(batch.adjacency, {B, N, N});
  Tensor<Real> features = model::detail::to_tensor<Real>(batch.features, {B, N, cfg.f});
  Tensor<Real> mask_col = model::detail::to_tensor<Real>(batch.mask, {B, N, 1});
  std::vector<Real> row_mask = model::detail::row_mask_of<Real>(batch);

  CGNTrace<Real> trace;
  Tensor<Real> h = model::run_stack(features, adjacency, mask_col, params.initial, tape);
  trace.node_concepts = model::normalized_softmax(h, row_mask);

  Tensor<Real> coarse_h, coarse_a;
  diffpool_layer(h, adjacency, mask_col, row_mask, params, tape, trace.assignments, coarse_h, coarse_a,
                 trace.aux_link, trace.aux_entropy);

  trace.subgraph_concepts = model::normalized_softmax(nd::reshape(coarse_h, {B * cfg.K, cfg.s}));
  trace.subgraph_concepts = nd::reshape(trace.subgraph_concepts, {B, cfg.K, cfg.s});
  Tensor<Real> pooled = nd::mean_axis(trace.subgraph_concepts, 1);  // B x s, unweighted mean over K
  trace.graph_concept = model::normalized_softmax(pooled);
  Tensor<Real> rw = tape ? params.readout_w.use(*tape) : params.readout_w.value;
  Tensor<Real> rb = tape ? params.readout_b.use(*tape) : params.readout_b.value;
  trace.logits = nd::add(nd::matmul(trace.graph_concept, rw), rb);
  return trace;
}

}  // namespace scnet::baselines
