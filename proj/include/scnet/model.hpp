#pragma once

// The Subgraph Concept Network: initial embedding and node concepts,
// soft cluster assignment, per-cluster re-weighting and re-embedding,
// weighted subgraph pooling, importance scoring and linear readout.

#include "scnet/graph.hpp"
#include "scnet/nn.hpp"
#include "scnet/tensor.hpp"

#include <random>
#include <string>
#include <vector>

namespace scnet::model {

using nd::BatchNormState;
using nd::Parameter;
using nd::ParamRefs;
using nd::Shape;
using nd::Tape;
using nd::Tensor;

struct SCNConfig {
  int layers = 2;     // conv layers per stack
  int hidden = 10;
  int s = 4;          // node concept encoding size
  int K = 2;          // subgraph count
  int s_sub = 4;      // subgraph concept encoding size
  int f = 1;          // input feature width
  int classes = 2;
  double eps = 1e-8;  // pooling guard
};

// one graph convolution: W_self h + W_nbr (A h) + b
template <typename Real>
struct ConvLayer {
  Parameter<Real> w_self, w_nbr, b;

  ConvLayer() = default;
  ConvLayer(const std::string& name, int d_in, int d_out, std::mt19937_64& rng)
      : w_self(name + ".w_self", nd::glorot_uniform<Real>(d_in, d_out, {d_in, d_out}, rng)),
        w_nbr(name + ".w_nbr", nd::glorot_uniform<Real>(d_in, d_out, {d_in, d_out}, rng)),
        b(name + ".b", Tensor<Real>::zeros({d_out})) {}

  void collect(ParamRefs<Real>& out) {
    out.push_back(&w_self);
    out.push_back(&w_nbr);
    out.push_back(&b);
  }
};

template <typename Real>
std::vector<ConvLayer<Real>> make_stack(const std::string& name, int layers, int d_in, int hidden, int d_out,
                                        std::mt19937_64& rng) {
  std::vector<ConvLayer<Real>> stack;
  for (int i = 0; i < layers; ++i) {
    int in = i == 0 ? d_in : hidden;
    int out = i == layers - 1 ? d_out : hidden;
    stack.emplace_back(name + "." + std::to_string(i), in, out, rng);
  }
  return stack;
}

template <typename Real>
struct SCNParams {
  SCNConfig config;
  std::vector<ConvLayer<Real>> initial;              // f -> hidden -> ... -> s
  ConvLayer<Real> cluster_conv;                      // s -> K
  Parameter<Real> cluster_bn_gamma, cluster_bn_beta;
  BatchNormState<Real> cluster_bn;
  std::vector<std::vector<ConvLayer<Real>>> stacks;  // K stacks, s -> hidden -> ... -> s_sub
  Parameter<Real> sub_bn_gamma, sub_bn_beta;         // shared across subgraphs
  BatchNormState<Real> sub_bn;
  Parameter<Real> theta_w1, theta_b1, theta_w2, theta_b2;  // importance net, s_sub -> hidden -> 1
  Parameter<Real> readout_w, readout_b;                    // K -> classes

  SCNParams() = default;
  SCNParams(const SCNConfig& cfg, std::mt19937_64& rng) : config(cfg) {
    initial = make_stack<Real>("init", cfg.layers, cfg.f, cfg.hidden, cfg.s, rng);
    cluster_conv = ConvLayer<Real>("cluster", cfg.s, cfg.K, rng);
    cluster_bn_gamma = Parameter<Real>("cluster.bn.gamma", Tensor<Real>::full({cfg.K}, Real(1)));
    cluster_bn_beta = Parameter<Real>("cluster.bn.beta", Tensor<Real>::zeros({cfg.K}));
    cluster_bn = BatchNormState<Real>(cfg.K);
    for (int k = 0; k < cfg.K; ++k)
      stacks.push_back(make_stack<Real>("sub." + std::to_string(k), cfg.layers, cfg.s, cfg.hidden, cfg.s_sub, rng));
    sub_bn_gamma = Parameter<Real>("sub.bn.gamma", Tensor<Real>::full({cfg.s_sub}, Real(1)));
    sub_bn_beta = Parameter<Real>("sub.bn.beta", Tensor<Real>::zeros({cfg.s_sub}));
    sub_bn = BatchNormState<Real>(cfg.s_sub);
    theta_w1 = Parameter<Real>("theta.w1", nd::glorot_uniform<Real>(cfg.s_sub, cfg.hidden, {cfg.s_sub, cfg.hidden}, rng));
    theta_b1 = Parameter<Real>("theta.b1", Tensor<Real>::zeros({cfg.hidden}));
    theta_w2 = Parameter<Real>("theta.w2", nd::glorot_uniform<Real>(cfg.hidden, 1, {cfg.hidden, 1}, rng));
    theta_b2 = Parameter<Real>("theta.b2", Tensor<Real>::zeros({1}));
    readout_w = Parameter<Real>("readout.w", nd::glorot_uniform<Real>(cfg.K, cfg.classes, {cfg.K, cfg.classes}, rng));
    readout_b = Parameter<Real>("readout.b", Tensor<Real>::zeros({cfg.classes}));
  }

  ParamRefs<Real> params() {
    ParamRefs<Real> out;
    for (auto& l : initial) l.collect(out);
    cluster_conv.collect(out);
    out.push_back(&cluster_bn_gamma);
    out.push_back(&cluster_bn_beta);
    for (auto& st : stacks)
      for (auto& l : st) l.collect(out);
    out.push_back(&sub_bn_gamma);
    out.push_back(&sub_bn_beta);
    for (Parameter<Real>* p : {&theta_w1, &theta_b1, &theta_w2, &theta_b2, &readout_w, &readout_b}) out.push_back(p);
    return out;
  }
};

template <typename Real>
struct SCNTrace {
  Tensor<Real> embeddings;            // B x N x s, post-initial-stack (pre-softmax)
  Tensor<Real> node_concepts_graph;   // B x N x s (q_i)
  Tensor<Real> assignments;           // B x N x K (c_i)
  std::vector<Tensor<Real>> reweighted_adjacency;    // K tensors, B x N x N
  std::vector<Tensor<Real>> node_concepts_subgraph;  // K tensors, B x N x s_sub
  Tensor<Real> subgraph_embeddings;   // B x K x s_sub (h_k, pooled)
  Tensor<Real> subgraph_concepts;     // B x K x s_sub
  Tensor<Real> importance;            // B x K
  Tensor<Real> graph_concept;         // B x K
  Tensor<Real> logits;                // B x classes
};

namespace detail {

template <typename Real>
Tensor<Real> to_tensor(const std::vector<double>& v, Shape shape) {
  std::vector<Real> data(v.size());
  for (size_t i = 0; i < v.size(); ++i) data[i] = static_cast<Real>(v[i]);
  return Tensor<Real>(std::move(shape), std::move(data));
}

template <typename Real>
std::vector<Real> row_mask_of(const data::PaddedBatch& batch) {
  std::vector<Real> m(batch.mask.size());
  for (size_t i = 0; i < m.size(); ++i) m[i] = static_cast<Real>(batch.mask[i]);
  return m;
}

}  // namespace detail

// single convolution layer; padding rows are forced to zero via the mask
template <typename Real>
Tensor<Real> graph_conv(const Tensor<Real>& h, const Tensor<Real>& adjacency, const Tensor<Real>& mask_col,
                        ConvLayer<Real>& layer, Tape<Real>* tape, bool final_layer) {
  Tensor<Real> w_self = tape ? layer.w_self.use(*tape) : layer.w_self.value;
  Tensor<Real> w_nbr = tape ? layer.w_nbr.use(*tape) : layer.w_nbr.value;
  Tensor<Real> b = tape ? layer.b.use(*tape) : layer.b.value;
  Tensor<Real> nbr = nd::matmul(adjacency, h);
  Tensor<Real> out = nd::add(nd::add(nd::matmul(h, w_self), nd::matmul(nbr, w_nbr)), b);
  if (!final_layer) out = nd::relu(out);
  return nd::mul(out, mask_col);
}

template <typename Real>
Tensor<Real> run_stack(const Tensor<Real>& h0, const Tensor<Real>& adjacency, const Tensor<Real>& mask_col,
                       std::vector<ConvLayer<Real>>& stack, Tape<Real>* tape) {
  Tensor<Real> h = h0;
  for (size_t i = 0; i < stack.size(); ++i)
    h = graph_conv(h, adjacency, mask_col, stack[i], tape, i + 1 == stack.size());
  return h;
}

// softmax over the last dim followed by division by the row maximum,
// giving fuzzy encodings in (0,1] with row-max exactly 1; masked rows
// stay all-zero.
template <typename Real>
Tensor<Real> normalized_softmax(const Tensor<Real>& x, const std::vector<Real>& row_mask = {}) {
  Tensor<Real> sm = nd::softmax_lastdim(x, row_mask);
  Tensor<Real> mx = nd::max_lastdim(sm);
  if (!row_mask.empty()) {
    // masked rows have max 0; bump their denominator to 1 so 0/1 = 0
    Tensor<Real> bump = Tensor<Real>::zeros(mx.shape);
    for (size_t r = 0; r < row_mask.size(); ++r) bump.at(r) = row_mask[r] == Real(0) ? Real(1) : Real(0);
    mx = nd::add(mx, bump);
  }
  return nd::div(sm, mx);
}

// one graph convolution to K channels, batch-normalized over unmasked
// nodes, then softmax over K; padding rows zeroed
template <typename Real>
Tensor<Real> cluster_assign(const Tensor<Real>& h, const Tensor<Real>& adjacency, const Tensor<Real>& mask_col,
                            const std::vector<Real>& row_mask, SCNParams<Real>& params, bool training, Tape<Real>* tape) {
  const int B = h.shape[0], N = h.shape[1];
  Tensor<Real> z = graph_conv(h, adjacency, mask_col, params.cluster_conv, tape, true);
  Tensor<Real> flat = nd::reshape(z, {B * N, params.config.K});
  Tensor<Real> bn = nd::batch_norm(flat, params.cluster_bn_gamma, params.cluster_bn_beta, params.cluster_bn,
                                   training, tape, row_mask);
  Tensor<Real> assign = nd::softmax_lastdim(bn, row_mask);
  return nd::reshape(assign, {B, N, params.config.K});
}

template <typename Real>
SCNTrace<Real> scn_forward(const data::PaddedBatch& batch, SCNParams<Real>& params, bool training,
                           Tape<Real>* tape) {
  const SCNConfig& cfg = params.config;
  if (batch.f != cfg.f)
    throw std::invalid_argument("scn_forward: batch feature width " + std::to_string(batch.f) + " vs config " + std::to_string(cfg.f));
  const int B = batch.B, N = batch.N;
  Tensor<Real> adjacency = detail::to_tensor<Real>(batch.adjacency, {B, N, N});
  Tensor<Real> features = detail::to_tensor<Real>(batch.features, {B, N, cfg.f});
  Tensor<Real> mask_col = detail::to_tensor<Real>(batch.mask, {B, N, 1});
  std::vector<Real> row_mask = detail::row_mask_of<Real>(batch);

  SCNTrace<Real> trace;
  trace.embeddings = run_stack(features, adjacency, mask_col, params.initial, tape);
  trace.node_concepts_graph = normalized_softmax(trace.embeddings, row_mask);
  trace.assignments = cluster_assign(trace.node_concepts_graph, adjacency, mask_col, row_mask, params, training, tape);

  // per-cluster re-weighting and re-embedding
  std::vector<Tensor<Real>> stack_outputs;
  for (int k = 0; k < cfg.K; ++k) {
    Tensor<Real> ck = nd::take_lastdim(trace.assignments, k);              // B x N x 1
    Tensor<Real> hk = nd::mul(trace.embeddings, ck);                       // node re-weighting
    Tensor<Real> ak = nd::mul(adjacency, nd::matmul(ck, ck, false, true));  // A_k[i,j] = c_ik c_jk A[i,j]
    trace.reweighted_adjacency.push_back(ak);
    stack_outputs.push_back(nd::reshape(run_stack(hk, ak, mask_col, params.stacks[static_cast<size_t>(k)], tape),
                                        {B * N, cfg.s_sub}));
  }

  // shared batch norm across all subgraphs, then subgraph-space node concepts
  Tensor<Real> joint = nd::concat_rows(stack_outputs);  // (K*B*N) x s_sub
  std::vector<Real> joint_mask;
  joint_mask.reserve(row_mask.size() * static_cast<size_t>(cfg.K));
  for (int k = 0; k < cfg.K; ++k) joint_mask.insert(joint_mask.end(), row_mask.begin(), row_mask.end());
  Tensor<Real> bn = nd::batch_norm(joint, params.sub_bn_gamma, params.sub_bn_beta, params.sub_bn, training, tape, joint_mask);
  Tensor<Real> joint_concepts = normalized_softmax(bn, joint_mask);

  // weighted mean pooling per cluster: sum of node concepts / (sum of memberships + eps)
  std::vector<Tensor<Real>> pooled;
  for (int k = 0; k < cfg.K; ++k) {
    Tensor<Real> ck = nd::take_lastdim(trace.assignments, k);  // B x N x 1
    Tensor<Real> conc = nd::reshape(nd::slice_rows(joint_concepts, k * B * N, B * N), {B, N, cfg.s_sub});
    trace.node_concepts_subgraph.push_back(conc);
    Tensor<Real> num = nd::sum_axis(conc, 1);                               // B x s_sub
    Tensor<Real> den = nd::add_const(nd::sum_axis(ck, 1), static_cast<Real>(cfg.eps));  // B x 1
    pooled.push_back(nd::reshape(nd::div(num, den), {B, 1, cfg.s_sub}));
  }
  std::vector<Tensor<Real>> pooled_rows;
  for (auto& p : pooled) pooled_rows.push_back(nd::reshape(p, {B, cfg.s_sub}));
  // interleave to B x K x s_sub: concat columns then reshape
  Tensor<Real> hk_cat = nd::concat_lastdim(pooled_rows);  // B x (K*s_sub)
  trace.subgraph_embeddings = nd::reshape(hk_cat, {B, cfg.K, cfg.s_sub});
  trace.subgraph_concepts = normalized_softmax(trace.subgraph_embeddings);

  // importance network, shared across subgraphs
  Tensor<Real> flat_sub = nd::reshape(trace.subgraph_concepts, {B * cfg.K, cfg.s_sub});
  Tensor<Real> w1 = tape ? params.theta_w1.use(*tape) : params.theta_w1.value;
  Tensor<Real> b1 = tape ? params.theta_b1.use(*tape) : params.theta_b1.value;
  Tensor<Real> w2 = tape ? params.theta_w2.use(*tape) : params.theta_w2.value;
  Tensor<Real> b2 = tape ? params.theta_b2.use(*tape) : params.theta_b2.value;
  Tensor<Real> hidden = nd::relu(nd::add(nd::matmul(flat_sub, w1), b1));
  Tensor<Real> imp = nd::sigmoid(nd::add(nd::matmul(hidden, w2), b2));  // (B*K) x 1
  trace.importance = nd::reshape(imp, {B, cfg.K});
  trace.graph_concept = normalized_softmax(trace.importance);

  Tensor<Real> rw = tape ? params.readout_w.use(*tape) : params.readout_w.value;
  Tensor<Real> rb = tape ? params.readout_b.use(*tape) : params.readout_b.value;
  trace.logits = nd::add(nd::matmul(trace.graph_concept, rw), rb);
  return trace;
}

}  // namespace scnet::model
