#pragma once

// Shared test-side oracles: a hand-rolled batch builder plus independent
// plain-double re-implementations of every custom loss term and cluster
// metric, written without the tensor/tape machinery so they can arbitrate
// the production implementations.

#include <cmath>
#include <random>
#include <vector>

#include "scnet/graph.hpp"
#include "scnet/tensor.hpp"

namespace oracle {

struct RawBatch {
  scnet::data::PaddedBatch b;
  RawBatch(int B, int N, int K) : K_(K) {
    b.B = B;
    b.N = N;
    b.f = 1;
    b.adjacency.assign(static_cast<size_t>(B) * N * N, 0.0);
    b.features.assign(static_cast<size_t>(B) * N, 1.0);
    b.mask.assign(static_cast<size_t>(B) * N, 1.0);
    b.labels.assign(static_cast<size_t>(B), 0);
    assign.assign(static_cast<size_t>(B) * N * K, 0.0);
  }
  void edge(int g, int i, int j) {
    b.adjacency[idx(g, i, j)] = 1.0;
    b.adjacency[idx(g, j, i)] = 1.0;
  }
  void row(int g, int i, std::vector<double> c) {
    for (int k = 0; k < K_; ++k) assign[static_cast<size_t>((g * b.N + i) * K_ + k)] = c[static_cast<size_t>(k)];
  }
  void pad(int g, int i) {
    b.mask[static_cast<size_t>(g * b.N + i)] = 0.0;
    row(g, i, std::vector<double>(static_cast<size_t>(K_), 0.0));
  }
  scnet::nd::Tensor<double> assignments() const { return scnet::nd::Tensor<double>({b.B, b.N, K_}, assign); }
  size_t idx(int g, int i, int j) const { return static_cast<size_t>((g * b.N + i) * b.N + j); }
  std::vector<double> assign;
  int K_;
};

inline double oracle_entropy(const RawBatch& r) {
  const int B = r.b.B, N = r.b.N, K = r.K_;
  double sum = 0, n = 0;
  for (int g = 0; g < B; ++g)
    for (int i = 0; i < N; ++i) {
      if (r.b.mask[static_cast<size_t>(g * N + i)] == 0) continue;
      double h = 0;
      for (int k = 0; k < K; ++k) {
        double c = r.assign[static_cast<size_t>((g * N + i) * K + k)];
        h -= c * std::log(c + 1e-12);
      }
      sum += h / std::log(static_cast<double>(K));
      n += 1;
    }
  return n ? sum / n : 0.0;
}

inline double dot_assign(const RawBatch& r, int g, int i, int j) {
  double d = 0;
  for (int k = 0; k < r.K_; ++k)
    d += r.assign[static_cast<size_t>((g * r.b.N + i) * r.K_ + k)] *
         r.assign[static_cast<size_t>((g * r.b.N + j) * r.K_ + k)];
  return d;
}

inline double oracle_pos(const RawBatch& r, double m) {
  double sum = 0, n = 0;
  for (int g = 0; g < r.b.B; ++g)
    for (int i = 0; i < r.b.N; ++i)
      for (int j = i + 1; j < r.b.N; ++j) {
        if (r.b.adjacency[r.idx(g, i, j)] == 0) continue;
        sum += std::max(0.0, m - dot_assign(r, g, i, j)) / m;
        n += 1;
      }
  return n ? sum / n : 0.0;
}

inline double oracle_neg(const RawBatch& r) {
  double sum = 0, n = 0;
  for (int g = 0; g < r.b.B; ++g)
    for (int i = 0; i < r.b.N; ++i)
      for (int j = i + 1; j < r.b.N; ++j) {
        if (r.b.mask[static_cast<size_t>(g * r.b.N + i)] == 0 || r.b.mask[static_cast<size_t>(g * r.b.N + j)] == 0)
          continue;
        if (r.b.adjacency[r.idx(g, i, j)] != 0) continue;
        sum += dot_assign(r, g, i, j);
        n += 1;
      }
  return n ? sum / n : 0.0;
}

inline double oracle_iso(const RawBatch& r, double tau) {
  double sum = 0, n = 0;
  for (int g = 0; g < r.b.B; ++g)
    for (int i = 0; i < r.b.N; ++i) {
      if (r.b.mask[static_cast<size_t>(g * r.b.N + i)] == 0) continue;
      double v = 0;
      bool has_nbr = false;
      for (int j = 0; j < r.b.N; ++j)
        if (r.b.adjacency[r.idx(g, i, j)] != 0) {
          has_nbr = true;
          v += dot_assign(r, g, i, j);
        }
      if (!has_nbr) continue;
      sum += std::max(0.0, tau - v) / tau;
      n += 1;
    }
  return n ? sum / n : 0.0;
}

inline double oracle_util(const RawBatch& r) {
  const int K = r.K_;
  std::vector<double> u(static_cast<size_t>(K), 0.0);
  double n = 0;
  for (int g = 0; g < r.b.B; ++g)
    for (int i = 0; i < r.b.N; ++i) {
      if (r.b.mask[static_cast<size_t>(g * r.b.N + i)] == 0) continue;
      for (int k = 0; k < K; ++k) u[static_cast<size_t>(k)] += r.assign[static_cast<size_t>((g * r.b.N + i) * K + k)];
      n += 1;
    }
  double h = 0;
  for (double& v : u) {
    v /= n;
    h -= v * std::log(v + 1e-12);
  }
  return 1.0 - h / std::log(static_cast<double>(K));
}

inline double oracle_consistency(const RawBatch& r, const std::vector<double>& emb, int d, double gamma) {
  const int N = r.b.N;
  std::vector<int> nodes;
  for (int i = 0; i < r.b.B * N; ++i)
    if (r.b.mask[static_cast<size_t>(i)] != 0) nodes.push_back(i);
  double wsum = 0, num = 0;
  for (size_t a = 0; a < nodes.size(); ++a)
    for (size_t b2 = a + 1; b2 < nodes.size(); ++b2) {
      const int i = nodes[a], j = nodes[b2];
      double dot = 0, ni = 0, nj = 0;
      for (int t = 0; t < d; ++t) {
        double x = emb[static_cast<size_t>(i * d + t)], y = emb[static_cast<size_t>(j * d + t)];
        dot += x * y;
        ni += x * x;
        nj += y * y;
      }
      double cosine = dot / (std::sqrt(ni + 1e-20) * std::sqrt(nj + 1e-20) + 1e-8);
      double w = std::pow((cosine + 1) / 2, gamma);
      double dist = 0;
      for (int k = 0; k < r.K_; ++k) {
        double diff = r.assign[static_cast<size_t>(i * r.K_ + k)] - r.assign[static_cast<size_t>(j * r.K_ + k)];
        dist += diff * diff;
      }
      num += w * std::sqrt(dist + 1e-20) / std::sqrt(2.0);
      wsum += w;
    }
  return num / (wsum + 1e-8);
}

// -------- cluster-metric oracles ---------------------------------------------

inline double oracle_assignment_strength(const std::vector<std::vector<double>>& a, const std::vector<char>& mask) {
  double sum = 0, n = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    if (!mask[i]) continue;
    double mx = a[i][0];
    for (double v : a[i]) mx = std::max(mx, v);
    sum += mx;
    n += 1;
  }
  return n ? sum / n : 0.0;
}

inline std::vector<double> oracle_conditional_strength(const std::vector<std::vector<double>>& a,
                                                       const std::vector<char>& mask) {
  const size_t K = a.empty() ? 0 : a[0].size();
  std::vector<double> out(K, 0.0);
  for (size_t k = 0; k < K; ++k) {
    double sum = 0, n = 0;
    for (size_t i = 0; i < a.size(); ++i) {
      if (!mask[i]) continue;
      if (a[i][k] >= 1.0 / static_cast<double>(K)) {
        sum += a[i][k];
        n += 1;
      }
    }
    out[k] = n ? sum / n : 0.0;
  }
  return out;
}

inline double oracle_utilization_metric(const std::vector<std::vector<double>>& a, const std::vector<char>& mask) {
  auto cond = oracle_conditional_strength(a, mask);
  double sum = 0;
  for (double v : cond) sum += v;
  return cond.empty() ? 0.0 : sum / static_cast<double>(cond.size());
}

inline RawBatch random_batch(int B, int N, int K, std::mt19937_64& rng, bool with_padding = true) {
  RawBatch r(B, N, K);
  std::uniform_real_distribution<double> u(0, 1);
  for (int g = 0; g < B; ++g) {
    for (int i = 0; i < N; ++i)
      for (int j = i + 1; j < N; ++j)
        if (u(rng) < 0.35) r.edge(g, i, j);
    for (int i = 0; i < N; ++i) {
      std::vector<double> c(static_cast<size_t>(K));
      double z = 0;
      for (double& v : c) {
        v = u(rng) + 1e-3;
        z += v;
      }
      for (double& v : c) v /= z;
      r.row(g, i, c);
    }
    if (with_padding && u(rng) < 0.7) {
      const int pad_count = 1 + static_cast<int>(rng() % 2);
      for (int p = 0; p < pad_count; ++p) {
        const int i = N - 1 - p;
        for (int j = 0; j < N; ++j) {
          r.b.adjacency[r.idx(g, i, j)] = 0;
          r.b.adjacency[r.idx(g, j, i)] = 0;
        }
        r.pad(g, i);
      }
    }
  }
  return r;
}

}  // namespace oracle
