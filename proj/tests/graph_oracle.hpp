#pragma once

// Arc-space operators of a reversible walk on an arbitrary finite graph,
// assembled arc by arc from a symmetric conductance matrix. Arcs are ordered
// by head vertex, then tail vertex, which on a path reproduces the L, O, R order.

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "qwalk/arc_space.hpp"
#include "qwalk/rw_model.hpp"

namespace oracle {

struct Graph {
  Eigen::MatrixXd A;
  Eigen::MatrixXd S;
  std::size_t vertices = 0;
  std::size_t edges = 0;
  std::size_t loops = 0;

  Eigen::MatrixXd B() const { return S * A; }
  Eigen::MatrixXd C() const {
    return 2.0 * A * A.transpose() - Eigen::MatrixXd::Identity(A.rows(), A.rows());
  }
  Eigen::MatrixXd U() const { return S * C(); }
  qwalk::DenseWalk dense() const { return {A, S, vertices, edges, loops}; }
};

inline Graph from_conductances(const Eigen::MatrixXd& W) {
  const auto n = W.rows();
  struct ArcRec { Eigen::Index tail, head; };
  std::vector<ArcRec> arcs;
  Graph g;
  g.vertices = static_cast<std::size_t>(n);
  for (Eigen::Index u = 0; u < n; ++u) {
    for (Eigen::Index v = 0; v < n; ++v) {
      if (W(u, v) > 0.0) arcs.push_back({v, u});
    }
    if (W(u, u) > 0.0) ++g.loops;
    for (Eigen::Index v = u; v < n; ++v) {
      if (W(u, v) > 0.0) ++g.edges;
    }
  }
  const auto m = static_cast<Eigen::Index>(arcs.size());
  g.A = Eigen::MatrixXd::Zero(m, n);
  g.S = Eigen::MatrixXd::Zero(m, m);
  const Eigen::VectorXd deg = W.rowwise().sum();
  for (Eigen::Index k = 0; k < m; ++k) {
    const auto [v, u] = arcs[k];
    g.A(k, u) = std::sqrt(W(u, v) / deg[u]);
    for (Eigen::Index l = 0; l < m; ++l) {
      if (arcs[l].tail == u && arcs[l].head == v) g.S(l, k) = 1.0;
    }
  }
  return g;
}

/// Detailed-balance conductances of a truncated birth-death chain.
inline Eigen::MatrixXd chain_conductances(const qwalk::TruncatedChain& c) {
  const auto n = static_cast<Eigen::Index>(c.sites.size());
  Eigen::VectorXd pi(n);
  pi[0] = 1.0;
  for (Eigen::Index j = 1; j < n; ++j) pi[j] = pi[j - 1] * c.sites[j - 1].p / c.sites[j].q;
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    W(j, j) = pi[j] * c.sites[j].r;
    if (j + 1 < n) W(j, j + 1) = W(j + 1, j) = pi[j] * c.sites[j].p;
  }
  return W;
}

/// Random truncated chain on {0..N} with a random loop set.
inline qwalk::TruncatedChain random_chain(std::mt19937_64& rng, std::size_t N, double loop_prob) {
  std::uniform_real_distribution<double> unif(0.05, 1.0);
  std::bernoulli_distribution has_loop(loop_prob);
  std::vector<double> params;
  for (std::size_t j = 0; j <= N + 1; ++j) {
    double p = unif(rng), q = j == 0 ? 0.0 : unif(rng), r = has_loop(rng) ? unif(rng) : 0.0;
    const double z = p + q + r;
    p /= z;
    r /= z;
    q = 1.0 - p - r;
    if (j == 0) p = 1.0 - r, q = 0.0;
    params.insert(params.end(), {p, q, r});
  }
  return qwalk::truncate(qwalk::make_family("custom", params), N);
}

/// Random symmetric conductances on n vertices: a random spanning path keeps the
/// graph connected, extra edges and loops appear with the given probabilities.
inline Eigen::MatrixXd random_graph(std::mt19937_64& rng, int n, double edge_prob, double loop_prob) {
  std::uniform_real_distribution<double> unif(0.1, 1.0);
  std::bernoulli_distribution edge(edge_prob), loop(loop_prob);
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(n, n);
  for (int u = 0; u + 1 < n; ++u) W(u, u + 1) = W(u + 1, u) = unif(rng);
  for (int u = 0; u < n; ++u) {
    for (int v = u + 2; v < n; ++v) {
      if (edge(rng)) W(u, v) = W(v, u) = unif(rng);
    }
    if (loop(rng)) W(u, u) = unif(rng);
  }
  return W;
}

/// Number of eigenvalues of a symmetric matrix within tol of x.
inline std::size_t multiplicity(const Eigen::MatrixXd& J, double x, double tol = 1e-8) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J, Eigen::EigenvaluesOnly);
  std::size_t m = 0;
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
    if (std::fabs(es.eigenvalues()[k] - x) < tol) ++m;
  }
  return m;
}

}  // namespace oracle
