#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "qwalk/measure_table.hpp"
#include "qwalk/rw_model.hpp"

namespace qwalk {

enum class Direction { L, O, R };

std::string_view to_string(Direction d);
std::optional<Direction> parse_direction(std::string_view text);

/// |j;L> is the arc from j-1 into j, |j;O> the loop at j, |j;R> the arc from j+1 into j.
struct Arc {
  std::size_t vertex = 0;
  Direction dir = Direction::L;

  bool operator==(const Arc&) const = default;
};

using StateVector = Eigen::VectorXcd;

/// Arcs of a truncated half line in canonical order: ascending vertex, then L, O, R.
class ArcBasis {
 public:
  static ArcBasis from_chain(const TruncatedChain& chain);

  std::size_t size() const { return arcs_.size(); }
  const Arc& arc(std::size_t k) const { return arcs_[k]; }
  const std::vector<Arc>& arcs() const { return arcs_; }
  std::optional<std::size_t> index_of(std::size_t vertex, Direction d) const;
  /// Index of the reversed arc; loops map to themselves.
  std::size_t reverse(std::size_t k) const { return reverse_[k]; }
  /// Arcs with head u occupy [first_arc(u), first_arc(u + 1)).
  std::size_t first_arc(std::size_t u) const { return first_[u]; }

  std::size_t vertex_count() const { return first_.size() - 1; }
  std::size_t loop_count() const { return loops_; }
  /// Undirected edges, each loop counted once.
  std::size_t edge_count() const { return (arcs_.size() + loops_) / 2; }

 private:
  std::vector<Arc> arcs_;
  std::vector<std::size_t> reverse_;
  std::vector<std::size_t> first_;
  std::size_t loops_ = 0;
};

/// S, C = 2AA^T - I and U = SC on a truncated chain, applied matrix-free.
class WalkOperators {
 public:
  explicit WalkOperators(TruncatedChain chain);

  const TruncatedChain& chain() const { return chain_; }
  const ArcBasis& basis() const { return basis_; }
  std::size_t dimension() const { return basis_.size(); }
  std::size_t vertex_count() const { return basis_.vertex_count(); }
  /// sqrt of the transition probability carried by arc k inside a_{head(k)}.
  double amplitude(std::size_t k) const { return amp_[k]; }

  StateVector incidence_vector(std::size_t u) const;
  StateVector swapped_incidence_vector(std::size_t u) const;

  StateVector apply_shift(const StateVector& psi) const;
  StateVector apply_coin(const StateVector& psi) const;
  StateVector apply_U(const StateVector& psi) const;
  StateVector apply_ref_A(const StateVector& psi) const { return apply_coin(psi); }
  /// 2BB^T - I = S C S.
  StateVector apply_ref_B(const StateVector& psi) const;
  /// A^T psi (one coordinate per vertex).
  Eigen::VectorXcd project_A(const StateVector& psi) const;
  StateVector embed_A(const Eigen::VectorXcd& x) const;
  /// U psi written into out (out must not alias psi).
  void step(const StateVector& psi, StateVector& out) const;

  Eigen::MatrixXd dense_A() const;
  Eigen::MatrixXd dense_B() const;
  Eigen::MatrixXd dense_S() const;
  Eigen::MatrixXd dense_U() const;

 private:
  TruncatedChain chain_;
  ArcBasis basis_;
  std::vector<double> amp_;
};

MeasureTable position_distribution(const ArcBasis& basis, const StateVector& psi);

struct EvolutionResult {
  MeasureTable average;
  /// max_t | ||U^t psi0|| - 1 |
  double max_norm_drift = 0.0;
  std::size_t horizon = 0;
};

/// (1/T) sum_{t<T} P(X_t = .), no renormalization along the way.
EvolutionResult evolve_and_average(const WalkOperators& ops, const StateVector& psi0,
                                   std::size_t T);

/// Dense arc-space description of an arbitrary finite reversible graph; used
/// for brute-force checks beyond the half line.
struct DenseWalk {
  Eigen::MatrixXd A;  ///< |A| x |V|, columns a_u
  Eigen::MatrixXd S;  ///< |A| x |A| arc reversal
  std::size_t vertex_count = 0;
  std::size_t edge_count = 0;
  std::size_t loop_count = 0;

  Eigen::MatrixXd B() const { return S * A; }
  Eigen::MatrixXd U() const;
  Eigen::MatrixXd jacobi() const { return A.transpose() * B(); }
};

DenseWalk to_dense(const WalkOperators& ops);

}  // namespace qwalk
