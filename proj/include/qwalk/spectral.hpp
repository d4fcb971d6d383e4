#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "qwalk/arc_space.hpp"
#include "qwalk/rw_model.hpp"

namespace qwalk {

/// Window for m(+-1) and for phase clustering.
inline constexpr double kClusterWindow = 1e-8;

struct JacobiEigenpairs {
  Eigen::VectorXd values;   ///< ascending
  Eigen::MatrixXd vectors;  ///< orthonormal columns, first nonzero entry positive
  std::size_t m_plus = 0;   ///< eigenvalues within tol of +1
  std::size_t m_minus = 0;  ///< eigenvalues within tol of -1
  double tol = kClusterWindow;

  std::size_t size() const { return static_cast<std::size_t>(values.size()); }
};

/// Throws NumericalError when an eigenvalue leaves [-1 - tol, 1 + tol].
JacobiEigenpairs eigensolve(const SymTridiagonal& J, double tol = kClusterWindow);
/// Same contract for a dense symmetric matrix (general graphs).
JacobiEigenpairs eigensolve_dense(const Eigen::MatrixXd& J, double tol = kClusterWindow);

/// Eigenpairs of J at the eigenvalues closest to each entry of `lambdas`, by
/// shifted inverse iteration; for large N where only a few pairs are needed.
JacobiEigenpairs eigenpairs_near(const SymTridiagonal& J, const std::vector<double>& lambdas,
                                 double tol = kClusterWindow);

enum class Branch { plus, minus, single };

std::string_view to_string(Branch b);

struct LiftedEigenvector {
  double lambda = 0.0;
  Branch branch = Branch::single;
  double theta = 0.0;                   ///< arccos(lambda)
  std::complex<double> eigenvalue;      ///< e^{+-i theta}
  StateVector vector;                   ///< (I - e^{+-i theta} S) A p, or A p at +-1
  StateVector normalized;
  double norm2 = 0.0;
  double residual = 0.0;                ///< ||U q - e q||_inf on the raw vector
  double normalized_residual = 0.0;
  std::size_t pair_index = 0;           ///< column of JacobiEigenpairs
};

/// Throws NumericalError (naming lambda) when a residual exceeds max_residual.
std::vector<LiftedEigenvector> lift(const JacobiEigenpairs& pairs, const WalkOperators& ops,
                                    double max_residual = 1e-6);

struct SignedReflectedVector {
  std::size_t left_loop = 0;
  std::optional<std::size_t> right_loop;  ///< empty for the terminal vector
  StateVector vector;
  StateVector normalized;
  double norm2 = 0.0;
  bool terminal = false;
  /// False for a terminal vector of a recurrent walk: its truncated norm grows without bound.
  bool square_summable = true;
};

struct SignedReflectedBasis {
  std::vector<SignedReflectedVector> vectors;
  std::vector<std::size_t> loops;
};

/// Vectors between consecutive loops of the truncated chain (never the terminal one).
SignedReflectedBasis signed_reflected_core(const WalkOperators& ops);

/// Core vectors plus, when the loop set is finite and its last loop lies
/// below N, the terminal vector cut off at N. `cls` defaults to classify(walk).
SignedReflectedBasis signed_reflected_basis(const HalfLineWalk& walk, std::size_t N,
                                            std::optional<RecurrenceClass> cls = std::nullopt);

struct HSBasis {
  Eigen::MatrixXd plus;   ///< orthonormal basis of the U = +1 part
  Eigen::MatrixXd minus;  ///< orthonormal basis of the U = -1 part
  std::size_t range_rank = 0;  ///< dim span{a_u, b_u}

  std::size_t dimension() const { return static_cast<std::size_t>(plus.cols() + minus.cols()); }
};

/// Orthogonal complement of span{a_u, b_u} by dense eigendecomposition, split by S.
HSBasis h_s_brute_force(const DenseWalk& walk, double rank_tol = 1e-9);

enum class HSMethod { analytic, brute_force };

struct SpectralData {
  JacobiEigenpairs pairs;
  std::vector<LiftedEigenvector> lifts;
  Eigen::MatrixXcd hs_plus;
  Eigen::MatrixXcd hs_minus;
  HSMethod method = HSMethod::analytic;
  /// |A| - (#lifts + dim H^(S)); zero for a complete decomposition.
  long completeness_defect = 0;
};

SpectralData decompose(const WalkOperators& ops, HSMethod method = HSMethod::analytic);

struct MassPoint {
  double lambda = 0.0;
  double max_tail_mass = 0.0;
  double max_drift = 0.0;
};

struct MassPointOptions {
  double tail_fraction = 0.25;
  double tail_tol = 1e-6;
  /// Slowly decaying eigenvectors count when their tail shrinks by this factor
  /// from one truncation size to the next and stays below slow_tail_tol.
  double tail_decay = 0.75;
  double slow_tail_tol = 1e-2;
  double stability = 1e-6;
};

/// Eigenvalues whose eigenvectors stay localized (tail mass below tail_tol, or
/// shrinking with N) and whose positions are stable across all truncation sizes.
std::vector<MassPoint> mass_points(const HalfLineWalk& walk, const std::vector<std::size_t>& N_list,
                                   const MassPointOptions& options = {});

bool is_mass_point(double lambda, const std::vector<MassPoint>& points, double stability = 1e-6);

}  // namespace qwalk
