#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "qwalk/arc_space.hpp"
#include "qwalk/measure_table.hpp"
#include "qwalk/rw_model.hpp"
#include "qwalk/series.hpp"
#include "qwalk/spectral.hpp"

namespace qwalk {

/// Initial state supported on the arcs with head `anchor`.
struct InitialState {
  std::string kind = "arc";
  std::size_t anchor = 0;
  /// Amplitudes on |anchor;L>, |anchor;O>, |anchor;R>.
  std::array<std::complex<double>, 3> coeff{};

  static InitialState arc(std::size_t j, Direction d);
  /// a_j.
  static InitialState incidence(const HalfLineWalk& walk, std::size_t j);
  /// Unit piece of the signed reflected vector at j: (-sqrt(p)|O> + sqrt(r)|R>) on a
  /// loop site, (-sqrt(p)|L> + sqrt(q)|R>) / sqrt(p + q) elsewhere.
  static InitialState reflected(const HalfLineWalk& walk, std::size_t j);
  /// Normalizes the given coefficients; throws ParameterError on a zero vector.
  static InitialState custom(std::size_t j, std::array<std::complex<double>, 3> c);

  /// Throws PreconditionError when a nonzero coefficient sits on an absent arc.
  StateVector build(const ArcBasis& basis) const;
};

struct ProjectedState {
  StateVector state;
  double removed_weight = 0.0;  ///< squared norm removed before renormalization
  double residual_overlap = 0.0;
  std::size_t removed_vectors = 0;
};

/// Gram-Schmidt of psi against every lift whose lambda is a mass point;
/// throws NumericalError if the residual overlap stays above 1e-10.
ProjectedState project_out_mass_points(const SpectralData& data, const StateVector& psi,
                                       const std::vector<MassPoint>& points);

struct LimitMeasureResult {
  MeasureTable table;
  std::vector<double> hr_part;     ///< phase groups made only of lifts
  std::vector<double> hs_part;     ///< sum over arcs at u of |<delta, Pi_S psi0>|^2
  std::vector<double> cross_part;  ///< remainder from groups mixing lifts with H^(S)
  std::vector<std::string> warnings;
  double max_norm_drift = 0.0;
};

LimitMeasureResult spectral_limit_measure(const SpectralData& data, const ArcBasis& basis,
                                          const StateVector& psi0,
                                          double window = kClusterWindow);

LimitMeasureResult direct_limit_measure(const WalkOperators& ops, const StateVector& psi0,
                                        std::size_t T);

struct LowerBound {
  double value = 0.0;
  bool pi_available = false;
};

/// multiplier * |<a_v, psi0>|^2 pi(u) pi(v) + hs_term; multiplier 2 gives the r == 0 doubling.
LowerBound lower_bound_general(const WalkOperators& ops, const StateVector& psi0, std::size_t u,
                               std::size_t v, const MeasureTable* pi, double hs_term,
                               double multiplier = 1.0);

struct ClosedForm {
  double value = 0.0;
  double trapped = 0.0;  ///< {2 delta_0(j) + (1 - delta_0(j))} pi(j)
};

/// Homogeneous p < q, r == 0, p_0 = 1 started from the arcs of j.
ClosedForm homogeneous_closed_form(double p, double q, std::size_t i, std::size_t j);
double homogeneous_pi(double p, double q, std::size_t j);

struct SupportSet {
  enum class Kind { empty, from, interval } kind = Kind::empty;
  std::size_t lo = 0;
  std::size_t hi = 0;

  bool contains(std::size_t j) const {
    return kind == Kind::from ? j >= lo : kind == Kind::interval ? (j >= lo && j <= hi) : false;
  }
  std::string describe() const;
};

SupportSet supp_h_s(const HalfLineWalk& walk, const RecurrenceReport& recurrence);

struct CorollaryResult {
  MeasureTable table;            ///< mu(i) for 0 <= i <= N
  std::vector<double> pi_prime;  ///< site masses of the normalized reflected vector
  std::complex<double> overlap;  ///< sum_j <a_perp_j, psi0>
  SeriesSummary c_r_prime;
  bool contradiction = false;    ///< C_R' did not stabilize
};

/// One loop at 0 on a transient walk.
CorollaryResult corollary2_measure(const HalfLineWalk& walk, const WalkOperators& ops,
                                   const StateVector& psi0, const SeriesOptions& options = {});

/// Loops exactly at 0 and n > 0 on a recurrent walk.
CorollaryResult corollary3_measure(const HalfLineWalk& walk, const WalkOperators& ops,
                                   const StateVector& psi0, const SeriesOptions& options = {});

struct EtaNormReport {
  std::size_t last_loop = 0;
  double first_site = 0.0;  ///< q~ (1 - q) Q^2 / r at the last loop
  SeriesSummary norm2;      ///< first_site + sum_{l > j_n} Q_l^2
  /// max over K of |LHS_K - RHS_K| / |LHS_K| with
  /// LHS_K = sum_{l=j_n+1}^K Q_l^2 and RHS_K = 2 sum R_l + boundary - R_K.
  double identity_max_rel_error = 0.0;
  std::size_t identity_worst_K = 0;
  std::vector<std::array<double, 3>> identity_checkpoints;  ///< (K, LHS_K, RHS_K)
};

EtaNormReport eta_norm_terminal(const HalfLineWalk& walk, std::size_t last_loop,
                                const SeriesOptions& options = {});

}  // namespace qwalk
