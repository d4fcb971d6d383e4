#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "qwalk/measure_table.hpp"
#include "qwalk/series.hpp"

namespace qwalk {

/// Right / left / stay probabilities at one site of the half line.
struct SiteProbabilities {
  double p = 0.0;
  double q = 0.0;
  double r = 0.0;

  bool operator==(const SiteProbabilities&) const = default;
};

enum class RecurrenceClass { transient, null_recurrent, positive_recurrent };

std::string_view to_string(RecurrenceClass c);
std::optional<RecurrenceClass> parse_recurrence_class(std::string_view text);

enum class TakeFrom { right, left, proportional };

std::string_view to_string(TakeFrom t);
std::optional<TakeFrom> parse_take_from(std::string_view text);

/// Tolerance on p + q + r = 1.
inline constexpr double kProbabilityTolerance = 1e-12;

/// Throws ParameterError unless (p, q, r) is a valid triple for site j.
void validate_site(std::size_t j, const SiteProbabilities& s);

/// Birth-death walk on {0, 1, 2, ...} with optional holding (self loops).
///
/// The coefficients come from a closed-form rule plus a finite table of
/// per-site overrides (used for added loops), so infinite families are
/// represented exactly and evaluating site j is O(log #overrides).
/// Instances are immutable and cheap to copy.
class HalfLineWalk {
 public:
  using Rule = std::function<SiteProbabilities(std::size_t)>;

  /// `rule_loop_scan` bounds the sites where `rule` may produce r > 0, unless
  /// `rule_loops_from` is set, in which case every site >= that index has a loop.
  HalfLineWalk(std::string name, Rule rule, std::size_t rule_loop_scan = 0,
               std::optional<std::size_t> rule_loops_from = std::nullopt);

  const std::string& name() const { return name_; }

  SiteProbabilities at(std::size_t j) const;
  double p(std::size_t j) const { return at(j).p; }
  double q(std::size_t j) const { return at(j).q; }
  double r(std::size_t j) const { return at(j).r; }
  bool has_loop(std::size_t j) const { return at(j).r > 0.0; }

  bool loop_set_is_infinite() const { return rule_loops_from_.has_value(); }
  /// Smallest loop position, if any.
  std::optional<std::size_t> first_loop() const;
  /// Sorted loop positions j <= n.
  std::vector<std::size_t> loops_up_to(std::size_t n) const;
  /// Sorted loop set; throws PreconditionError when it is infinite.
  std::vector<std::size_t> loop_set() const;

  const std::optional<RecurrenceClass>& declared_class() const { return declared_; }

  HalfLineWalk with_site(std::size_t j, const SiteProbabilities& s) const;
  HalfLineWalk with_declared_class(std::optional<RecurrenceClass> c) const;
  HalfLineWalk with_name(std::string name) const;

 private:
  std::string name_;
  std::shared_ptr<const Rule> rule_;
  std::size_t rule_loop_scan_ = 0;
  std::optional<std::size_t> rule_loops_from_;
  std::map<std::size_t, SiteProbabilities> overrides_;
  std::optional<RecurrenceClass> declared_;
};

/// Builds a named family.
///   homogeneous  params [p, q] or [p, q, r]: p_j=p, q_j=q, r_j=r (j>=1), p_0 = 1-r, r_0 = r
///   example_a    p_i=(i+2)/(2i+2), q_i=i/(2i+2)                  (transient)
///   example_b    p_i=(i+1)/(2i+1), q_i=i/(2i+1)                  (null recurrent)
///   example_c    p_0=1, p_1=q_1=1/2, p_i=(i-1)/(2i), q_i=(i+1)/(2i)  (positive recurrent)
///   custom       params [p_0,q_0,r_0, p_1,q_1,r_1, ...]; the last triple repeats forever
/// The named families carry their known recurrence class as the declared class.
HalfLineWalk make_family(std::string_view family, std::span<const double> params = {});

/// Adds holding mass at `site`, removing it from p, q or both (in proportion).
HalfLineWalk add_self_loop(const HalfLineWalk& walk, std::size_t site, double loop_mass,
                           TakeFrom take_from);

struct RecurrenceReport {
  RecurrenceClass cls = RecurrenceClass::null_recurrent;
  SeriesSummary ct;  ///< sum_{j>=1} (q_1...q_j)/(p_1...p_j)
  SeriesSummary cr;  ///< sum_{j>=1} (p_0...p_{j-1})/(q_1...q_j)
  /// False when the class was taken from the declared class because the
  /// series did not resolve.
  bool verified = false;
  bool consistent_with_declared = true;
};

RecurrenceReport classify(const HalfLineWalk& walk, const SeriesOptions& options = {});

/// pi(j) = {delta_0(j) + (1-delta_0(j)) p_0...p_{j-1}/(q_1...q_j)} / (1 + C_R), 0 <= j <= N.
MeasureTable stationary_distribution(const HalfLineWalk& walk, std::size_t N,
                                     const SeriesOptions& options = {});

/// pi'(j) = (-1)^j (p_{j-1}...p_0)/(q_j...q_1), 0 <= j <= N. Requires r == 0 everywhere.
Eigen::VectorXd signed_eigenvector(const HalfLineWalk& walk, std::size_t N);

struct SymTridiagonal {
  Eigen::VectorXd diagonal;
  Eigen::VectorXd off_diagonal;  ///< size() - 1 entries; (j, j+1)

  Eigen::Index size() const { return diagonal.size(); }
  Eigen::MatrixXd dense() const;
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
};

/// Walk restricted to {0..N}; the forward mass at N is sent backward.
struct TruncatedChain {
  std::vector<SiteProbabilities> sites;
  std::size_t boundary_site = 0;
  double redirected_mass = 0.0;  ///< original p_N, now added to q_N

  std::size_t last() const { return sites.size() - 1; }
  std::size_t vertex_count() const { return sites.size(); }
  /// Column-stochastic M with M(u, v) = probability of v -> u.
  Eigen::MatrixXd stochastic_matrix() const;
  std::vector<std::size_t> loops() const;
};

TruncatedChain truncate(const HalfLineWalk& walk, std::size_t N);

/// Diagonal r_j, off-diagonal sqrt(p_j q_{j+1}), taken from the truncated chain
/// (so the last off-diagonal uses the redirected q_N).
SymTridiagonal jacobi_matrix(const TruncatedChain& chain);
SymTridiagonal jacobi_matrix(const HalfLineWalk& walk, std::size_t N);

}  // namespace qwalk
