#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <string_view>
#include <utility>
#include <vector>

namespace qwalk {

enum class SeriesVerdict { converged, diverged, undetermined };

std::string_view to_string(SeriesVerdict v);

struct SeriesOptions {
  std::size_t cutoff = 1'000'000;
  /// Relative size of the last added term below which the series counts as stabilized.
  double stabilize_tol = 1e-12;
  /// Partial-sum magnitude above which the series counts as divergent.
  double diverge_threshold = 1e8;
  /// Raabe-test margin: j(t_j/t_{j+1} - 1) >= 1 + margin on the tail => convergent.
  double raabe_margin = 0.05;
  bool use_ratio_test = true;
};

/// Running-sum record of a positive series t_1 + t_2 + ... .
struct SeriesSummary {
  /// (number of terms, partial sum) at 1,2,5,10,20,50,... and at the final term.
  std::vector<std::pair<std::size_t, double>> checkpoints;
  double value = 0.0;
  std::size_t terms = 0;
  double last_term = 0.0;
  /// Verdict of the increment/threshold rule.
  SeriesVerdict literal = SeriesVerdict::undetermined;
  /// Verdict of the Raabe ratio test over the second half of the summed range;
  /// only evaluated when the literal rule is undetermined.
  SeriesVerdict raabe = SeriesVerdict::undetermined;
  double raabe_min = 0.0;
  double raabe_max = 0.0;

  SeriesVerdict verdict() const {
    return literal != SeriesVerdict::undetermined ? literal : raabe;
  }
};

/// Sums initial + t_1 + t_2 + ... where t_{j+1} = t_j * ratio(j), with
/// compensated summation. Stops early once the sum passes the divergence
/// threshold or the terms underflow to zero.
SeriesSummary sum_product_series(double first_term,
                                 const std::function<double(std::size_t)>& ratio,
                                 const SeriesOptions& options, double initial = 0.0);

/// Neumaier compensated accumulator.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace qwalk
