#include "qwalk/series.hpp"

#include <algorithm>
#include <limits>

namespace qwalk {

std::string_view to_string(SeriesVerdict v) {
  switch (v) {
    case SeriesVerdict::converged: return "converged";
    case SeriesVerdict::diverged: return "diverged";
    case SeriesVerdict::undetermined: return "undetermined";
  }
  return "undetermined";
}

namespace {

// 1, 2, 5, 10, 20, 50, ...
bool is_checkpoint(std::size_t n) {
  while (n >= 10 && n % 10 == 0) n /= 10;
  return n == 1 || n == 2 || n == 5;
}

}  // namespace

SeriesSummary sum_product_series(double first_term,
                                 const std::function<double(std::size_t)>& ratio,
                                 const SeriesOptions& options, double initial) {
  SeriesSummary out;
  CompensatedSum sum;
  sum.add(initial);
  const std::size_t raabe_from = options.cutoff / 2;
  double rmin = std::numeric_limits<double>::infinity();
  double rmax = -std::numeric_limits<double>::infinity();
  bool raabe_seen = false;

  double term = first_term;
  std::size_t j = 1;
  for (;; ++j) {
    sum.add(term);
    out.last_term = term;
    if (is_checkpoint(j)) out.checkpoints.emplace_back(j, sum.value());
    if (sum.value() > options.diverge_threshold) {
      out.literal = SeriesVerdict::diverged;
      break;
    }
    if (term == 0.0) {
      out.literal = SeriesVerdict::converged;
      break;
    }
    if (j == options.cutoff) break;
    const double rho = ratio(j);
    // Raabe quantity j (t_j / t_{j+1} - 1) on the second half of the range.
    if (j >= raabe_from) {
      const double raabe = rho > 0.0 ? static_cast<double>(j) * (1.0 / rho - 1.0)
                                     : std::numeric_limits<double>::infinity();
      rmin = std::min(rmin, raabe);
      rmax = std::max(rmax, raabe);
      raabe_seen = true;
    }
    term *= rho;
  }

  out.terms = j;
  out.value = sum.value();
  if (out.checkpoints.empty() || out.checkpoints.back().first != j) {
    out.checkpoints.emplace_back(j, out.value);
  }
  if (out.literal == SeriesVerdict::undetermined && out.value > 0.0 &&
      out.last_term / out.value < options.stabilize_tol) {
    out.literal = SeriesVerdict::converged;
  }
  if (raabe_seen && options.use_ratio_test) {
    out.raabe_min = rmin;
    out.raabe_max = rmax;
    if (rmax <= 1.0 + 1e-9) {
      out.raabe = SeriesVerdict::diverged;
    } else if (rmin >= 1.0 + options.raabe_margin) {
      out.raabe = SeriesVerdict::converged;
    }
  }
  return out;
}

}  // namespace qwalk
