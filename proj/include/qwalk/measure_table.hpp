#pragma once

#include <numeric>
#include <string>
#include <vector>

namespace qwalk {

/// Nonnegative per-vertex values together with a label saying how they were
/// produced, e.g. "direct_cesaro(T=10000,N=400)" or "closed_form(homogeneous)".
struct MeasureTable {
  std::vector<double> values;
  std::string method;

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t u) const { return values[u]; }
  double total() const { return std::accumulate(values.begin(), values.end(), 0.0); }
};

}  // namespace qwalk
