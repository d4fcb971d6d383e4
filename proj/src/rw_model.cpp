#include "qwalk/rw_model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "qwalk/errors.hpp"

namespace qwalk {

std::string_view to_string(RecurrenceClass c) {
  switch (c) {
    case RecurrenceClass::transient: return "transient";
    case RecurrenceClass::null_recurrent: return "null_recurrent";
    case RecurrenceClass::positive_recurrent: return "positive_recurrent";
  }
  return "null_recurrent";
}

std::optional<RecurrenceClass> parse_recurrence_class(std::string_view text) {
  if (text == "transient") return RecurrenceClass::transient;
  if (text == "null_recurrent") return RecurrenceClass::null_recurrent;
  if (text == "positive_recurrent") return RecurrenceClass::positive_recurrent;
  return std::nullopt;
}

std::string_view to_string(TakeFrom t) {
  switch (t) {
    case TakeFrom::right: return "right";
    case TakeFrom::left: return "left";
    case TakeFrom::proportional: return "proportional";
  }
  return "right";
}

std::optional<TakeFrom> parse_take_from(std::string_view text) {
  if (text == "right") return TakeFrom::right;
  if (text == "left") return TakeFrom::left;
  if (text == "proportional") return TakeFrom::proportional;
  return std::nullopt;
}

void validate_site(std::size_t j, const SiteProbabilities& s) {
  auto fail = [&](const std::string& why) {
    std::ostringstream os;
    os.precision(17);
    os << "site " << j << " (p=" << s.p << ", q=" << s.q << ", r=" << s.r << "): " << why;
    throw ParameterError(os.str());
  };
  if (!std::isfinite(s.p) || !std::isfinite(s.q) || !std::isfinite(s.r)) fail("non-finite value");
  if (s.p < 0.0 || s.q < 0.0 || s.r < 0.0) fail("negative probability");
  if (std::fabs(s.p + s.q + s.r - 1.0) > kProbabilityTolerance) fail("p + q + r != 1");
  if (s.p <= 0.0) fail("p must be positive");
  if (j == 0 && s.q != 0.0) fail("q_0 must be 0");
  if (j >= 1 && s.q <= 0.0) fail("q must be positive away from the origin");
}

HalfLineWalk::HalfLineWalk(std::string name, Rule rule, std::size_t rule_loop_scan,
                           std::optional<std::size_t> rule_loops_from)
    : name_(std::move(name)),
      rule_(std::make_shared<const Rule>(std::move(rule))),
      rule_loop_scan_(rule_loop_scan),
      rule_loops_from_(rule_loops_from) {
  const std::size_t probe = std::max<std::size_t>(rule_loop_scan_, 63);
  for (std::size_t j = 0; j <= probe; ++j) validate_site(j, (*rule_)(j));
}

SiteProbabilities HalfLineWalk::at(std::size_t j) const {
  if (!overrides_.empty()) {
    if (auto it = overrides_.find(j); it != overrides_.end()) return it->second;
  }
  return (*rule_)(j);
}

std::vector<std::size_t> HalfLineWalk::loops_up_to(std::size_t n) const {
  std::set<std::size_t> candidates;
  for (std::size_t j = 0; j <= std::min(n, rule_loop_scan_); ++j) candidates.insert(j);
  if (rule_loops_from_) {
    for (std::size_t j = *rule_loops_from_; j <= n; ++j) candidates.insert(j);
  }
  for (const auto& [j, s] : overrides_) {
    if (j <= n) candidates.insert(j);
  }
  std::vector<std::size_t> out;
  for (std::size_t j : candidates) {
    if (at(j).r > 0.0) out.push_back(j);
  }
  return out;
}

std::optional<std::size_t> HalfLineWalk::first_loop() const {
  std::size_t last = std::max(rule_loop_scan_, rule_loops_from_.value_or(0));
  if (!overrides_.empty()) last = std::max(last, overrides_.rbegin()->first);
  const auto loops = loops_up_to(last);
  if (loops.empty()) return std::nullopt;
  return loops.front();
}

std::vector<std::size_t> HalfLineWalk::loop_set() const {
  if (loop_set_is_infinite()) {
    throw PreconditionError("walk '" + name_ + "' has infinitely many self loops");
  }
  std::size_t last = rule_loop_scan_;
  if (!overrides_.empty()) last = std::max(last, overrides_.rbegin()->first);
  return loops_up_to(last);
}

HalfLineWalk HalfLineWalk::with_site(std::size_t j, const SiteProbabilities& s) const {
  validate_site(j, s);
  HalfLineWalk out = *this;
  out.overrides_[j] = s;
  return out;
}

HalfLineWalk HalfLineWalk::with_declared_class(std::optional<RecurrenceClass> c) const {
  HalfLineWalk out = *this;
  out.declared_ = c;
  return out;
}

HalfLineWalk HalfLineWalk::with_name(std::string name) const {
  HalfLineWalk out = *this;
  out.name_ = std::move(name);
  return out;
}

namespace {

HalfLineWalk make_homogeneous(std::span<const double> params) {
  if (params.size() != 2 && params.size() != 3) {
    throw ParameterError("homogeneous expects [p, q] or [p, q, r]");
  }
  const double p = params[0];
  const double q = params[1];
  const double r = params.size() == 3 ? params[2] : 0.0;
  validate_site(1, {p, q, r});
  validate_site(0, {1.0 - r, 0.0, r});
  auto rule = [p, q, r](std::size_t j) {
    return j == 0 ? SiteProbabilities{1.0 - r, 0.0, r} : SiteProbabilities{p, q, r};
  };
  std::optional<std::size_t> loops_from;
  if (r > 0.0) loops_from = 0;
  RecurrenceClass c = p > q   ? RecurrenceClass::transient
                      : p < q ? RecurrenceClass::positive_recurrent
                              : RecurrenceClass::null_recurrent;
  return HalfLineWalk("homogeneous", rule, 0, loops_from).with_declared_class(c);
}

HalfLineWalk make_custom(std::span<const double> params) {
  if (params.size() < 6 || params.size() % 3 != 0) {
    throw ParameterError("custom expects at least two (p, q, r) triples");
  }
  std::vector<SiteProbabilities> table;
  for (std::size_t k = 0; k < params.size(); k += 3) {
    table.push_back({params[k], params[k + 1], params[k + 2]});
    validate_site(table.size() - 1, table.back());
  }
  const std::size_t last = table.size() - 1;
  auto rule = [table, last](std::size_t j) { return table[std::min(j, last)]; };
  std::optional<std::size_t> loops_from;
  if (table[last].r > 0.0) loops_from = last;
  return HalfLineWalk("custom", rule, last, loops_from);
}

}  // namespace

HalfLineWalk make_family(std::string_view family, std::span<const double> params) {
  auto no_params = [&] {
    if (!params.empty()) throw ParameterError(std::string(family) + " takes no parameters");
  };
  if (family == "homogeneous") return make_homogeneous(params);
  if (family == "custom") return make_custom(params);
  if (family == "example_a") {
    no_params();
    auto rule = [](std::size_t i) {
      const double x = static_cast<double>(i);
      return SiteProbabilities{(x + 2) / (2 * x + 2), x / (2 * x + 2), 0.0};
    };
    return HalfLineWalk("example_a", rule).with_declared_class(RecurrenceClass::transient);
  }
  if (family == "example_b") {
    no_params();
    auto rule = [](std::size_t i) {
      const double x = static_cast<double>(i);
      return SiteProbabilities{(x + 1) / (2 * x + 1), x / (2 * x + 1), 0.0};
    };
    return HalfLineWalk("example_b", rule).with_declared_class(RecurrenceClass::null_recurrent);
  }
  if (family == "example_c") {
    no_params();
    auto rule = [](std::size_t i) {
      if (i == 0) return SiteProbabilities{1.0, 0.0, 0.0};
      if (i == 1) return SiteProbabilities{0.5, 0.5, 0.0};
      const double x = static_cast<double>(i);
      return SiteProbabilities{(x - 1) / (2 * x), (x + 1) / (2 * x), 0.0};
    };
    return HalfLineWalk("example_c", rule).with_declared_class(RecurrenceClass::positive_recurrent);
  }
  throw ParameterError("unknown walk family '" + std::string(family) + "'");
}

HalfLineWalk add_self_loop(const HalfLineWalk& walk, std::size_t site, double loop_mass,
                           TakeFrom take_from) {
  if (!(loop_mass > 0.0 && loop_mass < 1.0)) {
    throw ParameterError("loop mass must lie in (0, 1)");
  }
  SiteProbabilities s = walk.at(site);
  if (s.r > 0.0) {
    throw ParameterError("site " + std::to_string(site) + " already has a self loop");
  }
  switch (take_from) {
    case TakeFrom::right:
      s.p -= loop_mass;
      break;
    case TakeFrom::left:
      s.q -= loop_mass;
      break;
    case TakeFrom::proportional: {
      const double total = s.p + s.q;
      const double dp = loop_mass * s.p / total;
      s.p -= dp;
      s.q -= loop_mass - dp;
      break;
    }
  }
  s.r = loop_mass;
  return walk.with_site(site, s);
}

RecurrenceReport classify(const HalfLineWalk& walk, const SeriesOptions& options) {
  if (options.cutoff < 10) throw PreconditionError("classify needs cutoff >= 10");
  RecurrenceReport rep;
  rep.ct = sum_product_series(
      walk.q(1) / walk.p(1), [&](std::size_t j) { return walk.q(j + 1) / walk.p(j + 1); },
      options);
  rep.cr = sum_product_series(
      walk.p(0) / walk.q(1), [&](std::size_t j) { return walk.p(j) / walk.q(j + 1); }, options);

  const SeriesVerdict ct = rep.ct.verdict();
  const SeriesVerdict cr = rep.cr.verdict();
  rep.verified = true;
  if (cr == SeriesVerdict::converged) {
    rep.cls = RecurrenceClass::positive_recurrent;
  } else if (ct == SeriesVerdict::converged) {
    rep.cls = RecurrenceClass::transient;
  } else if (ct == SeriesVerdict::diverged && cr == SeriesVerdict::diverged) {
    rep.cls = RecurrenceClass::null_recurrent;
  } else if (walk.declared_class()) {
    rep.cls = *walk.declared_class();
    rep.verified = false;
  } else {
    throw IndeterminateClassification("recurrence series for '" + walk.name() +
                                      "' did not resolve within the cutoff");
  }
  rep.consistent_with_declared = !walk.declared_class() || *walk.declared_class() == rep.cls;
  return rep;
}

MeasureTable stationary_distribution(const HalfLineWalk& walk, std::size_t N,
                                     const SeriesOptions& options) {
  const RecurrenceReport rep = classify(walk, options);
  if (rep.cls != RecurrenceClass::positive_recurrent) {
    throw PreconditionError("stationary distribution requires a positive recurrent walk");
  }
  const double z = 1.0 + rep.cr.value;
  MeasureTable out;
  out.method = "stationary";
  out.values.resize(N + 1);
  double w = 1.0;
  out.values[0] = w / z;
  for (std::size_t j = 1; j <= N; ++j) {
    w *= walk.p(j - 1) / walk.q(j);
    out.values[j] = w / z;
  }
  return out;
}

Eigen::VectorXd signed_eigenvector(const HalfLineWalk& walk, std::size_t N) {
  Eigen::VectorXd v(N + 1);
  v[0] = 1.0;
  if (walk.has_loop(0)) throw PreconditionError("signed eigenvector requires r == 0");
  for (std::size_t j = 1; j <= N; ++j) {
    if (walk.has_loop(j)) throw PreconditionError("signed eigenvector requires r == 0");
    v[j] = -v[j - 1] * walk.p(j - 1) / walk.q(j);
  }
  return v;
}

Eigen::VectorXd SymTridiagonal::apply(const Eigen::VectorXd& x) const {
  Eigen::VectorXd y = diagonal.cwiseProduct(x);
  const Eigen::Index m = off_diagonal.size();
  y.head(m) += off_diagonal.cwiseProduct(x.tail(m));
  y.tail(m) += off_diagonal.cwiseProduct(x.head(m));
  return y;
}

Eigen::MatrixXd SymTridiagonal::dense() const {
  const Eigen::Index n = size();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  m.diagonal() = diagonal;
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    m(k, k + 1) = off_diagonal[k];
    m(k + 1, k) = off_diagonal[k];
  }
  return m;
}

Eigen::MatrixXd TruncatedChain::stochastic_matrix() const {
  const auto n = static_cast<Eigen::Index>(sites.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto& s = sites[j];
    m(j, j) = s.r;
    if (j + 1 < n) m(j + 1, j) = s.p;
    if (j > 0) m(j - 1, j) = s.q;
  }
  return m;
}

std::vector<std::size_t> TruncatedChain::loops() const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < sites.size(); ++j) {
    if (sites[j].r > 0.0) out.push_back(j);
  }
  return out;
}

TruncatedChain truncate(const HalfLineWalk& walk, std::size_t N) {
  if (N < 2) throw PreconditionError("truncation needs N >= 2");
  TruncatedChain c;
  c.sites.reserve(N + 1);
  for (std::size_t j = 0; j <= N; ++j) c.sites.push_back(walk.at(j));
  auto& last = c.sites.back();
  c.boundary_site = N;
  c.redirected_mass = last.p;
  last.q += last.p;
  last.p = 0.0;
  return c;
}

SymTridiagonal jacobi_matrix(const TruncatedChain& chain) {
  const auto n = static_cast<Eigen::Index>(chain.sites.size());
  SymTridiagonal J;
  J.diagonal.resize(n);
  J.off_diagonal.resize(std::max<Eigen::Index>(n - 1, 0));
  for (Eigen::Index j = 0; j < n; ++j) {
    J.diagonal[j] = chain.sites[j].r;
    if (j + 1 < n) J.off_diagonal[j] = std::sqrt(chain.sites[j].p * chain.sites[j + 1].q);
  }
  return J;
}

SymTridiagonal jacobi_matrix(const HalfLineWalk& walk, std::size_t N) {
  return jacobi_matrix(truncate(walk, N));
}

}  // namespace qwalk
