#include "qwalk/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "qwalk/errors.hpp"

namespace qwalk {

namespace {

constexpr std::size_t slot(Direction d) { return static_cast<std::size_t>(d); }

std::vector<double> arc_mass_to_vertices(const ArcBasis& basis, const StateVector& v) {
  std::vector<double> out(basis.vertex_count(), 0.0);
  for (std::size_t k = 0; k < basis.size(); ++k) out[basis.arc(k).vertex] += std::norm(v[k]);
  return out;
}

}  // namespace

InitialState InitialState::arc(std::size_t j, Direction d) {
  InitialState s;
  s.kind = "arc";
  s.anchor = j;
  s.coeff[slot(d)] = 1.0;
  return s;
}

InitialState InitialState::incidence(const HalfLineWalk& walk, std::size_t j) {
  const auto site = walk.at(j);
  InitialState s;
  s.kind = "incidence";
  s.anchor = j;
  s.coeff = {std::sqrt(site.q), std::sqrt(site.r), std::sqrt(site.p)};
  return s;
}

InitialState InitialState::reflected(const HalfLineWalk& walk, std::size_t j) {
  const auto site = walk.at(j);
  InitialState s;
  s.kind = "reflected";
  s.anchor = j;
  if (site.r > 0.0) {
    const double n = std::sqrt(site.p + site.r);
    s.coeff = {0.0, -std::sqrt(site.p) / n, std::sqrt(site.r) / n};
  } else {
    if (j == 0) throw ParameterError("reflected state at 0 needs a self loop there");
    const double n = std::sqrt(site.p + site.q);
    s.coeff = {-std::sqrt(site.p) / n, 0.0, std::sqrt(site.q) / n};
  }
  return s;
}

InitialState InitialState::custom(std::size_t j, std::array<std::complex<double>, 3> c) {
  double n2 = 0.0;
  for (const auto& x : c) n2 += std::norm(x);
  if (!(n2 > 0.0) || !std::isfinite(n2)) throw ParameterError("custom initial state is zero");
  InitialState s;
  s.kind = "custom";
  s.anchor = j;
  const double n = std::sqrt(n2);
  for (std::size_t k = 0; k < 3; ++k) s.coeff[k] = c[k] / n;
  return s;
}

StateVector InitialState::build(const ArcBasis& basis) const {
  StateVector v = StateVector::Zero(static_cast<Eigen::Index>(basis.size()));
  for (Direction d : {Direction::L, Direction::O, Direction::R}) {
    const auto c = coeff[slot(d)];
    if (c == 0.0) continue;
    const auto k = basis.index_of(anchor, d);
    if (!k) {
      throw PreconditionError("initial state uses arc (" + std::to_string(anchor) + ";" +
                              std::string(to_string(d)) + ") which does not exist");
    }
    v[*k] = c;
  }
  return v;
}

ProjectedState project_out_mass_points(const SpectralData& data, const StateVector& psi,
                                       const std::vector<MassPoint>& points) {
  ProjectedState out;
  out.state = psi;
  std::vector<const StateVector*> targets;
  for (const auto& l : data.lifts) {
    if (is_mass_point(l.lambda, points)) targets.push_back(&l.normalized);
  }
  out.removed_vectors = targets.size();
  const double before = psi.squaredNorm();
  for (int pass = 0; pass < 2; ++pass) {
    for (const StateVector* v : targets) out.state -= *v * v->dot(out.state);
  }
  const double after = out.state.squaredNorm();
  out.removed_weight = before - after;
  if (!(after > 1e-20)) throw NumericalError("initial state lies inside the mass-point lifts");
  out.state /= std::sqrt(after);
  for (const StateVector* v : targets) {
    out.residual_overlap = std::max(out.residual_overlap, std::abs(v->dot(out.state)));
  }
  if (out.residual_overlap > 1e-10) {
    throw NumericalError("mass-point projection left overlap " + std::to_string(out.residual_overlap));
  }
  return out;
}

LimitMeasureResult spectral_limit_measure(const SpectralData& data, const ArcBasis& basis,
                                          const StateVector& psi0, double window) {
  struct Item {
    double phase;
    const StateVector* lift;
    Eigen::Index hs_col;  // column in hs_plus / hs_minus when lift is null
    bool hs_plus;
  };
  constexpr double two_pi = 2.0 * std::numbers::pi;
  std::vector<Item> items;
  items.reserve(data.lifts.size() + static_cast<std::size_t>(data.hs_plus.cols() + data.hs_minus.cols()));
  for (const auto& l : data.lifts) {
    double ph = std::arg(l.eigenvalue);
    if (ph < 0.0) ph += two_pi;
    if (ph >= two_pi) ph -= two_pi;
    items.push_back({ph, &l.normalized, -1, false});
  }
  for (Eigen::Index c = 0; c < data.hs_plus.cols(); ++c) items.push_back({0.0, nullptr, c, true});
  for (Eigen::Index c = 0; c < data.hs_minus.cols(); ++c) {
    items.push_back({std::numbers::pi, nullptr, c, false});
  }
  std::stable_sort(items.begin(), items.end(),
                   [](const Item& a, const Item& b) { return a.phase < b.phase; });

  // Group boundaries on the circle.
  std::vector<std::size_t> group(items.size(), 0);
  std::size_t groups = 0;
  double min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < items.size(); ++k) {
    if (k > 0) {
      const double gap = items[k].phase - items[k - 1].phase;
      if (gap >= window) {
        ++groups;
        min_gap = std::min(min_gap, gap);
      }
    }
    group[k] = groups;
  }
  ++groups;
  if (items.size() > 1 && groups > 1) {
    const double wrap = items.front().phase + two_pi - items.back().phase;
    if (wrap < window) {
      for (std::size_t k = 0; k < items.size(); ++k) {
        if (group[k] == groups - 1) group[k] = 0;
      }
      --groups;
    } else {
      min_gap = std::min(min_gap, wrap);
    }
  }

  LimitMeasureResult res;
  const std::size_t nv = basis.vertex_count();
  res.hr_part.assign(nv, 0.0);
  res.hs_part.assign(nv, 0.0);
  res.cross_part.assign(nv, 0.0);
  if (min_gap < 10.0 * window) {
    std::ostringstream os;
    os << "degenerate phase clusters: closest distinct groups are " << min_gap << " apart";
    res.warnings.push_back(os.str());
  }

  const auto dim = static_cast<Eigen::Index>(basis.size());
  std::vector<StateVector> proj_r(groups, StateVector::Zero(dim));
  std::vector<StateVector> proj_s(groups, StateVector::Zero(dim));
  std::vector<bool> has_r(groups, false), has_s(groups, false);
  for (std::size_t k = 0; k < items.size(); ++k) {
    const Item& it = items[k];
    const std::size_t g = group[k];
    if (it.lift) {
      proj_r[g] += *it.lift * it.lift->dot(psi0);
      has_r[g] = true;
    } else {
      const auto col = it.hs_plus ? data.hs_plus.col(it.hs_col) : data.hs_minus.col(it.hs_col);
      proj_s[g] += col * col.dot(psi0);
      has_s[g] = true;
    }
  }
  for (std::size_t g = 0; g < groups; ++g) {
    if (has_s[g]) {
      const auto hs = arc_mass_to_vertices(basis, proj_s[g]);
      for (std::size_t u = 0; u < nv; ++u) res.hs_part[u] += hs[u];
    }
    if (has_r[g] && !has_s[g]) {
      const auto hr = arc_mass_to_vertices(basis, proj_r[g]);
      for (std::size_t u = 0; u < nv; ++u) res.hr_part[u] += hr[u];
    }
    if (has_r[g] && has_s[g]) {
      const auto total = arc_mass_to_vertices(basis, proj_r[g] + proj_s[g]);
      const auto hs = arc_mass_to_vertices(basis, proj_s[g]);
      for (std::size_t u = 0; u < nv; ++u) res.cross_part[u] += total[u] - hs[u];
    }
  }
  res.table.method = "spectral(N=" + std::to_string(nv - 1) + ")";
  res.table.values.resize(nv);
  for (std::size_t u = 0; u < nv; ++u) {
    res.table.values[u] = res.hr_part[u] + res.hs_part[u] + res.cross_part[u];
  }
  return res;
}

LimitMeasureResult direct_limit_measure(const WalkOperators& ops, const StateVector& psi0,
                                        std::size_t T) {
  EvolutionResult ev = evolve_and_average(ops, psi0, T);
  LimitMeasureResult res;
  res.table = std::move(ev.average);
  res.max_norm_drift = ev.max_norm_drift;
  if (ev.max_norm_drift > 1e-9) {
    res.warnings.push_back("norm drift " + std::to_string(ev.max_norm_drift) + " exceeds 1e-9");
  }
  return res;
}

LowerBound lower_bound_general(const WalkOperators& ops, const StateVector& psi0, std::size_t u,
                               std::size_t v, const MeasureTable* pi, double hs_term,
                               double multiplier) {
  LowerBound b;
  b.value = hs_term;
  if (pi == nullptr || u >= pi->size() || v >= pi->size()) return b;
  const ArcBasis& basis = ops.basis();
  std::complex<double> overlap = 0.0;
  for (std::size_t k = basis.first_arc(v); k < basis.first_arc(v + 1); ++k) {
    overlap += ops.amplitude(k) * psi0[k];
  }
  b.pi_available = true;
  b.value += multiplier * std::norm(overlap) * (*pi)[u] * (*pi)[v];
  return b;
}

double homogeneous_pi(double p, double q, std::size_t j) {
  if (!(p < q)) throw PreconditionError("homogeneous closed form needs p < q");
  const double rho = p / q;
  if (j == 0) return (1.0 - rho) / 2.0;
  return (1.0 - rho) / (2.0 * q) * std::pow(rho, static_cast<double>(j - 1));
}

ClosedForm homogeneous_closed_form(double p, double q, std::size_t i, std::size_t j) {
  ClosedForm c;
  c.trapped = (j == 0 ? 2.0 : 1.0) * homogeneous_pi(p, q, j);
  c.value = c.trapped * homogeneous_pi(p, q, i);
  return c;
}

std::string SupportSet::describe() const {
  switch (kind) {
    case Kind::empty: return "empty";
    case Kind::from: return "{j >= " + std::to_string(lo) + "}";
    case Kind::interval: return "{" + std::to_string(lo) + " <= j <= " + std::to_string(hi) + "}";
  }
  return "empty";
}

SupportSet supp_h_s(const HalfLineWalk& walk, const RecurrenceReport& recurrence) {
  SupportSet s;
  const auto first = walk.first_loop();
  if (!first) return s;
  if (walk.loop_set_is_infinite()) {
    s.kind = SupportSet::Kind::from;
    s.lo = *first;
    return s;
  }
  const auto loops = walk.loop_set();
  if (recurrence.cls == RecurrenceClass::transient) {
    s.kind = SupportSet::Kind::from;
    s.lo = loops.front();
  } else if (loops.size() > 1) {
    s.kind = SupportSet::Kind::interval;
    s.lo = loops.front();
    s.hi = loops.back();
  }
  return s;
}

namespace {

struct Piece {
  std::array<double, 3> c;  // L, O, R
};

CorollaryResult assemble(const WalkOperators& ops, const StateVector& psi0,
                         const std::vector<double>& weights, const std::vector<Piece>& pieces,
                         double z, const std::string& method) {
  const ArcBasis& basis = ops.basis();
  const std::size_t nv = basis.vertex_count();
  CorollaryResult out;
  out.pi_prime.resize(weights.size());
  for (std::size_t j = 0; j < weights.size(); ++j) out.pi_prime[j] = weights[j] / z;

  out.overlap = 0.0;
  for (std::size_t j = 0; j < std::min(pieces.size(), nv); ++j) {
    const double amp = (j % 2 == 0 ? 1.0 : -1.0) * std::sqrt(out.pi_prime[j]);
    for (Direction d : {Direction::L, Direction::O, Direction::R}) {
      const double c = pieces[j].c[slot(d)];
      if (c == 0.0) continue;
      if (auto k = basis.index_of(j, d)) out.overlap += amp * c * psi0[*k];
    }
  }
  out.table.method = method;
  out.table.values.assign(nv, 0.0);
  for (std::size_t i = 0; i < std::min(nv, out.pi_prime.size()); ++i) {
    out.table.values[i] = std::norm(out.overlap) * out.pi_prime[i];
  }
  return out;
}

}  // namespace

CorollaryResult corollary2_measure(const HalfLineWalk& walk, const WalkOperators& ops,
                                   const StateVector& psi0, const SeriesOptions& options) {
  if (walk.loop_set_is_infinite() || walk.loop_set() != std::vector<std::size_t>{0}) {
    throw PreconditionError("one-loop formula needs the loop set {0}");
  }
  if (classify(walk, options).cls != RecurrenceClass::transient) {
    throw PreconditionError("one-loop formula needs a transient walk");
  }
  const double r0 = walk.r(0);
  SeriesSummary crp = sum_product_series(
      r0 / walk.p(1), [&](std::size_t j) { return walk.q(j) / walk.p(j + 1); }, options);

  const std::size_t nv = ops.vertex_count();
  std::vector<double> weights(nv);
  std::vector<Piece> pieces(nv);
  weights[0] = 1.0;
  pieces[0] = {{0.0, -std::sqrt(walk.p(0)), std::sqrt(r0)}};
  double w = r0 / walk.p(1);
  for (std::size_t j = 1; j < nv; ++j) {
    const auto s = walk.at(j);
    weights[j] = w;
    pieces[j] = {{-std::sqrt(s.p), 0.0, std::sqrt(s.q)}};
    w *= s.q / walk.p(j + 1);
  }
  // Normalized by the full series, not by the weights kept below N.
  CorollaryResult out = assemble(ops, psi0, weights, pieces, 1.0 + crp.value, "corollary_one_loop");
  out.contradiction = crp.verdict() != SeriesVerdict::converged;
  out.c_r_prime = std::move(crp);
  return out;
}

CorollaryResult corollary3_measure(const HalfLineWalk& walk, const WalkOperators& ops,
                                   const StateVector& psi0, const SeriesOptions& options) {
  if (walk.loop_set_is_infinite()) throw PreconditionError("two-loop formula needs a finite loop set");
  const auto loops = walk.loop_set();
  if (loops.size() != 2 || loops[0] != 0) {
    throw PreconditionError("two-loop formula needs the loop set {0, n} with n > 0");
  }
  if (classify(walk, options).cls == RecurrenceClass::transient) {
    throw PreconditionError("two-loop formula needs a recurrent walk");
  }
  const std::size_t n = loops[1];
  if (n >= ops.vertex_count()) throw PreconditionError("truncation does not reach the second loop");
  const double r0 = walk.r(0);

  std::vector<double> weights(n + 1);
  std::vector<Piece> pieces(n + 1);
  weights[0] = 1.0;
  pieces[0] = {{0.0, -std::sqrt(walk.p(0)), std::sqrt(r0)}};
  double w = r0;  // r_0 q_1...q_{j-1} / (p_1...p_{j-1})
  for (std::size_t j = 1; j < n; ++j) {
    const auto s = walk.at(j);
    weights[j] = w / s.p;
    pieces[j] = {{-std::sqrt(s.p), 0.0, std::sqrt(s.q)}};
    w *= s.q / s.p;
  }
  const auto sn = walk.at(n);
  weights[n] = w / sn.r * (1.0 - sn.p);
  const double unit = std::sqrt(1.0 - sn.p);
  pieces[n] = {{-std::sqrt(sn.r) / unit, std::sqrt(sn.q) / unit, 0.0}};

  CompensatedSum acc;
  SeriesSummary crp;
  for (std::size_t j = 1; j <= n; ++j) {
    acc.add(weights[j]);
    crp.checkpoints.emplace_back(j, acc.value());
  }
  CorollaryResult out = assemble(ops, psi0, weights, pieces, 1.0 + acc.value(), "corollary_two_loops");
  out.c_r_prime = std::move(crp);
  out.c_r_prime.terms = n;
  out.c_r_prime.value = acc.value();
  out.c_r_prime.last_term = weights[n];
  out.c_r_prime.literal = SeriesVerdict::converged;
  return out;
}

EtaNormReport eta_norm_terminal(const HalfLineWalk& walk, std::size_t last_loop,
                                const SeriesOptions& options) {
  if (walk.loop_set_is_infinite()) throw PreconditionError("terminal vector needs a finite loop set");
  const auto loops = walk.loop_set();
  if (loops.empty() || loops.back() != last_loop) {
    throw PreconditionError("site " + std::to_string(last_loop) + " is not the rightmost loop");
  }
  const std::size_t jn = last_loop;
  // log Q_l^2 = sum_{i<l} log q_i - sum_{i<=l} log p_i (i from 1).
  auto log_q2 = [&](std::size_t l) {
    double s = 0.0;
    for (std::size_t i = 1; i < l; ++i) s += std::log(walk.q(i));
    for (std::size_t i = 1; i <= l; ++i) s -= std::log(walk.p(i));
    return s;
  };
  const auto s = walk.at(jn);
  const double qt = jn == 0 ? 1.0 : s.q;
  const double q2_jn = jn == 0 ? 1.0 : std::exp(log_q2(jn));

  EtaNormReport rep;
  rep.last_loop = jn;
  rep.first_site = qt * (1.0 - s.q) / s.r * q2_jn;
  const double first_term = std::exp(log_q2(jn + 1));
  rep.norm2 = sum_product_series(
      first_term, [&](std::size_t j) { return walk.q(jn + j) / walk.p(jn + j + 1); }, options,
      rep.first_site);

  // Independent evaluation of both sides for K = j_n + 1 ... j_n + terms.
  double log_r = 0.0;  // log R_{j_n}
  for (std::size_t i = 1; i <= jn; ++i) log_r += std::log(walk.q(i)) - std::log(walk.p(i));
  const double boundary = jn == 0 ? (1.0 - walk.q(1)) / walk.p(1) : std::exp(log_r);
  double r_l = std::exp(log_r);
  double q2 = first_term;
  CompensatedSum lhs, rsum;
  for (std::size_t t = 1; t <= rep.norm2.terms; ++t) {
    const std::size_t l = jn + t;
    if (t > 1) q2 *= walk.q(l - 1) / walk.p(l);
    r_l *= walk.q(l) / walk.p(l);
    lhs.add(q2);
    rsum.add(r_l);
    const double L = lhs.value();
    const double R = 2.0 * rsum.value() + boundary - r_l;
    const double err = std::fabs(L - R) / std::fabs(L);
    if (err > rep.identity_max_rel_error || t == 1) {
      rep.identity_max_rel_error = err;
      rep.identity_worst_K = l;
    }
    std::size_t c = t;
    while (c >= 10 && c % 10 == 0) c /= 10;
    if (c == 1 || c == 2 || c == 5 || t == rep.norm2.terms) {
      rep.identity_checkpoints.push_back({static_cast<double>(l), L, R});
    }
  }
  return rep;
}

}  // namespace qwalk
