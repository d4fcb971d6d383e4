#include "qwalk/arc_space.hpp"

#include <algorithm>
#include <cmath>

#include "qwalk/errors.hpp"

namespace qwalk {

std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::L: return "L";
    case Direction::O: return "O";
    case Direction::R: return "R";
  }
  return "L";
}

std::optional<Direction> parse_direction(std::string_view text) {
  if (text == "L") return Direction::L;
  if (text == "O") return Direction::O;
  if (text == "R") return Direction::R;
  return std::nullopt;
}

ArcBasis ArcBasis::from_chain(const TruncatedChain& chain) {
  ArcBasis b;
  const std::size_t n = chain.vertex_count();
  b.first_.reserve(n + 1);
  for (std::size_t j = 0; j < n; ++j) {
    b.first_.push_back(b.arcs_.size());
    if (j > 0) b.arcs_.push_back({j, Direction::L});
    if (chain.sites[j].r > 0.0) {
      b.arcs_.push_back({j, Direction::O});
      ++b.loops_;
    }
    if (j + 1 < n) b.arcs_.push_back({j, Direction::R});
  }
  b.first_.push_back(b.arcs_.size());

  b.reverse_.resize(b.arcs_.size());
  for (std::size_t k = 0; k < b.arcs_.size(); ++k) {
    const Arc& a = b.arcs_[k];
    switch (a.dir) {
      case Direction::O: b.reverse_[k] = k; break;
      case Direction::R: b.reverse_[k] = *b.index_of(a.vertex + 1, Direction::L); break;
      case Direction::L: b.reverse_[k] = *b.index_of(a.vertex - 1, Direction::R); break;
    }
  }
  return b;
}

std::optional<std::size_t> ArcBasis::index_of(std::size_t vertex, Direction d) const {
  if (vertex >= vertex_count()) return std::nullopt;
  for (std::size_t k = first_[vertex]; k < first_[vertex + 1]; ++k) {
    if (arcs_[k].dir == d) return k;
  }
  return std::nullopt;
}

WalkOperators::WalkOperators(TruncatedChain chain)
    : chain_(std::move(chain)), basis_(ArcBasis::from_chain(chain_)) {
  amp_.resize(basis_.size());
  for (std::size_t k = 0; k < basis_.size(); ++k) {
    const Arc& a = basis_.arc(k);
    const auto& s = chain_.sites[a.vertex];
    const double prob = a.dir == Direction::L ? s.q : a.dir == Direction::O ? s.r : s.p;
    amp_[k] = std::sqrt(prob);
  }
}

StateVector WalkOperators::incidence_vector(std::size_t u) const {
  StateVector v = StateVector::Zero(static_cast<Eigen::Index>(dimension()));
  for (std::size_t k = basis_.first_arc(u); k < basis_.first_arc(u + 1); ++k) v[k] = amp_[k];
  return v;
}

StateVector WalkOperators::swapped_incidence_vector(std::size_t u) const {
  return apply_shift(incidence_vector(u));
}

StateVector WalkOperators::apply_shift(const StateVector& psi) const {
  StateVector out(psi.size());
  for (std::size_t k = 0; k < dimension(); ++k) out[basis_.reverse(k)] = psi[k];
  return out;
}

Eigen::VectorXcd WalkOperators::project_A(const StateVector& psi) const {
  Eigen::VectorXcd x(static_cast<Eigen::Index>(vertex_count()));
  for (std::size_t u = 0; u < vertex_count(); ++u) {
    std::complex<double> s = 0.0;
    for (std::size_t k = basis_.first_arc(u); k < basis_.first_arc(u + 1); ++k) s += amp_[k] * psi[k];
    x[u] = s;
  }
  return x;
}

StateVector WalkOperators::embed_A(const Eigen::VectorXcd& x) const {
  StateVector out(static_cast<Eigen::Index>(dimension()));
  for (std::size_t k = 0; k < dimension(); ++k) out[k] = amp_[k] * x[basis_.arc(k).vertex];
  return out;
}

StateVector WalkOperators::apply_coin(const StateVector& psi) const {
  return 2.0 * embed_A(project_A(psi)) - psi;
}

void WalkOperators::step(const StateVector& psi, StateVector& out) const {
  for (std::size_t u = 0; u < vertex_count(); ++u) {
    const std::size_t lo = basis_.first_arc(u);
    const std::size_t hi = basis_.first_arc(u + 1);
    std::complex<double> s = 0.0;
    for (std::size_t k = lo; k < hi; ++k) s += amp_[k] * psi[k];
    s *= 2.0;
    for (std::size_t k = lo; k < hi; ++k) out[basis_.reverse(k)] = amp_[k] * s - psi[k];
  }
}

StateVector WalkOperators::apply_U(const StateVector& psi) const {
  StateVector out(psi.size());
  step(psi, out);
  return out;
}

StateVector WalkOperators::apply_ref_B(const StateVector& psi) const {
  return apply_shift(apply_coin(apply_shift(psi)));
}

Eigen::MatrixXd WalkOperators::dense_A() const {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dimension()),
                                            static_cast<Eigen::Index>(vertex_count()));
  for (std::size_t k = 0; k < dimension(); ++k) a(k, basis_.arc(k).vertex) = amp_[k];
  return a;
}

Eigen::MatrixXd WalkOperators::dense_S() const {
  const auto n = static_cast<Eigen::Index>(dimension());
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t k = 0; k < dimension(); ++k) s(basis_.reverse(k), k) = 1.0;
  return s;
}

Eigen::MatrixXd WalkOperators::dense_B() const { return dense_S() * dense_A(); }

Eigen::MatrixXd WalkOperators::dense_U() const { return to_dense(*this).U(); }

Eigen::MatrixXd DenseWalk::U() const {
  const Eigen::Index n = A.rows();
  return S * (2.0 * A * A.transpose() - Eigen::MatrixXd::Identity(n, n));
}

DenseWalk to_dense(const WalkOperators& ops) {
  DenseWalk d;
  d.A = ops.dense_A();
  d.S = ops.dense_S();
  d.vertex_count = ops.vertex_count();
  d.edge_count = ops.basis().edge_count();
  d.loop_count = ops.basis().loop_count();
  return d;
}

MeasureTable position_distribution(const ArcBasis& basis, const StateVector& psi) {
  MeasureTable out;
  out.method = "position";
  out.values.assign(basis.vertex_count(), 0.0);
  for (std::size_t k = 0; k < basis.size(); ++k) out.values[basis.arc(k).vertex] += std::norm(psi[k]);
  return out;
}

EvolutionResult evolve_and_average(const WalkOperators& ops, const StateVector& psi0,
                                   std::size_t T) {
  if (T < 1) throw PreconditionError("horizon T must be at least 1");
  if (static_cast<std::size_t>(psi0.size()) != ops.dimension()) {
    throw PreconditionError("initial state has the wrong dimension");
  }
  if (std::fabs(psi0.norm() - 1.0) > 1e-12) throw PreconditionError("initial state is not unit");

  const ArcBasis& basis = ops.basis();
  const std::size_t nv = basis.vertex_count();
  std::vector<double> acc(nv, 0.0);
  StateVector psi = psi0;
  StateVector next(psi0.size());
  EvolutionResult res;
  res.horizon = T;
  for (std::size_t t = 0; t < T; ++t) {
    double total = 0.0;
    for (std::size_t u = 0; u < nv; ++u) {
      double m = 0.0;
      for (std::size_t k = basis.first_arc(u); k < basis.first_arc(u + 1); ++k) m += std::norm(psi[k]);
      acc[u] += m;
      total += m;
    }
    res.max_norm_drift = std::max(res.max_norm_drift, std::fabs(std::sqrt(total) - 1.0));
    if (t + 1 < T) {
      ops.step(psi, next);
      psi.swap(next);
    }
  }
  res.average.method = "direct_cesaro(T=" + std::to_string(T) +
                       ",N=" + std::to_string(nv - 1) + ")";
  res.average.values.resize(nv);
  for (std::size_t u = 0; u < nv; ++u) res.average.values[u] = acc[u] / static_cast<double>(T);
  return res;
}

}  // namespace qwalk
