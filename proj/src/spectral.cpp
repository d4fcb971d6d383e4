#include "qwalk/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "qwalk/errors.hpp"

namespace qwalk {

namespace {

JacobiEigenpairs finish_pairs(const Eigen::VectorXd& values, const Eigen::MatrixXd& vectors,
                              double tol) {
  JacobiEigenpairs out;
  out.values = values;
  out.vectors = vectors;
  out.tol = tol;
  for (Eigen::Index k = 0; k < values.size(); ++k) {
    const double x = values[k];
    if (x < -1.0 - tol || x > 1.0 + tol) {
      std::ostringstream os;
      os.precision(17);
      os << "Jacobi eigenvalue " << x << " lies outside [-1, 1]; the walk is malformed";
      throw NumericalError(os.str());
    }
    if (std::fabs(x - 1.0) < tol) ++out.m_plus;
    if (std::fabs(x + 1.0) < tol) ++out.m_minus;
    auto col = out.vectors.col(k);
    for (Eigen::Index i = 0; i < col.size(); ++i) {
      if (std::fabs(col[i]) > 1e-12) {
        if (col[i] < 0.0) col = -col;
        break;
      }
    }
  }
  return out;
}

double sup_norm(const StateVector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

}  // namespace

JacobiEigenpairs eigensolve(const SymTridiagonal& J, double tol) {
  if (J.size() == 1) {
    return finish_pairs(J.diagonal, Eigen::MatrixXd::Identity(1, 1), tol);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(J.diagonal, J.off_diagonal, Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success) throw NumericalError("tridiagonal eigensolve did not converge");
  return finish_pairs(es.eigenvalues(), es.eigenvectors(), tol);
}

JacobiEigenpairs eigensolve_dense(const Eigen::MatrixXd& J, double tol) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  if (es.info() != Eigen::Success) throw NumericalError("dense eigensolve did not converge");
  return finish_pairs(es.eigenvalues(), es.eigenvectors(), tol);
}

JacobiEigenpairs eigenpairs_near(const SymTridiagonal& J, const std::vector<double>& lambdas, double tol) {
  const auto n = static_cast<Eigen::Index>(J.size());
  Eigen::VectorXd values(static_cast<Eigen::Index>(lambdas.size()));
  Eigen::MatrixXd vectors(n, values.size());
  for (Eigen::Index k = 0; k < values.size(); ++k) {
    // The shift stays off the eigenvalue so that J - sigma is factorizable even at lambda = 1.
    const double sigma = lambdas[static_cast<std::size_t>(k)] + 1e-10;
    std::vector<Eigen::Triplet<double>> t;
    for (Eigen::Index i = 0; i < n; ++i) {
      t.emplace_back(i, i, J.diagonal[i] - sigma);
      if (i + 1 < n) {
        t.emplace_back(i, i + 1, J.off_diagonal[i]);
        t.emplace_back(i + 1, i, J.off_diagonal[i]);
      }
    }
    Eigen::SparseMatrix<double> M(n, n);
    M.setFromTriplets(t.begin(), t.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(M);
    if (lu.info() != Eigen::Success) throw NumericalError("shifted Jacobi factorization failed");
    Eigen::VectorXd x = Eigen::VectorXd::Ones(n).normalized();
    for (int it = 0; it < 4; ++it) x = lu.solve(x).normalized();
    const Eigen::VectorXd Jx = J.apply(x);
    values[k] = x.dot(Jx);
    if ((Jx - values[k] * x).cwiseAbs().maxCoeff() > 1e-9) {
      throw NumericalError("inverse iteration did not converge near " + std::to_string(lambdas[static_cast<std::size_t>(k)]));
    }
    vectors.col(k) = x;
  }
  return finish_pairs(values, vectors, tol);
}

std::string_view to_string(Branch b) {
  switch (b) {
    case Branch::plus: return "+";
    case Branch::minus: return "-";
    case Branch::single: return "0";
  }
  return "0";
}

std::vector<LiftedEigenvector> lift(const JacobiEigenpairs& pairs, const WalkOperators& ops,
                                    double max_residual) {
  if (pairs.vectors.rows() != static_cast<Eigen::Index>(ops.vertex_count())) {
    throw PreconditionError("eigenpairs do not match the truncation");
  }
  std::vector<LiftedEigenvector> out;
  out.reserve(2 * pairs.size());
  auto finish = [&](LiftedEigenvector& l) {
    l.norm2 = l.vector.squaredNorm();
    l.normalized = l.vector / std::sqrt(l.norm2);
    l.residual = sup_norm(ops.apply_U(l.vector) - l.eigenvalue * l.vector);
    l.normalized_residual = sup_norm(ops.apply_U(l.normalized) - l.eigenvalue * l.normalized);
    if (!(l.normalized_residual <= max_residual)) {
      std::ostringstream os;
      os.precision(17);
      os << "lift failed at lambda=" << l.lambda << " branch " << to_string(l.branch)
         << ": residual " << l.normalized_residual;
      throw NumericalError(os.str());
    }
    out.push_back(std::move(l));
  };

  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const double x = pairs.values[static_cast<Eigen::Index>(k)];
    const StateVector ap =
        ops.embed_A(pairs.vectors.col(static_cast<Eigen::Index>(k)).cast<std::complex<double>>());
    const bool at_plus = std::fabs(x - 1.0) < pairs.tol;
    const bool at_minus = std::fabs(x + 1.0) < pairs.tol;
    if (at_plus || at_minus) {
      LiftedEigenvector l;
      l.lambda = x;
      l.branch = Branch::single;
      l.theta = at_plus ? 0.0 : std::numbers::pi;
      l.eigenvalue = at_plus ? 1.0 : -1.0;
      l.vector = ap;
      l.pair_index = k;
      finish(l);
      continue;
    }
    const double theta = std::acos(std::clamp(x, -1.0, 1.0));
    const StateVector sap = ops.apply_shift(ap);
    for (Branch b : {Branch::plus, Branch::minus}) {
      LiftedEigenvector l;
      l.lambda = x;
      l.branch = b;
      l.theta = theta;
      l.eigenvalue = std::polar(1.0, b == Branch::plus ? theta : -theta);
      l.vector = ap - l.eigenvalue * sap;
      l.pair_index = k;
      finish(l);
    }
  }
  return out;
}

namespace {

// G_l = Q_l^2 p_l = q_1...q_{l-1} / (p_1...p_{l-1}) for l >= 1, G_0 = p_0.
class LogG {
 public:
  explicit LogG(std::function<SiteProbabilities(std::size_t)> site) : site_(std::move(site)) {}

  double operator()(std::size_t l) {
    if (l == 0) return std::log(site_(0).p);
    while (computed_ < l) {
      const auto s = site_(computed_);
      log_g_ += std::log(s.q) - std::log(s.p);
      ++computed_;
    }
    if (l < computed_) throw std::logic_error("LogG must be queried in ascending order");
    return log_g_;
  }

 private:
  std::function<SiteProbabilities(std::size_t)> site_;
  std::size_t computed_ = 1;
  double log_g_ = 0.0;
};

double sign_of(std::size_t l) { return l % 2 == 0 ? 1.0 : -1.0; }

void set_arc(const ArcBasis& basis, StateVector& v, std::size_t vertex, Direction d, double value) {
  if (auto k = basis.index_of(vertex, d)) v[*k] = value;
}

// Components of eta on sites [from, to] with a loop at `from`; when `right_loop`
// the last site carries the loop-closing piece.
StateVector build_eta(const ArcBasis& basis, const std::function<SiteProbabilities(std::size_t)>& site,
                      std::size_t from, std::size_t to, bool right_loop) {
  StateVector v = StateVector::Zero(static_cast<Eigen::Index>(basis.size()));
  LogG log_g(site);
  {
    const auto s = site(from);
    const double qt = from == 0 ? 1.0 : s.q;
    const double g = std::exp(log_g(from));
    const double sg = sign_of(from);
    set_arc(basis, v, from, Direction::O, -sg * std::sqrt(g * qt / s.r));
    set_arc(basis, v, from, Direction::R, sg * std::sqrt(g * qt / s.p));
  }
  const std::size_t interior_end = right_loop ? to : to + 1;
  for (std::size_t l = from + 1; l < interior_end; ++l) {
    const auto s = site(l);
    const double g = std::exp(log_g(l));
    const double sg = sign_of(l);
    set_arc(basis, v, l, Direction::L, -sg * std::sqrt(g));
    if (s.p > 0.0) set_arc(basis, v, l, Direction::R, sg * std::sqrt(g * s.q / s.p));
  }
  if (right_loop) {
    const auto s = site(to);
    const double g = std::exp(log_g(to));
    const double sg = sign_of(to);
    set_arc(basis, v, to, Direction::L, -sg * std::sqrt(g));
    set_arc(basis, v, to, Direction::O, sg * std::sqrt(g * s.q / s.r));
  }
  return v;
}

SignedReflectedVector finish_eta(StateVector v, std::size_t left, std::optional<std::size_t> right) {
  SignedReflectedVector e;
  e.left_loop = left;
  e.right_loop = right;
  e.norm2 = v.squaredNorm();
  e.normalized = v / std::sqrt(e.norm2);
  e.vector = std::move(v);
  e.terminal = !right.has_value();
  return e;
}

}  // namespace

SignedReflectedBasis signed_reflected_core(const WalkOperators& ops) {
  SignedReflectedBasis out;
  out.loops = ops.chain().loops();
  const auto& sites = ops.chain().sites;
  auto site = [&sites](std::size_t j) { return sites[j]; };
  for (std::size_t k = 0; k + 1 < out.loops.size(); ++k) {
    const std::size_t a = out.loops[k];
    const std::size_t b = out.loops[k + 1];
    out.vectors.push_back(finish_eta(build_eta(ops.basis(), site, a, b, true), a, b));
  }
  return out;
}

SignedReflectedBasis signed_reflected_basis(const HalfLineWalk& walk, std::size_t N,
                                            std::optional<RecurrenceClass> cls) {
  const WalkOperators ops(truncate(walk, N));
  SignedReflectedBasis out = signed_reflected_core(ops);
  if (out.loops.empty()) throw PreconditionError("signed reflected vectors need a self loop");
  if (walk.loop_set_is_infinite()) return out;
  const std::vector<std::size_t> all = walk.loop_set();
  const std::size_t jn = all.back();
  if (jn >= N) return out;
  if (!cls) cls = classify(walk).cls;
  auto site = [&walk](std::size_t j) { return walk.at(j); };
  auto e = finish_eta(build_eta(ops.basis(), site, jn, N, false), jn, std::nullopt);
  e.square_summable = *cls == RecurrenceClass::transient;
  out.vectors.push_back(std::move(e));
  return out;
}

HSBasis h_s_brute_force(const DenseWalk& walk, double rank_tol) {
  const Eigen::Index n = walk.A.rows();
  Eigen::MatrixXd K(n, 2 * walk.A.cols());
  K << walk.A, walk.B();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K * K.transpose());
  std::vector<Eigen::Index> null_cols;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (es.eigenvalues()[k] < rank_tol) null_cols.push_back(k);
  }
  HSBasis out;
  out.range_rank = static_cast<std::size_t>(n) - null_cols.size();
  const auto d = static_cast<Eigen::Index>(null_cols.size());
  out.plus.resize(n, 0);
  out.minus.resize(n, 0);
  if (d == 0) return out;
  Eigen::MatrixXd Nb(n, d);
  for (Eigen::Index c = 0; c < d; ++c) Nb.col(c) = es.eigenvectors().col(null_cols[c]);

  // On H^(S), C = -I so U = -S.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ss(Nb.transpose() * walk.S * Nb);
  std::vector<Eigen::Index> neg, pos;
  for (Eigen::Index k = 0; k < d; ++k) (ss.eigenvalues()[k] < 0.0 ? neg : pos).push_back(k);
  out.plus.resize(n, static_cast<Eigen::Index>(neg.size()));
  out.minus.resize(n, static_cast<Eigen::Index>(pos.size()));
  for (std::size_t c = 0; c < neg.size(); ++c) out.plus.col(c) = Nb * ss.eigenvectors().col(neg[c]);
  for (std::size_t c = 0; c < pos.size(); ++c) out.minus.col(c) = Nb * ss.eigenvectors().col(pos[c]);
  return out;
}

namespace {

/// An eigenvalue of J at exactly +-1 with loops present leaves span{a_u, b_u}
/// short of 2|V| - m(1) - m(-1); the missing H^(S) directions are whatever is
/// orthogonal to every lift and core vector, split by the sign of S.
void complete_h_s(SpectralData& out, const WalkOperators& ops, long missing) {
  const auto n = static_cast<Eigen::Index>(ops.dimension());
  const auto known = static_cast<Eigen::Index>(out.lifts.size()) + out.hs_minus.cols();
  Eigen::MatrixXcd M(n, known);
  Eigen::Index c = 0;
  for (const auto& l : out.lifts) M.col(c++) = l.normalized;
  for (Eigen::Index j = 0; j < out.hs_minus.cols(); ++j) M.col(c++) = out.hs_minus.col(j);
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(M);
  const Eigen::MatrixXcd Q = qr.householderQ();
  const Eigen::MatrixXcd extra = Q.rightCols(missing);
  // S restricted to the complement is diagonalizable with eigenvalues +-1.
  Eigen::MatrixXcd SE(n, missing);
  for (Eigen::Index j = 0; j < missing; ++j) SE.col(j) = ops.apply_shift(extra.col(j));
  const Eigen::MatrixXcd small = extra.adjoint() * SE;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (small + small.adjoint()));
  for (Eigen::Index j = 0; j < missing; ++j) {
    const Eigen::VectorXcd v = extra * es.eigenvectors().col(j);
    // C v = -v on H^(S), so U v = -S v.
    Eigen::MatrixXcd& target = es.eigenvalues()[j] < 0.0 ? out.hs_plus : out.hs_minus;
    target.conservativeResize(n, target.cols() + 1);
    target.col(target.cols() - 1) = v;
  }
}

}  // namespace

SpectralData decompose(const WalkOperators& ops, HSMethod method) {
  SpectralData out;
  out.method = method;
  out.pairs = eigensolve(jacobi_matrix(ops.chain()));
  out.lifts = lift(out.pairs, ops);
  const auto n = static_cast<Eigen::Index>(ops.dimension());
  if (method == HSMethod::brute_force) {
    const HSBasis hs = h_s_brute_force(to_dense(ops));
    out.hs_plus = hs.plus.cast<std::complex<double>>();
    out.hs_minus = hs.minus.cast<std::complex<double>>();
  } else {
    const SignedReflectedBasis core = signed_reflected_core(ops);
    const auto k = static_cast<Eigen::Index>(core.vectors.size());
    out.hs_plus.resize(n, 0);
    out.hs_minus.resize(n, k);
    if (k > 0) {
      Eigen::MatrixXcd M(n, k);
      for (Eigen::Index c = 0; c < k; ++c) M.col(c) = core.vectors[c].vector;
      Eigen::HouseholderQR<Eigen::MatrixXcd> qr(M);
      out.hs_minus = qr.householderQ() * Eigen::MatrixXcd::Identity(n, k);
    }
    const long missing = static_cast<long>(n) - static_cast<long>(out.lifts.size()) - static_cast<long>(k);
    if (missing > 0) complete_h_s(out, ops, missing);
  }
  out.completeness_defect = static_cast<long>(n) - static_cast<long>(out.lifts.size()) -
                            static_cast<long>(out.hs_plus.cols() + out.hs_minus.cols());
  return out;
}

std::vector<MassPoint> mass_points(const HalfLineWalk& walk, const std::vector<std::size_t>& N_list,
                                   const MassPointOptions& options) {
  if (N_list.size() < 2) throw PreconditionError("mass_points needs at least two truncation sizes");
  std::vector<std::size_t> sizes = N_list;
  std::sort(sizes.begin(), sizes.end());

  std::vector<JacobiEigenpairs> solved;
  for (std::size_t N : sizes) solved.push_back(eigensolve(jacobi_matrix(walk, N)));

  auto tail_mass = [&](const JacobiEigenpairs& p, Eigen::Index k) {
    const Eigen::Index n = p.vectors.rows();
    const auto start = static_cast<Eigen::Index>(
        std::ceil((1.0 - options.tail_fraction) * static_cast<double>(n)));
    return p.vectors.col(k).tail(n - std::min(start, n)).squaredNorm();
  };

  std::vector<MassPoint> out;
  const JacobiEigenpairs& base = solved.front();
  for (Eigen::Index k = 0; k < base.values.size(); ++k) {
    MassPoint mp;
    mp.lambda = base.values[k];
    mp.max_tail_mass = tail_mass(base, k);
    double previous_tail = mp.max_tail_mass;
    bool decaying = true;
    for (std::size_t s = 1; s < solved.size(); ++s) {
      const auto& v = solved[s].values;
      const auto* it = std::lower_bound(v.data(), v.data() + v.size(), mp.lambda);
      Eigen::Index best = it - v.data();
      if (best == v.size() || (best > 0 && mp.lambda - v[best - 1] < v[best] - mp.lambda)) --best;
      mp.max_drift = std::max(mp.max_drift, std::fabs(v[best] - mp.lambda));
      const double tail = tail_mass(solved[s], best);
      decaying = decaying && tail < options.tail_decay * previous_tail && tail < options.slow_tail_tol;
      previous_tail = tail;
      mp.max_tail_mass = std::max(mp.max_tail_mass, tail);
    }
    const bool localized = mp.max_tail_mass < options.tail_tol || decaying;
    if (localized && mp.max_drift < options.stability) out.push_back(mp);
  }
  return out;
}

bool is_mass_point(double lambda, const std::vector<MassPoint>& points, double stability) {
  return std::any_of(points.begin(), points.end(),
                     [&](const MassPoint& m) { return std::fabs(m.lambda - lambda) < stability; });
}

}  // namespace qwalk
