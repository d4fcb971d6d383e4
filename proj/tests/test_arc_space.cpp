#include <doctest.h>

#include <cmath>
#include <random>

#include "graph_oracle.hpp"
#include "qwalk/arc_space.hpp"
#include "qwalk/errors.hpp"
#include "qwalk/spectral.hpp"

using namespace qwalk;

namespace {

HalfLineWalk homogeneous(double p, double q) {
  const double params[] = {p, q};
  return make_family("homogeneous", params);
}

StateVector random_state(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> g;
  StateVector v(static_cast<Eigen::Index>(n));
  for (auto& x : v) x = {g(rng), g(rng)};
  return v / v.norm();
}

double sup(const StateVector& v) { return v.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("canonical arc enumeration") {
  auto path = ArcBasis::from_chain(truncate(homogeneous(0.5, 0.5), 2));
  REQUIRE(path.size() == 4);
  CHECK(path.arc(0) == Arc{0, Direction::R});
  CHECK(path.arc(1) == Arc{1, Direction::L});
  CHECK(path.arc(2) == Arc{1, Direction::R});
  CHECK(path.arc(3) == Arc{2, Direction::L});
  CHECK(path.size() == 2 * path.edge_count() - path.loop_count());

  auto w0 = add_self_loop(homogeneous(0.5, 0.5), 0, 0.5, TakeFrom::right);
  auto one = ArcBasis::from_chain(truncate(w0, 2));
  CHECK(one.size() == 5);
  CHECK(one.arc(0) == Arc{0, Direction::O});

  const double all[] = {0.4, 0.35, 0.25};
  auto looped = make_family("homogeneous", all);
  auto three = ArcBasis::from_chain(truncate(looped, 2));
  CHECK(three.size() == 7);
  CHECK(three.edge_count() == 5);
  CHECK(three.loop_count() == 3);
}

TEST_CASE("incidence vectors and shift") {
  auto w = add_self_loop(make_family("example_a"), 3, 0.2, TakeFrom::proportional);
  WalkOperators ops(truncate(w, 8));
  const auto& b = ops.basis();
  auto a2 = ops.incidence_vector(2);
  CHECK(a2[*b.index_of(2, Direction::L)].real() == doctest::Approx(std::sqrt(w.q(2))));
  CHECK(a2[*b.index_of(2, Direction::R)].real() == doctest::Approx(std::sqrt(w.p(2))));
  CHECK((a2.array() != 0.0).count() == 2);
  auto a0 = ops.incidence_vector(0);
  CHECK(a0[*b.index_of(0, Direction::R)] == 1.0);
  for (std::size_t u = 0; u <= 8; ++u) {
    for (std::size_t v = 0; v <= 8; ++v) {
      const auto ip = ops.incidence_vector(u).dot(ops.incidence_vector(v));
      CHECK(std::abs(ip - (u == v ? 1.0 : 0.0)) < 1e-14);
    }
  }

  StateVector e = StateVector::Zero(ops.dimension());
  e[*b.index_of(4, Direction::R)] = 1.0;
  CHECK(ops.apply_shift(e)[*b.index_of(5, Direction::L)] == 1.0);
  StateVector o = StateVector::Zero(ops.dimension());
  o[*b.index_of(3, Direction::O)] = 1.0;
  CHECK(ops.apply_shift(o) == o);
}

TEST_CASE("operator algebra on random chains") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t N = 2 + rng() % 49;
    WalkOperators ops(oracle::random_chain(rng, N, 0.3));
    const auto psi = random_state(rng, ops.dimension());
    CHECK(ops.apply_shift(ops.apply_shift(psi)) == psi);
    CHECK(sup(ops.apply_coin(ops.apply_coin(psi)) - psi) < 1e-12);
    CHECK(std::fabs(ops.apply_U(psi).norm() - 1.0) < 1e-12);
    CHECK(sup(ops.apply_U(ops.apply_U(psi)) - ops.apply_ref_B(ops.apply_ref_A(psi))) < 1e-12);
    for (std::size_t u = 0; u <= N; ++u) {
      CHECK(sup(ops.apply_coin(ops.incidence_vector(u)) - ops.incidence_vector(u)) < 1e-13);
      CHECK(sup(ops.apply_U(ops.incidence_vector(u)) - ops.swapped_incidence_vector(u)) < 1e-13);
    }
    const Eigen::MatrixXd A = ops.dense_A(), B = ops.dense_B();
    const auto I = Eigen::MatrixXd::Identity(A.cols(), A.cols());
    CHECK((A.transpose() * A - I).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((B.transpose() * B - I).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((A.transpose() * B - jacobi_matrix(ops.chain()).dense()).cwiseAbs().maxCoeff() < 1e-12);

    // Independent arc-by-arc assembly gives the same U.
    const auto g = oracle::from_conductances(oracle::chain_conductances(ops.chain()));
    REQUIRE(g.A.rows() == static_cast<Eigen::Index>(ops.dimension()));
    CHECK((g.U() - ops.dense_U()).cwiseAbs().maxCoeff() < 1e-12);
    const Eigen::MatrixXcd Ud = g.U().cast<std::complex<double>>();
    CHECK(sup(Ud * psi - ops.apply_U(psi)) < 1e-12);
  }
}

TEST_CASE("coin negates vectors orthogonal to every a_u") {
  auto w = add_self_loop(add_self_loop(homogeneous(0.5, 0.5), 0, 0.5, TakeFrom::right), 3, 0.5,
                         TakeFrom::proportional);
  WalkOperators ops(truncate(w, 10));
  auto hs = h_s_brute_force(to_dense(ops));
  REQUIRE(hs.minus.cols() == 1);
  const StateVector eta = hs.minus.col(0).cast<std::complex<double>>();
  CHECK(sup(ops.apply_coin(eta) + eta) < 1e-12);
}

TEST_CASE("path graphs have no H^(S)") {
  for (std::size_t N : {2u, 5u, 17u}) {
    WalkOperators ops(truncate(make_family("example_c"), N));
    CHECK(h_s_brute_force(to_dense(ops)).dimension() == 0);
  }
}

TEST_CASE("position distribution") {
  WalkOperators ops(truncate(homogeneous(0.3, 0.7), 6));
  const auto& b = ops.basis();
  StateVector e = StateVector::Zero(ops.dimension());
  e[*b.index_of(3, Direction::R)] = 1.0;
  auto d = position_distribution(b, e);
  CHECK(d[3] == 1.0);
  CHECK(d.total() == 1.0);

  StateVector two = StateVector::Zero(ops.dimension());
  two[*b.index_of(2, Direction::L)] = two[*b.index_of(2, Direction::R)] = 1.0 / std::sqrt(2.0);
  CHECK(position_distribution(b, two)[2] == doctest::Approx(1.0));

  std::mt19937_64 rng(3);
  CHECK(position_distribution(b, random_state(rng, b.size())).total() ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("Cesaro averages") {
  std::mt19937_64 rng(11);
  WalkOperators ops(oracle::random_chain(rng, 30, 0.3));
  const auto psi = random_state(rng, ops.dimension());
  auto one = evolve_and_average(ops, psi, 1);
  CHECK(one.average.values == position_distribution(ops.basis(), psi).values);

  auto avg = evolve_and_average(ops, psi, 5000);
  CHECK(std::fabs(avg.average.total() - 1.0) < 1e-10);
  CHECK(avg.max_norm_drift < 1e-9);
  for (double x : avg.average.values) {
    CHECK(x >= 0.0);
    CHECK(x <= 1.0);
  }
  CHECK_THROWS_AS(evolve_and_average(ops, psi * 2.0, 5), PreconditionError);
  CHECK_THROWS_AS(evolve_and_average(ops, psi, 0), PreconditionError);
}
