#include <doctest.h>

#include <cmath>
#include <random>

#include "qwalk/errors.hpp"
#include "qwalk/measures.hpp"

using namespace qwalk;

namespace {

HalfLineWalk homogeneous(double p, double q) {
  const double params[] = {p, q};
  return make_family("homogeneous", params);
}

HalfLineWalk one_loop(const HalfLineWalk& base) { return add_self_loop(base, 0, 0.5, TakeFrom::right); }

HalfLineWalk two_loops(const HalfLineWalk& base, std::size_t n) {
  return add_self_loop(one_loop(base), n, 0.5, TakeFrom::proportional);
}

double sup_diff(const std::vector<double>& a, const std::vector<double>& b, std::size_t upto) {
  double m = 0.0;
  for (std::size_t i = 0; i <= upto; ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("initial states") {
  auto w = one_loop(make_family("example_a"));
  WalkOperators ops(truncate(w, 10));
  auto a = InitialState::incidence(w, 3).build(ops.basis());
  CHECK((a - ops.incidence_vector(3)).cwiseAbs().maxCoeff() < 1e-15);
  auto r0 = InitialState::reflected(w, 0).build(ops.basis());
  CHECK(r0.norm() == doctest::Approx(1.0));
  CHECK(std::abs(ops.incidence_vector(0).dot(r0)) < 1e-15);
  auto c = InitialState::custom(2, {1.0, 0.0, std::complex<double>(0.0, 1.0)});
  CHECK(c.build(ops.basis()).norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(InitialState::arc(0, Direction::L).build(ops.basis()), PreconditionError);
  CHECK_THROWS_AS(InitialState::custom(1, {0.0, 0.0, 0.0}), ParameterError);
}

TEST_CASE("spectral limit measure on finite systems") {
  auto w = two_loops(make_family("example_c"), 4);
  WalkOperators ops(truncate(w, 30));
  auto data = decompose(ops);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  StateVector psi(static_cast<Eigen::Index>(ops.dimension()));
  for (auto& x : psi) x = {g(rng), g(rng)};
  psi /= psi.norm();

  auto s = spectral_limit_measure(data, ops.basis(), psi);
  CHECK(s.table.total() == doctest::Approx(1.0).epsilon(1e-9));
  for (std::size_t u = 0; u < s.table.size(); ++u) {
    CHECK(s.table[u] >= -1e-12);
    CHECK(s.table[u] == doctest::Approx(s.hr_part[u] + s.hs_part[u] + s.cross_part[u]));
  }
  for (std::size_t u = 5; u < s.table.size(); ++u) CHECK(std::fabs(s.hs_part[u]) < 1e-12);

  // An eigenvector of U is stationary.
  const auto& l = data.lifts[data.lifts.size() / 3];
  auto st = spectral_limit_measure(data, ops.basis(), l.normalized);
  CHECK(sup_diff(st.table.values, position_distribution(ops.basis(), l.normalized).values, 30) < 1e-10);

  // Cesaro averages approach the spectral value at rate O(1/T).
  auto d1 = direct_limit_measure(ops, psi, 4000);
  auto d2 = direct_limit_measure(ops, psi, 16000);
  const double g1 = sup_diff(d1.table.values, s.table.values, 30);
  const double g2 = sup_diff(d2.table.values, s.table.values, 30);
  CHECK(g2 < g1);
  CHECK(g2 < 2e-3);
  CHECK(d1.table.total() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("brute-force and analytic decompositions give the same measure") {
  auto w = two_loops(homogeneous(0.5, 0.5), 3);
  WalkOperators ops(truncate(w, 20));
  auto psi = InitialState::reflected(w, 1).build(ops.basis());
  auto a = spectral_limit_measure(decompose(ops, HSMethod::analytic), ops.basis(), psi);
  auto b = spectral_limit_measure(decompose(ops, HSMethod::brute_force), ops.basis(), psi);
  CHECK(sup_diff(a.table.values, b.table.values, 20) < 1e-10);
  CHECK(sup_diff(a.hs_part, b.hs_part, 20) < 1e-10);
}

TEST_CASE("homogeneous closed form") {
  CHECK(homogeneous_closed_form(0.3, 0.7, 0, 0).value == doctest::Approx(8.0 / 49.0));
  CHECK(homogeneous_closed_form(0.3, 0.7, 0, 0).trapped == doctest::Approx(4.0 / 7.0));
  for (std::size_t i = 2; i < 30; ++i) {
    CHECK(homogeneous_closed_form(0.3, 0.7, i + 1, 0).value /
              homogeneous_closed_form(0.3, 0.7, i, 0).value ==
          doctest::Approx(3.0 / 7.0));
  }
  double total = 0.0;
  for (std::size_t j = 0; j < 200; ++j) total += homogeneous_pi(0.3, 0.7, j);
  CHECK(total == doctest::Approx(1.0));
  auto pi = stationary_distribution(homogeneous(0.3, 0.7), 20);
  for (std::size_t j = 0; j <= 20; ++j) CHECK(pi[j] == doctest::Approx(homogeneous_pi(0.3, 0.7, j)));
  CHECK_THROWS_AS(homogeneous_closed_form(0.5, 0.5, 0, 0), PreconditionError);
}

TEST_CASE("lower bounds") {
  auto w = make_family("example_c");
  WalkOperators ops(truncate(w, 30));
  auto pi = stationary_distribution(w, 30, SeriesOptions{100'000});
  auto a5 = ops.incidence_vector(5);
  auto b = lower_bound_general(ops, a5, 7, 5, &pi, 0.0);
  CHECK(b.pi_available);
  CHECK(b.value == doctest::Approx(pi[7] * pi[5]));
  CHECK(lower_bound_general(ops, a5, 7, 5, &pi, 0.0, 2.0).value == doctest::Approx(2 * pi[7] * pi[5]));
  CHECK(lower_bound_general(ops, a5, 7, 6, &pi, 0.0).value == 0.0);
  auto none = lower_bound_general(ops, a5, 7, 5, nullptr, 0.25);
  CHECK_FALSE(none.pi_available);
  CHECK(none.value == 0.25);
}

TEST_CASE("support table") {
  SeriesOptions o{100'000};
  auto rec = one_loop(homogeneous(0.5, 0.5));
  CHECK(supp_h_s(rec, classify(rec, o)).kind == SupportSet::Kind::empty);
  auto tr = one_loop(make_family("example_a"));
  auto s = supp_h_s(tr, classify(tr, o));
  CHECK(s.kind == SupportSet::Kind::from);
  CHECK(s.lo == 0);
  auto rec2 = two_loops(make_family("example_b"), 5);
  auto s2 = supp_h_s(rec2, classify(rec2, o));
  CHECK(s2.kind == SupportSet::Kind::interval);
  CHECK(s2.hi == 5);
  CHECK(s2.contains(5));
  CHECK_FALSE(s2.contains(6));
  CHECK(supp_h_s(make_family("example_a"), classify(make_family("example_a"), o)).kind ==
        SupportSet::Kind::empty);
  const double params[] = {0.4, 0.35, 0.25};
  auto inf = make_family("homogeneous", params);
  CHECK(supp_h_s(inf, classify(inf, o)).kind == SupportSet::Kind::from);
}

TEST_CASE("one-loop formula") {
  auto w = one_loop(make_family("example_a"));
  WalkOperators ops(truncate(w, 400));
  auto psi = InitialState::reflected(w, 0).build(ops.basis());
  auto c = corollary2_measure(w, ops, psi);
  CHECK_FALSE(c.contradiction);
  CHECK(c.c_r_prime.value == doctest::Approx(1.5).epsilon(1e-5));
  CHECK(c.pi_prime[0] == doctest::Approx(0.4).epsilon(1e-5));
  CHECK(c.table[0] == doctest::Approx(0.16).epsilon(1e-5));
  double total = 0.0;
  for (double x : c.pi_prime) total += x;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-2));

  // A state orthogonal to every a_perp piece gives nothing.
  auto orth = InitialState::incidence(w, 2).build(ops.basis());
  CHECK(corollary2_measure(w, ops, orth).table.total() < 1e-25);

  // Before the walk reaches the truncation edge the system is the infinite one.
  const std::size_t T = 3000;
  WalkOperators wide(truncate(w, T + 1));
  auto direct = direct_limit_measure(wide, InitialState::reflected(w, 0).build(wide.basis()), T);
  auto formula = corollary2_measure(w, wide, InitialState::reflected(w, 0).build(wide.basis()));
  CHECK(sup_diff(direct.table.values, formula.table.values, 20) < 3e-3);

  CHECK_THROWS_AS(corollary2_measure(one_loop(homogeneous(0.5, 0.5)), ops, psi), PreconditionError);
}

TEST_CASE("two-loop formula matches the finite H^(S) part exactly") {
  for (const char* fam : {"example_b", "example_c"}) {
    for (std::size_t n : {1u, 3u, 6u}) {
      auto w = two_loops(make_family(fam), n);
      WalkOperators ops(truncate(w, 40));
      auto data = decompose(ops);
      for (std::size_t anchor : {0u, 1u}) {
        if (anchor > n) continue;
        auto psi = InitialState::reflected(w, anchor).build(ops.basis());
        auto c = corollary3_measure(w, ops, psi);
        auto s = spectral_limit_measure(data, ops.basis(), psi);
        CHECK(sup_diff(c.table.values, s.hs_part, 40) < 1e-12);
        for (std::size_t i = n + 1; i <= 40; ++i) CHECK(c.table[i] == 0.0);
      }
    }
  }
  auto w1 = two_loops(make_family("example_b"), 1);
  WalkOperators ops(truncate(w1, 10));
  auto c = corollary3_measure(w1, ops, InitialState::reflected(w1, 0).build(ops.basis()));
  CHECK(c.c_r_prime.value == doctest::Approx(w1.r(0) * (1 - w1.p(1)) / w1.r(1)));
  CHECK_THROWS_AS(corollary3_measure(one_loop(make_family("example_b")), ops,
                                     InitialState::reflected(w1, 0).build(ops.basis())),
                  PreconditionError);
}

TEST_CASE("terminal norm partial sums") {
  SeriesOptions o;
  o.cutoff = 100'000;
  auto a = eta_norm_terminal(one_loop(make_family("example_a")), 0, o);
  CHECK(a.identity_max_rel_error < 1e-10);
  CHECK(a.first_site == doctest::Approx(2.0));
  CHECK(a.norm2.verdict() == SeriesVerdict::converged);
  CHECK(a.norm2.value == doctest::Approx(5.0).epsilon(1e-4));

  auto b = eta_norm_terminal(one_loop(make_family("example_b")), 0, o);
  CHECK(b.identity_max_rel_error < 1e-10);
  CHECK(b.norm2.verdict() == SeriesVerdict::diverged);

  auto c = eta_norm_terminal(two_loops(make_family("example_a"), 3), 3, o);
  CHECK(c.identity_max_rel_error < 1e-10);
  CHECK_THROWS_AS(eta_norm_terminal(two_loops(make_family("example_a"), 3), 0, o), PreconditionError);
}

TEST_CASE("projection against mass points") {
  auto w = homogeneous(0.3, 0.7);
  WalkOperators ops(truncate(w, 120));
  auto data = decompose(ops);
  auto points = mass_points(w, {60, 120});
  REQUIRE(points.size() == 2);
  auto psi = InitialState::arc(0, Direction::R).build(ops.basis());
  auto proj = project_out_mass_points(data, psi, points);
  CHECK(proj.removed_vectors == 2);
  CHECK(proj.residual_overlap < 1e-10);
  CHECK(proj.state.norm() == doctest::Approx(1.0));
  CHECK(proj.removed_weight > 0.1);
}
