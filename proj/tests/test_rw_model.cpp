#include <doctest.h>

#include <cmath>
#include <vector>

#include "qwalk/errors.hpp"
#include "qwalk/rw_model.hpp"

using namespace qwalk;

namespace {

HalfLineWalk homogeneous(double p, double q) {
  const double params[] = {p, q};
  return make_family("homogeneous", params);
}

SeriesOptions quick(std::size_t cutoff) {
  SeriesOptions o;
  o.cutoff = cutoff;
  return o;
}

}  // namespace

TEST_CASE("family coefficients") {
  auto w = homogeneous(0.3, 0.7);
  CHECK(w.p(0) == 1.0);
  CHECK(w.q(0) == 0.0);
  CHECK(w.loop_set().empty());
  for (std::size_t j = 0; j < 200; ++j) {
    auto s = w.at(j);
    CHECK(std::fabs(s.p + s.q + s.r - 1.0) <= 1e-12);
  }

  auto a = make_family("example_a");
  CHECK(a.p(2) == doctest::Approx(4.0 / 6.0));
  CHECK(a.q(2) == doctest::Approx(2.0 / 6.0));
  auto b = make_family("example_b");
  CHECK(b.p(3) == doctest::Approx(4.0 / 7.0));
  auto c = make_family("example_c");
  CHECK(c.p(0) == 1.0);
  CHECK(c.p(1) == 0.5);
  CHECK(c.q(4) == doctest::Approx(5.0 / 8.0));
  for (auto* w2 : {&a, &b, &c}) {
    for (std::size_t j = 0; j < 1000; ++j) {
      auto s = w2->at(j);
      CHECK(std::fabs(s.p + s.q + s.r - 1.0) <= 1e-12);
    }
  }

  const double custom[] = {0.5, 0.0, 0.5, 0.4, 0.6, 0.0};
  auto cu = make_family("custom", custom);
  CHECK(cu.loop_set() == std::vector<std::size_t>{0});
  CHECK(cu.p(57) == 0.4);
}

TEST_CASE("invalid parameters are rejected") {
  const double bad_sum[] = {0.3, 0.6};
  CHECK_THROWS_AS(make_family("homogeneous", bad_sum), ParameterError);
  const double negative[] = {1.2, -0.2};
  CHECK_THROWS_AS(make_family("homogeneous", negative), ParameterError);
  const double q0[] = {0.5, 0.5, 0.0, 0.5, 0.5, 0.0};
  CHECK_THROWS_AS(make_family("custom", q0), ParameterError);
  CHECK_THROWS_AS(make_family("nonexistent"), ParameterError);
}

TEST_CASE("self loops") {
  auto w = add_self_loop(homogeneous(0.3, 0.7), 0, 0.5, TakeFrom::right);
  CHECK(w.r(0) == 0.5);
  CHECK(w.p(0) == 0.5);
  CHECK(w.loop_set() == std::vector<std::size_t>{0});

  auto prop = add_self_loop(homogeneous(0.5, 0.5), 3, 0.5, TakeFrom::proportional);
  CHECK(prop.p(3) == 0.25);
  CHECK(prop.q(3) == 0.25);
  CHECK(prop.p(4) == 0.5);

  CHECK_THROWS_AS(add_self_loop(homogeneous(0.3, 0.7), 1, 1.0, TakeFrom::right), ParameterError);
  CHECK_THROWS_AS(add_self_loop(homogeneous(0.3, 0.7), 1, 0.3, TakeFrom::right), ParameterError);
  CHECK_THROWS_AS(add_self_loop(homogeneous(0.3, 0.7), 0, 0.2, TakeFrom::left), ParameterError);

  // Finite perturbations do not change the recurrence class.
  for (const char* fam : {"example_a", "example_b", "example_c"}) {
    auto base = make_family(fam).with_declared_class(std::nullopt);
    auto looped = add_self_loop(add_self_loop(base, 0, 0.5, TakeFrom::right), 4, 0.3,
                                TakeFrom::proportional);
    CHECK(classify(base, quick(100'000)).cls == classify(looped, quick(100'000)).cls);
  }
}

TEST_CASE("recurrence classes") {
  auto strip = [](HalfLineWalk w) { return w.with_declared_class(std::nullopt); };
  CHECK(classify(strip(make_family("example_a")), quick(10'000)).cls == RecurrenceClass::transient);
  CHECK(classify(strip(make_family("example_b")), quick(10'000)).cls ==
        RecurrenceClass::null_recurrent);
  CHECK(classify(strip(make_family("example_c")), quick(10'000)).cls ==
        RecurrenceClass::positive_recurrent);
  CHECK(classify(strip(homogeneous(0.7, 0.3))).cls == RecurrenceClass::transient);
  CHECK(classify(strip(homogeneous(0.5, 0.5))).cls == RecurrenceClass::null_recurrent);
  CHECK(classify(strip(homogeneous(0.3, 0.7))).cls == RecurrenceClass::positive_recurrent);

  auto rep = classify(make_family("example_b"), quick(10'000));
  CHECK(rep.verified);
  CHECK(rep.consistent_with_declared);

  CHECK_THROWS_AS(classify(homogeneous(0.3, 0.7), quick(5)), PreconditionError);
}

TEST_CASE("unresolved series fall back to the declared class") {
  SeriesOptions o = quick(20);
  o.use_ratio_test = false;
  auto w = make_family("example_b");
  auto rep = classify(w, o);
  CHECK_FALSE(rep.verified);
  CHECK(rep.cls == RecurrenceClass::null_recurrent);
  CHECK_THROWS_AS(classify(w.with_declared_class(std::nullopt), o), IndeterminateClassification);
}

TEST_CASE("stationary distribution") {
  const double p = 0.3, q = 0.7;
  auto w = homogeneous(p, q);
  auto pi = stationary_distribution(w, 60);
  CHECK(pi[0] == doctest::Approx(2.0 / 7.0).epsilon(1e-12));
  for (std::size_t j = 1; j <= 60; ++j) {
    CHECK(pi[j] == doctest::Approx((1 - p / q) / (2 * q) * std::pow(p / q, double(j) - 1)).epsilon(1e-10));
  }
  for (std::size_t j = 0; j < 60; ++j) {
    CHECK(std::fabs(pi[j] * w.p(j) - pi[j + 1] * w.q(j + 1)) <= 1e-12 * pi[j]);
  }
  CHECK(pi.total() <= 1.0 + 1e-12);
  CHECK(pi.total() == doctest::Approx(1.0).epsilon(1e-12));

  auto c = stationary_distribution(make_family("example_c"), 50, quick(100'000));
  CHECK(c.total() < 1.0);
  CHECK(stationary_distribution(make_family("example_c"), 500, quick(100'000)).total() > c.total());

  CHECK_THROWS_AS(stationary_distribution(make_family("example_a"), 10), PreconditionError);
}

TEST_CASE("signed eigenvector") {
  auto w = homogeneous(0.3, 0.7);
  auto v = signed_eigenvector(w, 40);
  CHECK(v[0] == 1.0);
  CHECK(v[1] == doctest::Approx(-1.0 / 0.7));
  for (int j = 0; j < 40; ++j) CHECK(v[j] * v[j + 1] < 0.0);
  // Interior of M pi' = -pi' with M the infinite-walk matrix.
  for (std::size_t j = 1; j < 40; ++j) {
    const double m = w.p(j - 1) * v[j - 1] + w.q(j + 1) * v[j + 1];
    CHECK(std::fabs(m + v[j]) <= 1e-10 * std::fabs(v[j]));
  }
  CHECK_THROWS_AS(signed_eigenvector(add_self_loop(w, 2, 0.1, TakeFrom::right), 5), PreconditionError);
}

TEST_CASE("truncation and Jacobi matrix") {
  auto w = homogeneous(0.3, 0.7);
  auto c = truncate(w, 10);
  CHECK(c.sites[10].q == 1.0);
  CHECK(c.sites[10].p == 0.0);
  CHECK(c.redirected_mass == 0.3);
  Eigen::MatrixXd M = c.stochastic_matrix();
  for (int k = 0; k <= 10; ++k) CHECK(std::fabs(M.col(k).sum() - 1.0) <= 1e-12);

  auto looped = w.with_site(5, {0.3, 0.5, 0.2});
  auto cl = truncate(looped, 10);
  CHECK(cl.sites[5].r == 0.2);
  CHECK(cl.loops() == std::vector<std::size_t>{5});
  CHECK_THROWS_AS(truncate(w, 1), PreconditionError);

  auto J = jacobi_matrix(w, 20);
  CHECK(J.off_diagonal[0] == doctest::Approx(std::sqrt(0.7)));
  for (int k = 1; k < 19; ++k) CHECK(J.off_diagonal[k] == doctest::Approx(std::sqrt(0.21)));
  CHECK(J.diagonal.cwiseAbs().maxCoeff() == 0.0);
  Eigen::MatrixXd Jd = J.dense();
  CHECK(Jd == Jd.transpose());

  auto w0 = add_self_loop(w, 0, 0.5, TakeFrom::right);
  CHECK(jacobi_matrix(w0, 5).diagonal[0] == 0.5);
}

TEST_CASE("Jacobi matrix is D^{-1/2} M D^{1/2} for the stationary weights") {
  auto w = make_family("example_c");
  const std::size_t N = 40;
  auto pi = stationary_distribution(w, N + 1, quick(100'000));
  auto J = jacobi_matrix(w, N + 1).dense();
  // Infinite-walk M restricted to {0..N}.
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(N + 1, N + 1);
  for (std::size_t j = 0; j <= N; ++j) {
    M(j, j) = w.r(j);
    if (j < N) M(j + 1, j) = w.p(j);
    if (j > 0) M(j - 1, j) = w.q(j);
  }
  double good = 0.0, other = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t j = 0; j < N; ++j) {
      const double a = M(i, j) * std::sqrt(pi[j] / pi[i]);
      const double b = M(i, j) * std::sqrt(pi[i] / pi[j]);
      good = std::max(good, std::fabs(J(i, j) - a));
      other = std::max(other, std::fabs(J(i, j) - b));
    }
  }
  CHECK(good < 1e-10);
  CHECK(other > 1e-3);
}
