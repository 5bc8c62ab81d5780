#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "gwq/geometry.hpp"

using namespace gwq;

namespace {

// ---- oracles ----

/// 4th-order central-difference Jacobian determinant of GroupOps::exp,
/// independent of the closed forms under test.
double fd_exp_det(const GroupOps& g, const std::array<double, 2>& X, double h = 1e-4) {
  auto col = [&](int axis, double step) {
    std::array<double, 2> Y = X;
    Y[axis] += step;
    return g.exp(Y);
  };
  double J[2][2];
  for (int a = 0; a < 2; ++a) {
    const auto p2 = col(a, 2 * h), p1 = col(a, h), m1 = col(a, -h), m2 = col(a, -2 * h);
    for (int r = 0; r < 2; ++r)
      J[r][a] = (-p2[r] + 8 * p1[r] - 8 * m1[r] + m2[r]) / (12 * h);
  }
  return J[0][0] * J[1][1] - J[0][1] * J[1][0];
}

/// Trapezoid arclength of the metric circle, independent of the mode series.
double quad_length(const CircleMetric& met, int n = 200000) {
  double s = 0;
  const double dq = kTwoPi / n;
  for (int i = 0; i < n; ++i) s += std::sqrt(met.g(i * dq)) * dq;
  return s;
}

struct Rng {
  std::mt19937_64 eng{12345};
  double operator()(double lo, double hi) {
    return lo + (hi - lo) * uniform01(eng());
  }
};

GPoint random_element(const GroupoidModel& m, Rng& r) {
  GPoint g;
  switch (m.family) {
    case Family::Pair:
      if (m.base.kind == ChartKind::Circle) {
        g.c = {r(0, kTwoPi), r(0, kTwoPi)};
      } else {
        g.c = {r(-4, 4), r(-4, 4)};
      }
      break;
    case Family::LieGroup:
      if (m.group.kind == GroupKind::U1) g.c = {r(0, kTwoPi), 0};
      else g.c = {r(0.3, 3.0), r(-2, 2)};
      break;
    case Family::Transformation:
      g.c[0] = m.base.kind == ChartKind::Circle ? r(0, kTwoPi) : r(-3, 3);
      g.c[1] = m.base.kind == ChartKind::Circle ? r(0, kTwoPi) : r(-4, 4);
      break;
  }
  return g;
}

/// Element with prescribed source (for composable chains).
GPoint with_source(const GroupoidModel& m, double src, Rng& r) {
  GPoint g = random_element(m, r);
  switch (m.family) {
    case Family::Pair:
      g.c[1] = src;
      break;
    case Family::LieGroup:
      break;  // single unit
    case Family::Transformation:
      // q with act(x^{-1}, q) = src  <=>  q = act(x, src)
      g.c[1] = m.action({g.c[0], 0}, src);
      break;
  }
  return g;
}

double dist(const GroupoidModel& m, const GPoint& a, const GPoint& b) {
  auto d1 = [&](double u, double v, bool circ) {
    return circ ? std::abs(wrap_pm_pi(u - v)) : std::abs(u - v);
  };
  const bool circ_base = m.base.kind == ChartKind::Circle;
  switch (m.family) {
    case Family::Pair:
      return std::max(d1(a.c[0], b.c[0], circ_base), d1(a.c[1], b.c[1], circ_base));
    case Family::LieGroup:
      if (m.group.kind == GroupKind::U1) return d1(a.c[0], b.c[0], true);
      return std::max(std::abs(a.c[0] - b.c[0]), std::abs(a.c[1] - b.c[1]));
    case Family::Transformation:
      return std::max(d1(a.c[0], b.c[0], circ_base), d1(a.c[1], b.c[1], circ_base));
  }
  return 0;
}

}  // namespace

TEST_CASE("example catalog") {
  const auto names = example_names();
  for (const char* want :
       {"pair-flat-line", "pair-circle-metric", "group-u1", "group-affine",
        "transf-line-translation", "transf-circle-rotation"}) {
    CHECK(std::find(names.begin(), names.end(), want) != names.end());
  }
  CHECK_THROWS(make_example("no-such-model"));
  for (const auto& n : names) {
    const GroupoidModel m = make_example(n);
    CHECK(m.name == n);
    CHECK(m.fiber.n_axis % 4 == 0);
    CHECK(m.r_inj > 0);
  }
}

TEST_CASE("groupoid axioms on random samples") {
  Rng rng;
  for (const auto& name : example_names()) {
    CAPTURE(name);
    const GroupoidModel m = make_example(name);
    for (int trial = 0; trial < 50; ++trial) {
      const GPoint g = random_element(m, rng);
      const double s = source_of(m, g), t = target_of(m, g);

      // units are idempotent and neutral
      const GPoint us = unit_of(m, s), ut = unit_of(m, t);
      CHECK(source_of(m, us) == doctest::Approx(target_of(m, us)).epsilon(1e-12));
      auto gu = compose(m, g, us);
      auto ug = compose(m, ut, g);
      REQUIRE(gu.has_value());
      REQUIRE(ug.has_value());
      CHECK(dist(m, *gu, g) < 1e-10);
      CHECK(dist(m, *ug, g) < 1e-10);

      // inverse flips source and target and composes to a unit
      const GPoint gi = invert(m, g);
      CHECK(source_of(m, gi) == doctest::Approx(t).epsilon(1e-12));
      CHECK(target_of(m, gi) == doctest::Approx(s).epsilon(1e-12));
      auto gg = compose(m, g, gi);
      REQUIRE(gg.has_value());
      CHECK(dist(m, *gg, ut) < 1e-10);
      CHECK(dist(m, invert(m, gi), g) < 1e-12);

      // associativity on a composable triple g ∘ g2 ∘ g3
      const GPoint g2 = invert(m, with_source(m, s, rng));  // target(g2) == s
      const GPoint g3 = invert(m, with_source(m, source_of(m, g2), rng));
      auto a = compose(m, g, g2);
      REQUIRE(a.has_value());
      auto ab = compose(m, *a, g3);
      auto bc = compose(m, g2, g3);
      REQUIRE(ab.has_value());
      REQUIRE(bc.has_value());
      auto a_bc = compose(m, g, *bc);
      REQUIRE(a_bc.has_value());
      CHECK(dist(m, *ab, *a_bc) < 1e-9);
    }
  }
}

TEST_CASE("affine group chart operations") {
  const GroupoidModel m = make_example("group-affine");
  const GroupOps& g = m.group;
  REQUIRE(g.kind == GroupKind::Affine);
  REQUIRE(g.dim == 2);

  Rng rng;
  for (int trial = 0; trial < 100; ++trial) {
    const std::array<double, 2> a{rng(0.2, 4.0), rng(-3, 3)};
    const std::array<double, 2> b{rng(0.2, 4.0), rng(-3, 3)};
    // (a1, a2)(b1, b2) = (a1 b1, a1 b2 + a2)
    const auto ab = g.mul(a, b);
    CHECK(ab[0] == doctest::Approx(a[0] * b[0]).epsilon(1e-14));
    CHECK(ab[1] == doctest::Approx(a[0] * b[1] + a[1]).epsilon(1e-14));
    const auto ai = g.inv(a);
    const auto e = g.mul(a, ai);
    CHECK(e[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(e[1]) < 1e-14);

    const std::array<double, 2> X{rng(-1.5, 1.5), rng(-2, 2)};
    const auto back = g.log(g.exp(X));
    CHECK(back[0] == doctest::Approx(X[0]).epsilon(1e-12));
    CHECK(back[1] == doctest::Approx(X[1]).epsilon(1e-12));
  }

  // structure constants satisfy the Jacobi identity (brute force)
  for (int l = 0; l < 2; ++l)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k) {
          double s = 0;
          for (int mm = 0; mm < 2; ++mm)
            s += g.c[mm][i][j] * g.c[l][mm][k] + g.c[mm][j][k] * g.c[l][mm][i] +
                 g.c[mm][k][i] * g.c[l][mm][j];
          CHECK(s == 0.0);
        }
  // [e1, e2] = e2
  CHECK(g.c[1][0][1] == 1.0);
  CHECK(g.c[1][1][0] == -1.0);

  // left Haar density: d(lambda) = da db / a^2 is left invariant
  for (int trial = 0; trial < 20; ++trial) {
    const std::array<double, 2> a{rng(0.3, 3.0), rng(-2, 2)};
    const std::array<double, 2> x{rng(0.3, 3.0), rng(-2, 2)};
    // |det D(L_a)(x)| = a1^2, so density(a x) * a1^2 = density(x)
    CHECK(g.haar_density(g.mul(a, x)) * a[0] * a[0] ==
          doctest::Approx(g.haar_density(x)).epsilon(1e-13));
  }
}

TEST_CASE("exp jacobian against finite-difference volume ratio") {
  const GroupoidModel m = make_example("group-affine");
  const GroupOps& g = m.group;
  CHECK(g.exp_jacobian({0.0, 0.0}) == 1.0);
  Rng rng;
  for (int trial = 0; trial < 50; ++trial) {
    const std::array<double, 2> X{rng(-1.5, 1.5), rng(-2, 2)};
    // pushforward of Lebesgue through exp, measured against left Haar
    const double oracle = fd_exp_det(g, X) * g.haar_density(g.exp(X));
    CHECK(g.exp_jacobian(X) == doctest::Approx(oracle).epsilon(1e-8));
  }
  const GroupoidModel u1 = make_example("group-u1");
  CHECK(u1.group.exp_jacobian({0.7, 0.0}) == 1.0);
}

TEST_CASE("haar system normalization") {
  Rng rng;
  for (const auto& name : example_names()) {
    CAPTURE(name);
    const GroupoidModel m = make_example(name);
    const HaarSystem h = build_haar_system(m);
    for (int trial = 0; trial < 10; ++trial) {
      const double q = m.base.kind == ChartKind::Circle ? rng(0, kTwoPi) : rng(-3, 3);
      CHECK(haar_jacobian(m, h, q, {0.0, 0.0}) == 1.0);
      const double X = rng(-1.0, 1.0);
      CHECK(haar_jacobian(m, h, q, {X, 0.0}) > 0);
    }
  }

  // custom positive density on the flat pair family: J_q(X) = rho(q+X)/rho(q)
  const GroupoidModel m = make_example("pair-flat-line");
  auto rho = [](double w) { return 1.0 + 0.5 * std::sin(0.3 * w); };
  const HaarSystem h = build_haar_system(m, rho);
  for (int trial = 0; trial < 20; ++trial) {
    const double q = rng(-3, 3), X = rng(-2, 2);
    CHECK(haar_jacobian(m, h, q, {X, 0.0}) ==
          doctest::Approx(rho(q + X) / rho(q)).epsilon(1e-13));
  }
  CHECK_THROWS(build_haar_system(make_example("group-u1"), rho));
}

TEST_CASE("metric circle arclength bookkeeping") {
  const GroupoidModel m = make_example("pair-circle-metric");
  REQUIRE(m.has_metric);
  const CircleMetric& met = m.metric;

  CHECK(met.total_length == doctest::Approx(quad_length(met)).epsilon(1e-9));

  Rng rng;
  for (int trial = 0; trial < 40; ++trial) {
    const double q = rng(0, kTwoPi);
    // ell and its inverse are mutually inverse
    CHECK(met.ell_inverse(met.ell(q)) == doctest::Approx(q).epsilon(1e-11));
    // geodesic from coordinate velocity v travels arclength sqrt(g(q))*v
    const double v = rng(-2.0, 2.0);
    const double q1 = met.exp_q(q, v);
    const double dl = met.ell(q1) - met.ell(q);
    // account for winding: agreement is modulo the total length
    const double diff = std::remainder(dl - met.sqrtg(q) * v, met.total_length);
    CHECK(std::abs(diff) < 1e-10);
    // dexp is the v-derivative of exp
    const double h = 1e-5;
    const double fd =
        (met.exp_q(q, v + h) - met.exp_q(q, v - h)) / (2 * h);
    CHECK(met.dexp_q(q, v) == doctest::Approx(fd).epsilon(1e-8));
    // sqrt(g) mode series matches the metric closure
    CHECK(met.sqrtg(q) == doctest::Approx(std::sqrt(met.g(q))).epsilon(1e-12));
  }
}

TEST_CASE("transformation actions") {
  Rng rng;
  for (const char* name : {"transf-line-translation", "transf-circle-rotation"}) {
    CAPTURE(name);
    const GroupoidModel m = make_example(name);
    REQUIRE(m.action);
    for (int trial = 0; trial < 30; ++trial) {
      const double q = m.base.kind == ChartKind::Circle ? rng(0, kTwoPi) : rng(-3, 3);
      const double x = m.base.kind == ChartKind::Circle ? rng(0, kTwoPi) : rng(-2, 2);
      const double y = m.base.kind == ChartKind::Circle ? rng(0, kTwoPi) : rng(-2, 2);
      // act(e, q) = q and act(x y, q) = act(x, act(y, q))
      CHECK(m.action(m.group.identity(), q) == doctest::Approx(q).epsilon(1e-13));
      const double lhs = m.action(m.group.mul({x, 0}, {y, 0}), q);
      const double rhs = m.action({x, 0}, m.action({y, 0}, q));
      const double d = m.base.kind == ChartKind::Circle ? wrap_pm_pi(lhs - rhs) : lhs - rhs;
      CHECK(std::abs(d) < 1e-12);
    }
    // sampled units sit on the base lattice
    for (double u : m.sampled_units) CHECK(m.base.index_of(u).has_value());
  }
}

TEST_CASE("resolution overrides validated") {
  Resolution r;
  r.fiber_points = 123;  // not a multiple of 4
  CHECK_THROWS(make_example("pair-flat-line", r));
  Resolution r2;
  r2.base_points = 128;
  r2.fiber_points = 128;
  const GroupoidModel m = make_example("pair-flat-line", r2);
  CHECK(m.base.n == 128);
  CHECK(m.fiber.n_axis == 128);
  CHECK(m.base_fine.n == 2 * 128 - 1);
}
