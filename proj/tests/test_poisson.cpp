#include <cmath>

#include "doctest.h"
#include "gwq/poisson.hpp"

using namespace gwq;

namespace {

double rel_err_interior(const GroupoidModel& m, const MatrixXcd& a, const MatrixXcd& b,
                        int margin_rows, int margin_cols) {
  const double scale = std::max(a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff());
  double worst = 0;
  const int R = static_cast<int>(a.rows()), C = static_cast<int>(a.cols());
  const bool circ = m.has_base() && m.base.kind == ChartKind::Circle;
  for (int r = 0; r < R; ++r) {
    if (!circ && (r < margin_rows || r >= R - margin_rows)) continue;
    for (int c = margin_cols; c < C - margin_cols; ++c)
      worst = std::max(worst, std::abs(a(r, c) - b(r, c)));
  }
  return worst / std::max(scale, 1e-300);
}

MatrixXcd dual_grid_theta(const GroupoidModel& m) {
  const int rows = m.has_base() ? m.base_fine.n : 1;
  MatrixXcd F(rows, m.fiber.n_axis);
  for (int r = 0; r < rows; ++r)
    for (int k = 0; k < m.fiber.n_axis; ++k) F(r, k) = m.fiber.theta_axis[k];
  return F;
}

MatrixXcd dual_grid_base(const GroupoidModel& m, const std::function<double(double)>& env) {
  const int rows = m.has_base() ? m.base_fine.n : 1;
  MatrixXcd F(rows, m.fiber.n_axis);
  for (int r = 0; r < rows; ++r) {
    const double q = m.has_base() ? m.base_fine.points[r] : 0.0;
    for (int k = 0; k < m.fiber.n_axis; ++k) F(r, k) = env(q);
  }
  return F;
}

}  // namespace

// The finite-difference sampler is itself validated against hand formulas
// before it serves as the oracle for the spectral implementation.
TEST_CASE("fd sampler reproduces hand-computed brackets") {
  Resolution res;
  res.base_points = 128;
  res.fiber_points = 64;
  const GroupoidModel m = make_example("pair-flat-line", res);
  const BracketDescriptor d = default_bracket(m);
  REQUIRE(d.family == BracketFamily::Canonical);

  // {theta, env(q)} = -env'(q) for the +1-oriented canonical bracket
  auto env = [](double q) { return std::exp(-0.25 * q * q); };
  auto denv = [](double q) { return -0.5 * q * std::exp(-0.25 * q * q); };
  const MatrixXcd F = dual_grid_theta(m);
  const MatrixXcd G = dual_grid_base(m, env);
  const MatrixXcd H = poisson_bracket_samples_fd(m, d, F, G);
  double worst = 0;
  for (int r = 4; r < m.base_fine.n - 4; ++r) {
    const double q = m.base_fine.points[r];
    // F touches the theta-grid edge; stay away from the last stencil columns
    for (int k = 4; k < m.fiber.n_axis - 4; ++k)
      worst = std::max(worst, std::abs(H(r, k) - cplx(-denv(q), 0)));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("fd sampler on the affine dual reproduces the structure constants") {
  const GroupoidModel m = make_example("group-affine");
  REQUIRE(m.fiber_dim == 2);
  const BracketDescriptor d = default_bracket(m);
  REQUIRE(d.family == BracketFamily::LiePoisson);

  const int n = m.fiber.n_axis;
  MatrixXcd F(n, n), G(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      F(i, j) = m.fiber.theta_axis[i];  // theta_1 coordinate
      G(i, j) = m.fiber.theta_axis[j];  // theta_2 coordinate
    }
  const MatrixXcd H = poisson_bracket_samples_fd2(m, d, F, G);
  // {theta_1, theta_2} = -theta_2 for [e1, e2] = e2 with the minus convention
  double worst = 0;
  for (int i = 4; i < n - 4; ++i)
    for (int j = 4; j < n - 4; ++j)
      worst = std::max(worst, std::abs(H(i, j) - cplx(-m.fiber.theta_axis[j], 0)));
  CHECK(worst < 1e-8);
}

TEST_CASE("spectral bracket matches the fd oracle on the flat pair family") {
  Resolution res;
  res.base_points = 256;
  res.fiber_points = 128;
  const GroupoidModel m = make_example("pair-flat-line", res);
  const BracketDescriptor d = default_bracket(m);
  ObservableSpec sa, sb;
  sa.id = "gauss-a";
  sb.id = "moll-a";
  const PWObservable f = make_pw_observable(m, sa);
  const PWObservable g = make_pw_observable(m, sb);
  const PWObservable h = poisson_bracket(m, d, f, g);
  const MatrixXcd oracle = poisson_bracket_samples_fd(m, d, f.dual, g.dual);
  CHECK(rel_err_interior(m, h.dual, oracle, 4, 4) < 2e-3);
  CHECK(h.trunc_mass < 1e-6);
}

TEST_CASE("spectral bracket matches the fd oracle on the metric circle") {
  Resolution res;
  res.base_points = 128;
  res.fiber_points = 128;
  const GroupoidModel m = make_example("pair-circle-metric", res);
  const BracketDescriptor d = default_bracket(m);
  ObservableSpec sa, sb;
  sa.id = "gauss-a";
  sb.id = "gauss-b";
  const PWObservable f = make_pw_observable(m, sa);
  const PWObservable g = make_pw_observable(m, sb);
  const PWObservable h = poisson_bracket(m, d, f, g);
  const MatrixXcd oracle = poisson_bracket_samples_fd(m, d, f.dual, g.dual);
  CHECK(rel_err_interior(m, h.dual, oracle, 0, 4) < 2e-3);
}

TEST_CASE("spectral bracket matches the fd oracle on the affine dual") {
  const GroupoidModel m = make_example("group-affine");
  const BracketDescriptor d = default_bracket(m);
  ObservableSpec sa, sb;
  sa.id = "gauss-a";
  sb.id = "moll-a";
  const PWObservable f = make_pw_observable(m, sa);
  const PWObservable g = make_pw_observable(m, sb);
  const PWObservable h = poisson_bracket(m, d, f, g);
  REQUIRE(!h.terms.empty());
  const MatrixXcd hd = terms_dual_grid(m.fiber, h.terms);
  const MatrixXcd Fd = terms_dual_grid(m.fiber, f.terms);
  const MatrixXcd Gd = terms_dual_grid(m.fiber, g.terms);
  const MatrixXcd oracle = poisson_bracket_samples_fd2(m, d, Fd, Gd);
  CHECK(rel_err_interior(m, hd, oracle, 4, 4) < 5e-3);
}

TEST_CASE("one-dimensional lie-poisson brackets vanish") {
  const GroupoidModel m = make_example("group-u1");
  const BracketDescriptor d = default_bracket(m);
  REQUIRE(d.family == BracketFamily::LiePoisson);
  ObservableSpec sa, sb;
  sa.id = "gauss-a";
  sb.id = "moll-b";
  const PWObservable f = make_pw_observable(m, sa);
  const PWObservable g = make_pw_observable(m, sb);
  const PWObservable h = poisson_bracket(m, d, f, g);
  CHECK(h.dual.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("transformation models carry the semidirect bracket") {
  for (const char* name : {"transf-line-translation", "transf-circle-rotation"}) {
    CAPTURE(name);
    const GroupoidModel m = make_example(name);
    const BracketDescriptor d = default_bracket(m);
    REQUIRE(d.family == BracketFamily::Semidirect);
    ObservableSpec sa, sb;
    sa.id = "gauss-a";
    sb.id = "gauss-b";
    const PWObservable f = make_pw_observable(m, sa);
    const PWObservable g = make_pw_observable(m, sb);
    const PWObservable h = poisson_bracket(m, d, f, g);
    const MatrixXcd oracle = poisson_bracket_samples_fd(m, d, f.dual, g.dual);
    CHECK(rel_err_interior(m, h.dual, oracle, 4, 4) < 2e-3);
  }
}

TEST_CASE("bracket is antisymmetric and sign-covariant") {
  const GroupoidModel m = make_example("pair-flat-line");
  BracketDescriptor d = default_bracket(m);
  ObservableSpec sa, sb;
  sa.id = "gauss-a";
  sb.id = "moll-a";
  const PWObservable f = make_pw_observable(m, sa);
  const PWObservable g = make_pw_observable(m, sb);
  const PWObservable fg = poisson_bracket(m, d, f, g);
  const PWObservable gf = poisson_bracket(m, d, g, f);
  CHECK((fg.dual + gf.dual).cwiseAbs().maxCoeff() <
        1e-13 * fg.dual.cwiseAbs().maxCoeff());
  BracketDescriptor flipped = d;
  flipped.sign = -d.sign;
  const PWObservable neg = poisson_bracket(m, flipped, f, g);
  CHECK((neg.dual + fg.dual).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("bracket of real observables is real") {
  const GroupoidModel m = make_example("pair-flat-line");
  const BracketDescriptor d = default_bracket(m);
  ObservableSpec sa, sb;
  sa.id = "gauss-b";
  sb.id = "moll-b";
  const PWObservable f = make_pw_observable(m, sa);
  const PWObservable g = make_pw_observable(m, sb);
  const PWObservable h = poisson_bracket(m, d, f, g);
  CHECK(h.selfadj);
  CHECK(h.dual.imag().cwiseAbs().maxCoeff() <
        1e-12 * std::max(1e-300, h.dual.cwiseAbs().maxCoeff()));
}
