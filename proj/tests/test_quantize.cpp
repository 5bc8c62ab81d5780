#include <cmath>

#include "doctest.h"
#include "gwq/quantize.hpp"

using namespace gwq;

namespace {

/// Oracle: standard position-space kernel on the flat cotangent line by
/// direct quadrature over the dual grid, (2 pi hbar)^{-1} sum_k dtheta
/// e^{i theta_k (x-y)/hbar} f((x+y)/2, theta_k). Independent of the
/// transform-side closed forms used by the kernel assembly.
cplx flat_kernel_quadrature(const GroupoidModel& m, const PWObservable& f, double hbar,
                            double x, double y) {
  const int row = *m.base_fine.index_of((x + y) / 2);
  cplx s = 0;
  for (int k = 0; k < m.fiber.n_axis; ++k)
    s += std::polar(1.0, m.fiber.theta_axis[k] * (x - y) / hbar) * f.dual(row, k);
  return s * m.fiber.dtheta / (kTwoPi * hbar);
}

Resolution small_flat() {
  Resolution r;
  r.base_points = 256;
  r.fiber_points = 256;
  return r;
}

}  // namespace

TEST_CASE("cutoff profile") {
  const Cutoff triv = trivial_cutoff();
  CHECK(triv.trivial());
  CHECK(triv(0.0) == 1.0);
  CHECK(triv(1e6) == 1.0);

  const GroupoidModel m = make_example("group-u1");
  const Cutoff k = make_cutoff(m, 1.0, 2.5);
  CHECK(k(0.0) == 1.0);
  CHECK(k(0.999) == 1.0);
  CHECK(k(1.0) == 1.0);
  CHECK(k(2.5) == 0.0);
  CHECK(k(3.0) == 0.0);
  double prev = 1.0;
  for (double r = 1.0; r <= 2.5; r += 0.01) {
    const double v = k(r);
    CHECK(v <= prev + 1e-15);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    prev = v;
  }
  CHECK(k(-0.5) == k(0.5));  // even

  CHECK_THROWS(make_cutoff(m, 2.0, 1.0));               // inverted radii
  CHECK_THROWS(make_cutoff(m, 0.5, m.r_inj + 1.0));     // beyond injectivity
  CHECK_THROWS(make_cutoff(m, 0.0, 1.0));               // empty plateau
}

TEST_CASE("flat pair kernel equals the quadrature oracle") {
  const GroupoidModel m = make_example("pair-flat-line", small_flat());
  ObservableSpec spec;
  spec.id = "gauss-a";
  const PWObservable f = make_pw_observable(m, spec);
  const double hbar = 0.2;
  const KernelElement K = weyl_quantize(m, f, hbar);
  REQUIRE(K.storage == StorageKind::DenseMats);
  REQUIRE(K.mats.size() == 1);
  const MatrixXcd& A = K.mats[0];
  const int N = m.base.n;
  double worst = 0, scale = A.cwiseAbs().maxCoeff();
  for (int i = 0; i < N; i += 13) {
    for (int j = 0; j < N; j += 7) {
      const double x = m.base.points[i], y = m.base.points[j];
      if (std::abs(x - y) > hbar * f.support_radius + 1e-12) {
        CHECK(std::abs(A(i, j)) == 0.0);
        continue;
      }
      const cplx oracle = flat_kernel_quadrature(m, f, hbar, x, y);
      worst = std::max(worst, std::abs(A(i, j) - oracle));
    }
  }
  CHECK(worst / scale < 1e-8);
  MESSAGE("flat kernel worst relative deviation: ", worst / scale);
}

TEST_CASE("kernel values scale with hbar through the fiber chart") {
  const GroupoidModel m = make_example("pair-flat-line", small_flat());
  const ConnectionDescriptor c = default_connection(m);
  ObservableSpec spec;
  spec.id = "gauss-b";
  const PWObservable f = make_pw_observable(m, spec);
  const Cutoff triv = trivial_cutoff();
  for (double X : {0.4, 1.3, -2.2}) {
    for (double q : {-0.75, 0.0, 1.5}) {
      const cplx v1 = kernel_value_at(m, f, 0.2, -1, triv,
                                      exp_weyl(m, c, {{0.2 * X, 0}, q}));
      const cplx v2 = kernel_value_at(m, f, 0.05, -1, triv,
                                      exp_weyl(m, c, {{0.05 * X, 0}, q}));
      // hbar^n * kernel depends on (X, q) only
      CHECK(std::abs(0.2 * v1 - 0.05 * v2) < 1e-12 * std::abs(0.2 * v1));
    }
  }
}

TEST_CASE("kernel matrices are exactly hermitian") {
  for (const auto& name : example_names()) {
    CAPTURE(name);
    const GroupoidModel m = make_example(name);
    for (const char* id : {"gauss-a", "gauss-b", "moll-a", "moll-b"}) {
      CAPTURE(id);
      ObservableSpec spec;
      spec.id = id;
      const PWObservable f = make_pw_observable(m, spec);
      const KernelElement K = weyl_quantize(m, f, 0.1);
      if (K.storage == StorageKind::DenseMats) {
        for (const auto& A : K.mats)
          CHECK((A - A.adjoint()).cwiseAbs().maxCoeff() == 0.0);
      } else if (K.storage == StorageKind::CircVector) {
        const int n = static_cast<int>(K.circ.size());
        for (int d = 0; d < n; ++d)
          CHECK(K.circ[d] == std::conj(K.circ[(n - d) % n]));
      }
    }
  }
}

TEST_CASE("circle group kernel matches the closed form entrywise") {
  const GroupoidModel m = make_example("group-u1");
  ObservableSpec spec;
  spec.id = "gauss-a";
  const PWObservable f = make_pw_observable(m, spec);
  const double hbar = 0.1;
  const Cutoff kap = default_cutoff(m);
  const KernelElement K = weyl_quantize(m, f, hbar);
  REQUIRE(K.storage == StorageKind::CircVector);
  const int n = m.group_axis0.n;
  REQUIRE(static_cast<int>(K.circ.size()) == n);
  for (int d = 0; d < n; d += 11) {
    const double x = wrap_pm_pi(m.group_axis0.points[d]);
    const cplx want = kap(std::abs(x)) / hbar * ft_at(f, x / hbar, 0);
    CHECK(std::abs(K.circ[d] - want) < 1e-13 * std::max(1.0, std::abs(want)));
  }
}

TEST_CASE("transformation kernels ignore the unit when the observable does") {
  const GroupoidModel m = make_example("transf-line-translation");
  ObservableSpec spec;
  spec.id = "gauss-a";
  spec.env_width = 1e9;  // flatten the base envelope to exactly 1
  const PWObservable f = make_pw_observable(m, spec);
  const Cutoff triv = trivial_cutoff();
  for (double x : {0.3, -0.8}) {
    const cplx a = kernel_value_at(m, f, 0.1, +1, triv, GPoint{{x, 0.0}});
    const cplx b = kernel_value_at(m, f, 0.1, +1, triv, GPoint{{x, 1.5}});
    const cplx c = kernel_value_at(m, f, 0.1, +1, triv, GPoint{{x, -2.0}});
    CHECK(std::abs(a - b) <= 1e-13 * std::abs(a));
    CHECK(std::abs(a - c) <= 1e-13 * std::abs(a));
  }
  // the translation fiber is the base lattice itself, so the per-unit
  // matrices coincide for every observable
  const KernelElement K = weyl_quantize(m, f, 0.1);
  REQUIRE(K.mats.size() == m.sampled_units.size());
  for (size_t u = 1; u < K.mats.size(); ++u)
    CHECK((K.mats[u] - K.mats[0]).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("affine kernel structure") {
  const GroupoidModel m = make_example("group-affine");
  ObservableSpec spec;
  spec.id = "gauss-a";
  const PWObservable f = make_pw_observable(m, spec);
  const KernelElement K = weyl_quantize(m, f, 0.2);
  REQUIRE(K.storage == StorageKind::DenseMats);
  REQUIRE(K.mats.size() == 1);
  CHECK(K.dim == m.scaled_points * m.scaled_points);
  CHECK(static_cast<int>(K.mats[0].rows()) == K.dim);
  CHECK((K.mats[0] - K.mats[0].adjoint()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(K.weights.minCoeff() > 0.0);
  // the kernel has mass
  CHECK(K.mats[0].cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("quantization validates its inputs") {
  const GroupoidModel m = make_example("pair-flat-line", small_flat());
  ObservableSpec spec;
  spec.id = "gauss-a";
  const PWObservable f = make_pw_observable(m, spec);
  CHECK_THROWS(weyl_quantize(m, f, 0.0));    // hbar must be positive
  CHECK_THROWS(weyl_quantize(m, f, -0.1));
  CHECK_THROWS(weyl_quantize(m, f, 0.1, 2, trivial_cutoff()));  // bad sign
  // support leaves the window at huge hbar
  CHECK_THROWS(weyl_quantize(m, f, 10.0));
  // observable built for another model is rejected
  const GroupoidModel m2 = make_example("group-u1");
  CHECK_THROWS(weyl_quantize(m2, f, 0.1));
  // finite injectivity radius forbids the trivial cutoff
  const GroupoidModel mc = make_example("pair-circle-metric");
  ObservableSpec sc;
  sc.id = "gauss-a";
  const PWObservable fc = make_pw_observable(mc, sc);
  CHECK_THROWS(weyl_quantize(mc, fc, 0.1, -1, trivial_cutoff()));
  CHECK_NOTHROW(weyl_quantize(mc, fc, 0.1, -1, default_cutoff(mc)));
  // transformation-only entry point
  CHECK_THROWS(transform_groupoid_quantize(m, f, 0.1, -1, trivial_cutoff()));
}

TEST_CASE("classical section stores the observable") {
  const GroupoidModel m = make_example("pair-flat-line", small_flat());
  ObservableSpec spec;
  spec.id = "moll-a";
  const PWObservable f = make_pw_observable(m, spec);
  const KernelElement K = classical_section(m, f);
  CHECK(K.storage == StorageKind::Classical);
  CHECK(K.hbar == 0.0);
  CHECK(K.classical.id == f.id);
}

TEST_CASE("metric circle kernel stays inside the cutoff support") {
  Resolution res;
  res.base_points = 128;
  res.fiber_points = 128;
  const GroupoidModel m = make_example("pair-circle-metric", res);
  ObservableSpec spec;
  spec.id = "gauss-a";
  const PWObservable f = make_pw_observable(m, spec);
  const Cutoff kap = make_cutoff(m, 0.8, 1.6);
  const KernelElement K = weyl_quantize(m, f, 0.2, -1, kap);
  REQUIRE(K.mats.size() == 1);
  const MatrixXcd& A = K.mats[0];
  for (int i = 0; i < m.base.n; i += 7)
    for (int j = 0; j < m.base.n; j += 5) {
      const auto X = weyl_log(m, GPoint{{m.base.points[i], m.base.points[j]}});
      if (!X.has_value() || std::abs(X->X[0]) >= 1.6)
        CHECK(std::abs(A(i, j)) == 0.0);
    }
  CHECK((A - A.adjoint()).cwiseAbs().maxCoeff() == 0.0);
}
