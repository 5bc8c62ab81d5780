#include "gwq/geometry.hpp"

#include <algorithm>
#include <cstring>
#include <limits>
#include <random>

namespace gwq {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// (e^z - 1)/z, stable near 0
double phi1(double z) {
  if (std::abs(z) < 1e-6) return 1.0 + z * (0.5 + z * (1.0 / 6.0 + z / 24.0));
  return std::expm1(z) / z;
}

void check_structure_jacobi(const GroupOps& g) {
  const int n = g.dim;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          double s = 0;
          for (int m = 0; m < n; ++m)
            s += g.c[l][m][k] * g.c[m][i][j] + g.c[l][m][i] * g.c[m][j][k] +
                 g.c[l][m][j] * g.c[m][k][i];
          if (std::abs(s) > 1e-12)
            throw std::invalid_argument("structure constants violate the Jacobi identity");
        }
}

}  // namespace

// ---------------- GroupOps ----------------

std::array<double, 2> GroupOps::mul(const std::array<double, 2>& a,
                                    const std::array<double, 2>& b) const {
  switch (kind) {
    case GroupKind::RealLine:
      return {a[0] + b[0], 0.0};
    case GroupKind::U1:
      return {wrap_2pi(a[0] + b[0]), 0.0};
    case GroupKind::Affine:
      return {a[0] * b[0], a[0] * b[1] + a[1]};
    default:
      throw std::logic_error("GroupOps::mul on trivial group");
  }
}

std::array<double, 2> GroupOps::inv(const std::array<double, 2>& a) const {
  switch (kind) {
    case GroupKind::RealLine:
      return {-a[0], 0.0};
    case GroupKind::U1:
      return {wrap_2pi(-a[0]), 0.0};
    case GroupKind::Affine:
      return {1.0 / a[0], -a[1] / a[0]};
    default:
      throw std::logic_error("GroupOps::inv on trivial group");
  }
}

std::array<double, 2> GroupOps::exp(const std::array<double, 2>& X) const {
  switch (kind) {
    case GroupKind::RealLine:
      return {X[0], 0.0};
    case GroupKind::U1:
      return {wrap_2pi(X[0]), 0.0};
    case GroupKind::Affine:
      return {std::exp(X[0]), X[1] * phi1(X[0])};
    default:
      throw std::logic_error("GroupOps::exp on trivial group");
  }
}

std::array<double, 2> GroupOps::log(const std::array<double, 2>& a) const {
  switch (kind) {
    case GroupKind::RealLine:
      return {a[0], 0.0};
    case GroupKind::U1:
      return {wrap_pm_pi(a[0]), 0.0};
    case GroupKind::Affine: {
      const double x1 = std::log(a[0]);
      return {x1, a[1] / phi1(x1)};
    }
    default:
      throw std::logic_error("GroupOps::log on trivial group");
  }
}

std::array<double, 2> GroupOps::identity() const {
  if (kind == GroupKind::Affine) return {1.0, 0.0};
  return {0.0, 0.0};
}

double GroupOps::haar_density(const std::array<double, 2>& a) const {
  if (kind == GroupKind::Affine) return 1.0 / (a[0] * a[0]);
  return 1.0;
}

double GroupOps::exp_jacobian(const std::array<double, 2>& X) const {
  if (kind != GroupKind::Affine) return 1.0;
  const double z = X[0];
  if (z == 0.0) return 1.0;
  if (std::abs(z) < 1e-6) return 1.0 - z * (0.5 - z * (1.0 / 6.0 - z / 24.0));
  return -std::expm1(-z) / z;
}

// ---------------- CircleMetric ----------------

double CircleMetric::sqrtg(double q) const { return std::sqrt(g(q)); }

double CircleMetric::ell(double q) const {
  const double k = std::floor(q / kTwoPi);
  const double u = q - k * kTwoPi;
  const int M = static_cast<int>(sqrtg_modes.size()) - 1;
  double s = sqrtg_modes[0].real() * u;
  for (int m = 1; m <= M; ++m) {
    const cplx cm = sqrtg_modes[m];
    if (std::abs(cm) == 0.0) continue;
    const cplx e = std::exp(cplx(0.0, m * u)) - 1.0;
    s += 2.0 * (cm * e / cplx(0.0, static_cast<double>(m))).real();
  }
  return k * total_length + s;
}

double CircleMetric::ell_inverse(double s) const {
  const double k = std::floor(s / total_length);
  const double u = s - k * total_length;
  double q = u / sqrtg_modes[0].real();
  for (int it = 0; it < 60; ++it) {
    const double r = ell(q) - u;
    const double step = r / sqrtg(q);
    q -= step;
    if (std::abs(step) < 1e-15) break;
  }
  return k * kTwoPi + q;
}

double CircleMetric::exp_q(double q, double v) const {
  if (v == 0.0) return q;
  return ell_inverse(ell(q) + sqrtg(q) * v);
}

double CircleMetric::dexp_q(double q, double v) const {
  return sqrtg(q) / sqrtg(exp_q(q, v));
}

// ---------------- model construction ----------------

namespace {

CircleMetric make_circle_metric(std::function<double(double)> g,
                                std::function<double(double)> dg) {
  CircleMetric m;
  m.g = std::move(g);
  m.dg = std::move(dg);
  const int N = 512, M = 64;
  m.sqrtg_modes.assign(M + 1, cplx(0.0, 0.0));
  for (int k = 0; k <= M; ++k) {
    cplx acc(0.0, 0.0);
    for (int j = 0; j < N; ++j) {
      const double q = kTwoPi * j / N;
      acc += std::sqrt(m.g(q)) * std::exp(cplx(0.0, -k * q));
    }
    acc /= static_cast<double>(N);
    m.sqrtg_modes[k] = (std::abs(acc) > 1e-17) ? acc : cplx(0.0, 0.0);
  }
  m.total_length = m.sqrtg_modes[0].real() * kTwoPi;
  return m;
}

Chart fine_of(const Chart& base) {
  if (base.kind == ChartKind::Circle) return Chart::circle(2 * base.n);
  if (base.kind == ChartKind::LineWindow) return Chart::line(base.window, 2 * base.n - 1);
  return Chart::point();
}

void check_action(const GroupoidModel& m) {
  std::mt19937_64 rng(0x9e3779b97f4a7c15ull);
  const int n0 = m.group_axis0.n, nb = std::max(m.base.n, 1);
  for (int trial = 0; trial < 256; ++trial) {
    const double x = m.group_axis0.points[rng() % n0];
    const double y = m.group_axis0.points[rng() % n0];
    const double q = m.base.points[rng() % nb];
    const std::array<double, 2> gx{x, 0.0}, gy{y, 0.0};
    const double lhs = m.action(m.group.mul(gx, gy), q);
    const double rhs = m.action(gx, m.action(gy, q));
    if (std::abs(m.base.diff(lhs, rhs)) > 1e-10)
      throw std::invalid_argument("group action is not associative on samples");
  }
}

int def(int v, int d) { return v > 0 ? v : d; }
double def(double v, double d) { return v > 0 ? v : d; }

}  // namespace

std::vector<std::string> example_names() {
  return {"pair-flat-line",   "pair-circle-metric",     "group-u1",
          "group-affine",     "transf-line-translation", "transf-circle-rotation"};
}

GroupoidModel make_example(const std::string& name, const Resolution& res) {
  GroupoidModel m;
  m.name = name;

  if (name == "pair-flat-line") {
    m.family = Family::Pair;
    m.base = Chart::line(def(res.window, 6.0), def(res.base_points, 512));
    m.fiber = FiberGrid::make(1, def(res.fiber_points, 512), def(res.fiber_window, 12.0));
    m.r_inj = kInf;
  } else if (name == "pair-circle-metric") {
    m.family = Family::Pair;
    m.base = Chart::circle(def(res.base_points, 256));
    m.fiber = FiberGrid::make(1, def(res.fiber_points, 512), def(res.fiber_window, 12.0));
    m.has_metric = true;
    m.metric = make_circle_metric([](double q) { return 1.0 + 0.3 * std::cos(q); },
                                  [](double q) { return -0.3 * std::sin(q); });
    // the Weyl exponential develops arc-antipodal double covers beyond
    // C / (2 max sqrt(g)); stay strictly inside
    double smax = 0.0;
    for (int j = 0; j < 4096; ++j)
      smax = std::max(smax, m.metric.sqrtg(kTwoPi * j / 4096.0));
    m.r_inj = std::min(M_PI - 0.05, m.metric.total_length / (2.0 * smax));
  } else if (name == "group-u1") {
    m.family = Family::LieGroup;
    m.group.kind = GroupKind::U1;
    m.group.dim = 1;
    m.fiber_dim = 1;
    m.group_axis0 = Chart::circle(def(res.group_points, 512));
    m.fiber = FiberGrid::make(1, def(res.fiber_points, 512), def(res.fiber_window, 12.0));
    m.r_inj = M_PI - 0.05;
  } else if (name == "group-affine") {
    m.family = Family::LieGroup;
    m.group.kind = GroupKind::Affine;
    m.group.dim = 2;
    m.fiber_dim = 2;
    m.group.c[1][0][1] = 1.0;   // [e1, e2] = e2
    m.group.c[1][1][0] = -1.0;
    m.group_axis0 = Chart::line(def(res.group_window, 2.0), def(res.group_points, 48));
    m.group_axis1 = Chart::line(def(res.group_window, 2.0), def(res.group_points, 48));
    m.fiber = FiberGrid::make(2, def(res.fiber_points, 128), def(res.fiber_window, 8.0));
    m.scaled_points = def(res.scaled_points, 47);
    m.scaled_halfwidth = def(res.scaled_halfwidth, 8.0);
    m.r_inj = kInf;
  } else if (name == "transf-line-translation") {
    m.family = Family::Transformation;
    m.group.kind = GroupKind::RealLine;
    m.group.dim = 1;
    m.base = Chart::line(def(res.window, 6.0), def(res.base_points, 512));
    m.group_axis0 = m.base;  // identical lattice keeps products on-grid
    m.fiber = FiberGrid::make(1, def(res.fiber_points, 512), def(res.fiber_window, 12.0));
    m.action = [](const std::array<double, 2>& x, double q) { return q + x[0]; };
    if (res.units.empty()) {
      // defaults near -1/2, 0, 1/2, snapped onto the lattice
      auto snap = [&](double u) {
        const long i = std::lround((u + m.base.window) / m.base.spacing);
        return m.base.points[std::min<long>(std::max<long>(i, 0), m.base.n - 1)];
      };
      m.sampled_units = {snap(-0.5), snap(0.0), snap(0.5)};
    } else {
      m.sampled_units = res.units;
    }
    m.r_inj = kInf;
  } else if (name == "transf-circle-rotation") {
    m.family = Family::Transformation;
    m.group.kind = GroupKind::U1;
    m.group.dim = 1;
    m.base = Chart::circle(def(res.base_points, 512));
    m.group_axis0 = m.base;
    m.fiber = FiberGrid::make(1, def(res.fiber_points, 512), def(res.fiber_window, 12.0));
    m.action = [](const std::array<double, 2>& x, double q) { return wrap_2pi(q + x[0]); };
    if (res.units.empty()) {
      const double h = m.base.spacing;
      m.sampled_units = {0.0, (m.base.n / 3) * h};
    } else {
      m.sampled_units = res.units;
    }
    m.r_inj = M_PI - 0.05;
  } else {
    throw std::invalid_argument("make_example: unknown example '" + name + "'");
  }

  m.base_fine = fine_of(m.base);
  if (m.group.dim > 0) check_structure_jacobi(m.group);
  if (m.family == Family::Transformation) {
    check_action(m);
    for (double q : m.sampled_units)
      if (!m.base.index_of(q))
        throw std::invalid_argument("sampled unit does not lie on the base grid");
  }
  return m;
}

double GroupoidModel::leb_norm(double q) const {
  if (has_metric) return metric.sqrtg(q);
  return 1.0;
}

double GroupoidModel::fiber_density(double w) const {
  if (has_metric) return metric.sqrtg(w);
  return 1.0;
}

// ---------------- structure maps ----------------

double source_of(const GroupoidModel& m, const GPoint& g) {
  switch (m.family) {
    case Family::Pair:
      return g.c[1];
    case Family::LieGroup:
      return 0.0;
    case Family::Transformation:
      return m.action(m.group.inv({g.c[0], 0.0}), g.c[1]);
  }
  return 0.0;
}

double target_of(const GroupoidModel& m, const GPoint& g) {
  switch (m.family) {
    case Family::Pair:
      return g.c[0];
    case Family::LieGroup:
      return 0.0;
    case Family::Transformation:
      return g.c[1];
  }
  return 0.0;
}

GPoint unit_of(const GroupoidModel& m, double q) {
  switch (m.family) {
    case Family::Pair:
      return {{q, q}};
    case Family::LieGroup: {
      const auto e = m.group.identity();
      return {{e[0], e[1]}};
    }
    case Family::Transformation: {
      const auto e = m.group.identity();
      return {{e[0], q}};
    }
  }
  return {};
}

GPoint invert(const GroupoidModel& m, const GPoint& g) {
  switch (m.family) {
    case Family::Pair:
      return {{g.c[1], g.c[0]}};
    case Family::LieGroup: {
      const auto i = m.group.inv({g.c[0], g.c[1]});
      return {{i[0], i[1]}};
    }
    case Family::Transformation: {
      const auto xi = m.group.inv({g.c[0], 0.0});
      return {{xi[0], m.action(xi, g.c[1])}};
    }
  }
  return {};
}

std::optional<GPoint> compose(const GroupoidModel& m, const GPoint& g1,
                              const GPoint& g2, double tol) {
  const double s1 = source_of(m, g1), t2 = target_of(m, g2);
  const double gap = m.has_base() ? m.base.diff(s1, t2) : 0.0;
  if (std::abs(gap) > tol) return std::nullopt;
  switch (m.family) {
    case Family::Pair:
      return GPoint{{g1.c[0], g2.c[1]}};
    case Family::LieGroup: {
      const auto p = m.group.mul({g1.c[0], g1.c[1]}, {g2.c[0], g2.c[1]});
      return GPoint{{p[0], p[1]}};
    }
    case Family::Transformation: {
      const auto p = m.group.mul({g1.c[0], 0.0}, {g2.c[0], 0.0});
      return GPoint{{p[0], g1.c[1]}};
    }
  }
  return std::nullopt;
}

// ---------------- Haar system ----------------

namespace {

HaarSystem haar_impl(const GroupoidModel& m, std::function<double(double)> density) {
  HaarSystem h;
  h.model = &m;
  if (m.family == Family::Pair) {
    h.base_density = density;
    h.leb_norm = [density](double q) { return density(q); };
    if (m.has_metric) {
      const CircleMetric* met = &m.metric;
      h.jacobian = [met, density](double q, const std::array<double, 2>& X) {
        if (X[0] == 0.0) return 1.0;
        const double e = met->exp_q(q, X[0]);
        return density(e) * met->dexp_q(q, X[0]) / density(q);
      };
    } else {
      h.jacobian = [density](double q, const std::array<double, 2>& X) {
        if (X[0] == 0.0) return 1.0;
        return density(q + X[0]) / density(q);
      };
    }
  } else {
    h.base_density = [](double) { return 1.0; };
    h.leb_norm = [](double) { return 1.0; };
    const GroupOps* g = &m.group;
    h.jacobian = [g](double, const std::array<double, 2>& X) { return g->exp_jacobian(X); };
  }
  return h;
}

}  // namespace

HaarSystem build_haar_system(const GroupoidModel& m) {
  if (m.family == Family::Pair && m.has_metric) {
    const CircleMetric* met = &m.metric;
    return haar_impl(m, [met](double w) { return met->sqrtg(w); });
  }
  return haar_impl(m, [](double) { return 1.0; });
}

HaarSystem build_haar_system(const GroupoidModel& m,
                             std::function<double(double)> density) {
  if (m.family != Family::Pair)
    throw std::invalid_argument("custom fiber densities are only supported for pair families");
  return haar_impl(m, std::move(density));
}

double haar_jacobian(const GroupoidModel& m, const HaarSystem& h, double q,
                     const std::array<double, 2>& X) {
  (void)m;
  return h.jacobian(q, X);
}

}  // namespace gwq
