#include "gwq/expmaps.hpp"

#include <algorithm>

namespace gwq {

namespace {

double fiber_norm(const GroupoidModel& m, const AlgebroidVector& X) {
  if (m.fiber_dim == 1) return std::abs(X.X[0]);
  return std::hypot(X.X[0], X.X[1]);
}

void require_in_window(const Chart& c, double q, const char* what) {
  if (c.kind == ChartKind::LineWindow && std::abs(q) > c.window + 1e-12)
    throw std::domain_error(std::string(what) + " leaves the chart window");
}

void require_injectivity(const GroupoidModel& m, double r, const char* what) {
  if (r >= m.r_inj)
    throw std::domain_error(std::string(what) + " lies outside the injectivity window");
}

struct GeoState {
  double q, p;
};

GeoState rk4_step(const std::function<double(double)>& gamma, GeoState y, double h) {
  auto f = [&gamma](GeoState s) {
    return GeoState{s.p, -gamma(s.q) * s.p * s.p};
  };
  GeoState k1 = f(y);
  GeoState k2 = f({y.q + 0.5 * h * k1.q, y.p + 0.5 * h * k1.p});
  GeoState k3 = f({y.q + 0.5 * h * k2.q, y.p + 0.5 * h * k2.p});
  GeoState k4 = f({y.q + h * k3.q, y.p + h * k3.p});
  return {y.q + h / 6.0 * (k1.q + 2 * k2.q + 2 * k3.q + k4.q),
          y.p + h / 6.0 * (k1.p + 2 * k2.p + 2 * k3.p + k4.p)};
}

GeoState integrate_geodesic(const std::function<double(double)>& gamma, GeoState y0,
                            double t) {
  const double tol = 1e-12;
  if (t == 0.0) return y0;
  const double dir = t > 0 ? 1.0 : -1.0;
  double remaining = std::abs(t);
  double h = remaining / 8.0;
  GeoState y = y0;
  int guard = 0;
  while (remaining > 0.0) {
    if (++guard > 100000) throw std::runtime_error("geodesic integrator failed to converge");
    h = std::min(h, remaining);
    GeoState full = rk4_step(gamma, y, dir * h);
    GeoState half = rk4_step(gamma, rk4_step(gamma, y, dir * h / 2), dir * h / 2);
    const double err =
        std::max(std::abs(full.q - half.q), std::abs(full.p - half.p)) / 15.0;
    if (err <= tol) {
      y = half;
      remaining -= h;
      h *= std::clamp(0.9 * std::pow(tol / std::max(err, 1e-300), 0.2), 1.0, 5.0);
    } else {
      h *= std::clamp(0.9 * std::pow(tol / err, 0.2), 0.2, 0.9);
    }
  }
  return y;
}

}  // namespace

ConnectionDescriptor default_connection(const GroupoidModel& m) {
  ConnectionDescriptor c;
  switch (m.family) {
    case Family::Pair:
      if (m.has_metric) {
        c.kind = ConnectionKind::LeviCivita1D;
        const CircleMetric* met = &m.metric;
        c.gamma = [met](double q) { return met->dg(q) / (2.0 * met->g(q)); };
      } else {
        c.kind = ConnectionKind::Flat;
      }
      break;
    case Family::LieGroup:
      c.kind = ConnectionKind::GroupTrivial;
      break;
    case Family::Transformation:
      c.kind = ConnectionKind::ActionTrivial;
      break;
  }
  return c;
}

InjectivityWindow injectivity_window(const GroupoidModel& m) { return {m.r_inj}; }

AlgebroidVector geodesic_flow(const GroupoidModel& m, const ConnectionDescriptor& c,
                              const AlgebroidVector& X0, double t) {
  AlgebroidVector out = X0;
  switch (c.kind) {
    case ConnectionKind::Flat:
      out.q = X0.q + t * X0.X[0];
      require_in_window(m.base, out.q, "geodesic flow");
      break;
    case ConnectionKind::LeviCivita1D: {
      const GeoState y = integrate_geodesic(c.gamma, {X0.q, X0.X[0]}, t);
      out.q = m.base.wrap(y.q);
      out.X[0] = y.p;
      break;
    }
    case ConnectionKind::GroupTrivial:
      break;  // zero anchor: fixed base, parallel fiber
    case ConnectionKind::ActionTrivial: {
      // anchor of the action algebroid is minus the action vector field
      const auto g = m.group.exp({-t * X0.X[0], -t * X0.X[1]});
      out.q = m.base.wrap(m.action(g, X0.q));
      require_in_window(m.base, out.q, "geodesic flow");
      break;
    }
  }
  return out;
}

GPoint exp_left(const GroupoidModel& m, const ConnectionDescriptor& c,
                const AlgebroidVector& X) {
  require_injectivity(m, fiber_norm(m, X), "exp_left argument");
  switch (m.family) {
    case Family::Pair: {
      double y;
      if (c.kind == ConnectionKind::LeviCivita1D) {
        y = m.base.wrap(integrate_geodesic(c.gamma, {X.q, X.X[0]}, 1.0).q);
      } else {
        y = X.q + X.X[0];
        require_in_window(m.base, y, "exp_left endpoint");
      }
      return {{X.q, y}};
    }
    case Family::LieGroup: {
      const auto g = m.group.exp(X.X);
      return {{g[0], g[1]}};
    }
    case Family::Transformation: {
      const auto g = m.group.exp(X.X);
      require_in_window(m.group_axis0, g[0], "exp_left endpoint");
      return {{g[0], X.q}};
    }
  }
  return {};
}

GPoint exp_weyl(const GroupoidModel& m, const ConnectionDescriptor& c,
                const AlgebroidVector& X) {
  require_injectivity(m, 0.5 * fiber_norm(m, X), "exp_weyl argument");
  switch (m.family) {
    case Family::Pair: {
      double xm, xp;
      if (c.kind == ConnectionKind::LeviCivita1D) {
        xm = m.base.wrap(integrate_geodesic(c.gamma, {X.q, -0.5 * X.X[0]}, 1.0).q);
        xp = m.base.wrap(integrate_geodesic(c.gamma, {X.q, 0.5 * X.X[0]}, 1.0).q);
      } else {
        xm = X.q - 0.5 * X.X[0];
        xp = X.q + 0.5 * X.X[0];
        require_in_window(m.base, xm, "exp_weyl endpoint");
        require_in_window(m.base, xp, "exp_weyl endpoint");
      }
      return {{xm, xp}};
    }
    case Family::LieGroup: {
      const auto g = m.group.exp(X.X);
      return {{g[0], g[1]}};
    }
    case Family::Transformation: {
      const auto g = m.group.exp(X.X);
      const auto gh = m.group.exp({0.5 * X.X[0], 0.5 * X.X[1]});
      require_in_window(m.group_axis0, g[0], "exp_weyl endpoint");
      const double qt = m.base.wrap(m.action(gh, X.q));
      require_in_window(m.base, qt, "exp_weyl endpoint");
      return {{g[0], qt}};
    }
  }
  return {};
}

std::optional<AlgebroidVector> weyl_log(const GroupoidModel& m, const GPoint& g) {
  AlgebroidVector out;
  switch (m.family) {
    case Family::Pair: {
      if (m.has_metric) {
        const CircleMetric& met = m.metric;
        const double C = met.total_length;
        double d = std::fmod(met.ell(wrap_2pi(g.c[1])) - met.ell(wrap_2pi(g.c[0])), C);
        if (d > 0.5 * C) d -= C;
        if (d < -0.5 * C) d += C;
        const double mid = met.ell(wrap_2pi(g.c[0])) + 0.5 * d;
        out.q = wrap_2pi(met.ell_inverse(mid));
        out.X[0] = d / met.sqrtg(out.q);
        if (std::abs(out.X[0]) > m.r_inj) return std::nullopt;
      } else {
        out.X[0] = g.c[1] - g.c[0];
        out.q = 0.5 * (g.c[0] + g.c[1]);
      }
      return out;
    }
    case Family::LieGroup: {
      const auto X = m.group.log({g.c[0], g.c[1]});
      out.X = {X[0], X[1]};
      if (fiber_norm(m, out) > m.r_inj) return std::nullopt;
      return out;
    }
    case Family::Transformation: {
      const auto X = m.group.log({g.c[0], 0.0});
      out.X = {X[0], 0.0};
      if (std::abs(X[0]) > m.r_inj) return std::nullopt;
      const auto gmh = m.group.exp({-0.5 * X[0], 0.0});
      out.q = m.base.wrap(m.action(gmh, g.c[1]));
      return out;
    }
  }
  return std::nullopt;
}

}  // namespace gwq
