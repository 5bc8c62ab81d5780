#include "gwq/fourier.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <stdexcept>
#include <utility>

namespace gwq {

namespace {

// Shared in-place FFTW plans keyed by (length, direction). Single-threaded.
struct PlanSlot {
  fftw_plan plan = nullptr;
  fftw_complex* buf = nullptr;
};

PlanSlot& plan_for(int n, int dir) {
  static std::map<std::pair<int, int>, PlanSlot> cache;
  auto key = std::make_pair(n, dir);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  PlanSlot slot;
  slot.buf = fftw_alloc_complex(static_cast<size_t>(n));
  slot.plan = fftw_plan_dft_1d(n, slot.buf, slot.buf, dir, FFTW_ESTIMATE);
  if (!slot.plan) throw std::runtime_error("fftw plan creation failed");
  return cache.emplace(key, slot).first->second;
}

// Centered transform out_k = sum_j e^{-i sgn theta_k X_j} in_j on the
// symmetric grids X_j = (j - n/2) dX, theta_k = (k - n/2) dtheta with
// dX dtheta = 2 pi / n. Phase folding by (-1)^j / (-1)^k; needs 4 | n.
void centered_dft(int n, int dir, const cplx* in, cplx* out) {
  if (n % 4 != 0) throw std::invalid_argument("centered_dft: length must be a multiple of 4");
  auto& slot = plan_for(n, dir);
  for (int j = 0; j < n; ++j) {
    cplx v = (j & 1) ? -in[j] : in[j];
    slot.buf[j][0] = v.real();
    slot.buf[j][1] = v.imag();
  }
  fftw_execute(slot.plan);
  for (int k = 0; k < n; ++k) {
    cplx v{slot.buf[k][0], slot.buf[k][1]};
    out[k] = (k & 1) ? -v : v;
  }
}

int row_count(const GroupoidModel& m) {
  return m.has_base() ? static_cast<int>(m.base_fine.points.size()) : 1;
}

double row_point(const GroupoidModel& m, int r) {
  return m.has_base() ? m.base_fine.points[static_cast<size_t>(r)] : 0.0;
}

void check_shape(const GroupoidModel& m, const MatrixXcd& a, const char* who) {
  if (a.rows() != row_count(m) || a.cols() != m.fiber.n_axis)
    throw std::invalid_argument(std::string(who) + ": sample matrix shape mismatch");
}

// Reject data with visible amplitude on the outermost grid columns; such
// input aliases under the periodic transform.
void check_boundary(const MatrixXcd& a, double rel_tol, const char* who) {
  const double amax = a.cwiseAbs().maxCoeff();
  if (amax == 0.0) return;
  const Eigen::Index n = a.cols();
  double edge = 0;
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    for (Eigen::Index j : {Eigen::Index(0), Eigen::Index(1), n - 2, n - 1})
      edge = std::max(edge, std::abs(a(r, j)));
  if (edge > rel_tol * amax)
    throw std::domain_error(std::string(who) + ": support touches the grid window boundary");
}

constexpr double kFtBoundaryRel = 1e-11;
constexpr double kDualBoundaryRel = 1e-8;
constexpr double kClipRel = 1e-13;

// Gaussian truncation point: tails below 1e-14 of the peak are clipped.
const double kGaussTruncSigmas = std::sqrt(2.0 * std::log(1e14));

double gauss_trunc(double x, double s) {
  if (std::abs(x) >= kGaussTruncSigmas * s) return 0.0;
  return std::exp(-x * x / (2.0 * s * s));
}

double moll(double x, double r) {
  const double u = x / r;
  const double w = 1.0 - u * u;
  if (w <= 0.0) return 0.0;
  return std::exp(-1.0 / w);
}

struct AxisFactor {
  std::function<cplx(double)> eval;
  double support = 0;
  double trunc_radius = 0;  // 0 for exactly supported profiles
  double trunc_mass = 0;
};

AxisFactor gauss_axis(double s) {
  AxisFactor ax;
  ax.eval = [s](double x) { return cplx(gauss_trunc(x, s), 0.0); };
  ax.support = kGaussTruncSigmas * s;
  ax.trunc_radius = ax.support;
  ax.trunc_mass = std::erfc(kGaussTruncSigmas / std::sqrt(2.0));
  return ax;
}

// Two Gaussians at +-m with an odd imaginary combination; satisfies
// ax(-x) = conj(ax(x)) bitwise, so the transform is real.
AxisFactor gauss_pair_axis(double s, double m) {
  AxisFactor ax;
  ax.eval = [s, m](double x) {
    const double gp = gauss_trunc(x - m, s);
    const double gm = gauss_trunc(x + m, s);
    return cplx(gp + gm, gp - gm);
  };
  ax.support = m + kGaussTruncSigmas * s;
  ax.trunc_radius = ax.support;
  ax.trunc_mass = std::erfc(kGaussTruncSigmas / std::sqrt(2.0));
  return ax;
}

AxisFactor moll_axis(double r) {
  AxisFactor ax;
  ax.eval = [r](double x) { return cplx(moll(x, r), 0.0); };
  ax.support = r;
  return ax;
}

std::function<double(double)> make_envelope(const GroupoidModel& m, double center,
                                            double width, double kappa) {
  if (!m.has_base()) return [](double) { return 1.0; };
  if (m.base.kind == ChartKind::Circle) {
    return [center, kappa](double q) { return std::exp(kappa * (std::cos(q - center) - 1.0)); };
  }
  return [center, width](double q) {
    const double u = (q - center) / width;
    return std::exp(-u * u);
  };
}

struct CatalogEntry {
  // 1D-fiber factor parameters
  double s = 0, m = 0, radius = 0;
  bool pair_shift = false;
  bool mollifier = false;
  // envelope defaults
  double line_center = 0, line_width = 1.0;
  double circ_center = 0, circ_kappa = 2.0;
  // affine per-axis parameters
  double s0 = 0, s1 = 0, r0 = 0, r1 = 0, m0 = 0;
};

CatalogEntry catalog_entry(const std::string& id) {
  CatalogEntry e;
  if (id == "gauss-a") {
    e.s = 0.5;
    e.s0 = 0.4; e.s1 = 0.5;
  } else if (id == "gauss-b") {
    e.s = 0.35; e.m = 0.5; e.pair_shift = true;
    e.line_center = 0.4; e.line_width = 0.8;
    e.circ_center = 0.7; e.circ_kappa = 2.5;
    e.s0 = 0.45; e.m0 = 0.5; e.s1 = 0.4;
  } else if (id == "moll-a") {
    e.mollifier = true; e.radius = 2.0;
    e.r0 = 1.6; e.r1 = 2.0;
  } else if (id == "moll-b") {
    e.mollifier = true; e.radius = 1.5;
    e.line_center = 0.4; e.line_width = 0.8;
    e.circ_center = 0.7; e.circ_kappa = 2.5;
    e.r0 = 1.2; e.r1 = 1.5;
  } else {
    throw std::invalid_argument("unknown observable id: " + id);
  }
  return e;
}

TensorTerm build_term(const FiberGrid& fg, cplx coeff, const AxisFactor& a0,
                      const AxisFactor& a1) {
  TensorTerm t;
  t.coeff = coeff;
  const int n = fg.n_axis;
  t.ft0.resize(n);
  t.ft1.resize(n);
  for (int j = 0; j < n; ++j) {
    t.ft0[j] = a0.eval(fg.axis[static_cast<size_t>(j)]);
    t.ft1[j] = a1.eval(fg.axis[static_cast<size_t>(j)]);
  }
  t.dual0 = axis_fourier(fg, t.ft0);
  t.dual1 = axis_fourier(fg, t.ft1);
  t.ft0_closed = a0.eval;
  t.ft1_closed = a1.eval;
  return t;
}

// Max |sum_t coeff dual0(th0) dual1(th1)| over the theta grid.
double sup_terms(const FiberGrid& fg, const std::vector<TensorTerm>& terms) {
  const int n = fg.n_axis;
  double best = 0;
  for (int k0 = 0; k0 < n; ++k0) {
    for (int k1 = 0; k1 < n; ++k1) {
      cplx v = 0;
      for (const auto& t : terms) v += t.coeff * t.dual0[k0] * t.dual1[k1];
      best = std::max(best, std::abs(v));
    }
  }
  return best;
}

// Clip entries of v below rel_tol * max|v|; returns clipped L1 fraction.
double clip_small(VectorXcd& v, double rel_tol) {
  const double amax = v.cwiseAbs().maxCoeff();
  if (amax == 0.0) return 0.0;
  double total = 0, clipped = 0;
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    const double a = std::abs(v[j]);
    total += a;
    if (a < rel_tol * amax) {
      clipped += a;
      v[j] = 0.0;
    }
  }
  return total > 0 ? clipped / total : 0.0;
}

double axis_support_radius(const FiberGrid& fg, const VectorXcd& ft) {
  double r = 0;
  for (Eigen::Index j = 0; j < ft.size(); ++j)
    if (ft[j] != cplx(0.0, 0.0)) r = std::max(r, std::abs(fg.axis[static_cast<size_t>(j)]));
  return r;
}

}  // namespace

MatrixXcd fiber_fourier(const GroupoidModel& m, const MatrixXcd& ft) {
  check_shape(m, ft, "fiber_fourier");
  check_boundary(ft, kFtBoundaryRel, "fiber_fourier");
  const int n = m.fiber.n_axis;
  MatrixXcd out(ft.rows(), n);
  VectorXcd row(n), res(n);
  for (Eigen::Index r = 0; r < ft.rows(); ++r) {
    row = ft.row(r);
    centered_dft(n, FFTW_FORWARD, row.data(), res.data());
    out.row(r) = res * (m.leb_norm(row_point(m, static_cast<int>(r))) * m.fiber.dx);
  }
  return out;
}

MatrixXcd fiber_inverse_fourier(const GroupoidModel& m, const MatrixXcd& dual) {
  check_shape(m, dual, "fiber_inverse_fourier");
  check_boundary(dual, kDualBoundaryRel, "fiber_inverse_fourier");
  const int n = m.fiber.n_axis;
  MatrixXcd out(dual.rows(), n);
  VectorXcd row(n), res(n);
  for (Eigen::Index r = 0; r < dual.rows(); ++r) {
    row = dual.row(r);
    centered_dft(n, FFTW_BACKWARD, row.data(), res.data());
    const double c = m.leb_norm(row_point(m, static_cast<int>(r)));
    out.row(r) = res * (m.fiber.dtheta / (kTwoPi * c));
  }
  return out;
}

MatrixXcd fiber_fourier_direct(const GroupoidModel& m, const MatrixXcd& ft) {
  check_shape(m, ft, "fiber_fourier_direct");
  check_boundary(ft, kFtBoundaryRel, "fiber_fourier_direct");
  const int n = m.fiber.n_axis;
  MatrixXcd out(ft.rows(), n);
  for (Eigen::Index r = 0; r < ft.rows(); ++r) {
    const double c = m.leb_norm(row_point(m, static_cast<int>(r)));
    for (int k = 0; k < n; ++k) {
      const double th = m.fiber.theta_axis[static_cast<size_t>(k)];
      cplx acc = 0;
      for (int j = 0; j < n; ++j)
        acc += std::exp(cplx(0.0, -th * m.fiber.axis[static_cast<size_t>(j)])) * ft(r, j);
      out(r, k) = acc * c * m.fiber.dx;
    }
  }
  return out;
}

MatrixXcd fiber_inverse_fourier_direct(const GroupoidModel& m, const MatrixXcd& dual) {
  check_shape(m, dual, "fiber_inverse_fourier_direct");
  check_boundary(dual, kDualBoundaryRel, "fiber_inverse_fourier_direct");
  const int n = m.fiber.n_axis;
  MatrixXcd out(dual.rows(), n);
  for (Eigen::Index r = 0; r < dual.rows(); ++r) {
    const double c = m.leb_norm(row_point(m, static_cast<int>(r)));
    for (int j = 0; j < n; ++j) {
      const double x = m.fiber.axis[static_cast<size_t>(j)];
      cplx acc = 0;
      for (int k = 0; k < n; ++k)
        acc += std::exp(cplx(0.0, m.fiber.theta_axis[static_cast<size_t>(k)] * x)) * dual(r, k);
      out(r, j) = acc * m.fiber.dtheta / (kTwoPi * c);
    }
  }
  return out;
}

VectorXcd dft_forward(const VectorXcd& v) {
  const int n = static_cast<int>(v.size());
  auto& slot = plan_for(n, FFTW_FORWARD);
  for (int j = 0; j < n; ++j) {
    slot.buf[j][0] = v[j].real();
    slot.buf[j][1] = v[j].imag();
  }
  fftw_execute(slot.plan);
  VectorXcd out(n);
  for (int k = 0; k < n; ++k) out[k] = cplx{slot.buf[k][0], slot.buf[k][1]};
  return out;
}

VectorXcd axis_fourier(const FiberGrid& fg, const VectorXcd& ft) {
  if (ft.size() != fg.n_axis) throw std::invalid_argument("axis_fourier: length mismatch");
  VectorXcd out(fg.n_axis);
  centered_dft(fg.n_axis, FFTW_FORWARD, ft.data(), out.data());
  return out * fg.dx;
}

VectorXcd axis_inverse_fourier(const FiberGrid& fg, const VectorXcd& dual) {
  if (dual.size() != fg.n_axis) throw std::invalid_argument("axis_inverse_fourier: length mismatch");
  VectorXcd out(fg.n_axis);
  centered_dft(fg.n_axis, FFTW_BACKWARD, dual.data(), out.data());
  return out * (fg.dtheta / kTwoPi);
}

PWObservable make_pw_observable(const GroupoidModel& m, const ObservableSpec& spec) {
  CatalogEntry e = catalog_entry(spec.id);
  if (spec.s > 0) { e.s = spec.s; e.s0 = spec.s; e.s1 = spec.s; }
  if (spec.m > 0) { e.m = spec.m; e.m0 = spec.m; }
  if (spec.radius > 0) { e.radius = spec.radius; e.r0 = spec.radius; e.r1 = spec.radius; }
  double env_c = std::isnan(spec.env_center)
                     ? (m.has_base() && m.base.kind == ChartKind::Circle ? e.circ_center
                                                                         : e.line_center)
                     : spec.env_center;
  double env_w = spec.env_width > 0 ? spec.env_width : e.line_width;
  double env_k = spec.env_kappa > 0 ? spec.env_kappa : e.circ_kappa;

  PWObservable f;
  f.model = &m;
  f.id = spec.id;
  f.selfadj = true;  // every catalog profile transforms to a real function

  if (m.fiber_dim == 2) {
    AxisFactor a0 = e.mollifier ? moll_axis(e.r0)
                                : (e.pair_shift ? gauss_pair_axis(e.s0, e.m0) : gauss_axis(e.s0));
    AxisFactor a1 = e.mollifier ? moll_axis(e.r1) : gauss_axis(e.s1);
    if (std::max(a0.support, a1.support) >= m.fiber.half_width)
      throw std::domain_error("observable support reaches the fiber window");
    f.terms.push_back(build_term(m.fiber, cplx(spec.amp, 0.0), a0, a1));
    f.support_radius = std::max(a0.support, a1.support);
    f.trunc_radius = std::max(a0.trunc_radius, a1.trunc_radius);
    f.trunc_mass = std::max(a0.trunc_mass, a1.trunc_mass);
    return f;
  }

  AxisFactor ax = e.mollifier ? moll_axis(e.radius)
                              : (e.pair_shift ? gauss_pair_axis(e.s, e.m) : gauss_axis(e.s));
  if (ax.support >= m.fiber.half_width)
    throw std::domain_error("observable support reaches the fiber window");
  auto env = make_envelope(m, env_c, env_w, env_k);

  const int rows = m.has_base() ? static_cast<int>(m.base_fine.points.size()) : 1;
  const int n = m.fiber.n_axis;
  f.ft.resize(rows, n);
  for (int r = 0; r < rows; ++r) {
    const double ev = env(row_point(m, r)) * spec.amp;
    for (int j = 0; j < n; ++j)
      f.ft(r, j) = ev * ax.eval(m.fiber.axis[static_cast<size_t>(j)]);
  }
  f.dual = fiber_fourier(m, f.ft);
  const double amp = spec.amp;
  auto axe = ax.eval;
  f.ft_closed = [axe, env, amp](double X, double q) { return amp * env(q) * axe(X); };
  f.support_radius = ax.support;
  f.trunc_radius = ax.trunc_radius;
  f.trunc_mass = ax.trunc_mass;
  return f;
}

PWObservable project_to_pw(const GroupoidModel& m, const MatrixXcd& dual,
                           const std::string& id) {
  PWObservable f;
  f.model = &m;
  f.id = id;
  MatrixXcd ft = fiber_inverse_fourier(m, dual);
  const double amax = ft.cwiseAbs().maxCoeff();
  double total = 0, clipped = 0;
  for (Eigen::Index r = 0; r < ft.rows(); ++r) {
    for (Eigen::Index j = 0; j < ft.cols(); ++j) {
      const double a = std::abs(ft(r, j));
      total += a;
      if (a < kClipRel * amax) {
        clipped += a;
        ft(r, j) = 0.0;
      }
    }
  }
  f.trunc_mass = total > 0 ? clipped / total : 0.0;
  const int n = m.fiber.n_axis;
  for (Eigen::Index j = 0; j < n; ++j) {
    bool live = false;
    for (Eigen::Index r = 0; r < ft.rows() && !live; ++r) live = ft(r, j) != cplx(0.0, 0.0);
    if (live) f.support_radius = std::max(f.support_radius, std::abs(m.fiber.axis[static_cast<size_t>(j)]));
  }
  f.ft = std::move(ft);
  f.dual = fiber_fourier(m, f.ft);  // re-checks the window boundary
  if (amax > 0) {
    double herm = 0;
    for (Eigen::Index r = 0; r < f.ft.rows(); ++r)
      for (int j = 1; j < n; ++j)
        herm = std::max(herm, std::abs(f.ft(r, n - j) - std::conj(f.ft(r, j))));
    f.selfadj = herm <= 1e-12 * amax;
  }
  return f;
}

PWObservable project_terms_to_pw(const GroupoidModel& m, std::vector<TensorTerm> terms,
                                 const std::string& id) {
  PWObservable f;
  f.model = &m;
  f.id = id;
  for (auto& t : terms) {
    t.ft0 = axis_inverse_fourier(m.fiber, t.dual0);
    t.ft1 = axis_inverse_fourier(m.fiber, t.dual1);
    f.trunc_mass = std::max(f.trunc_mass, clip_small(t.ft0, kClipRel));
    f.trunc_mass = std::max(f.trunc_mass, clip_small(t.ft1, kClipRel));
    const double r0 = axis_support_radius(m.fiber, t.ft0);
    const double r1 = axis_support_radius(m.fiber, t.ft1);
    if (std::max(r0, r1) >= m.fiber.half_width - m.fiber.dx)
      throw std::domain_error("projected observable touches the fiber window");
    f.support_radius = std::max(f.support_radius, std::max(r0, r1));
    t.dual0 = axis_fourier(m.fiber, t.ft0);
    t.dual1 = axis_fourier(m.fiber, t.ft1);
    t.ft0_closed = nullptr;
    t.ft1_closed = nullptr;
  }
  f.terms = std::move(terms);
  return f;
}

PWObservable pw_conj(const PWObservable& f) {
  PWObservable g = f;
  g.id = "conj(" + f.id + ")";
  if (!f.terms.empty()) {
    for (auto& t : g.terms) {
      t.coeff = std::conj(t.coeff);
      const Eigen::Index n = t.ft0.size();
      VectorXcd a(n), b(n);
      for (Eigen::Index j = 0; j < n; ++j) {
        a[j] = std::conj(t.ft0[(n - j) % n]);
        b[j] = std::conj(t.ft1[(n - j) % n]);
      }
      t.ft0 = a;
      t.ft1 = b;
      t.dual0 = t.dual0.conjugate();
      t.dual1 = t.dual1.conjugate();
      auto c0 = t.ft0_closed, c1 = t.ft1_closed;
      t.ft0_closed = c0 ? [c0](double x) { return std::conj(c0(-x)); }
                        : std::function<cplx(double)>();
      t.ft1_closed = c1 ? [c1](double x) { return std::conj(c1(-x)); }
                        : std::function<cplx(double)>();
    }
    return g;
  }
  const Eigen::Index n = f.ft.cols();
  for (Eigen::Index r = 0; r < f.ft.rows(); ++r)
    for (Eigen::Index j = 0; j < n; ++j) g.ft(r, j) = std::conj(f.ft(r, (n - j) % n));
  g.dual = f.dual.conjugate();
  if (f.ft_closed) {
    auto fc = f.ft_closed;
    g.ft_closed = [fc](double X, double q) { return std::conj(fc(-X, q)); };
  }
  return g;
}

PWObservable pw_product(const PWObservable& f, const PWObservable& g) {
  if (f.model != g.model) throw std::invalid_argument("pw_product: different models");
  const std::string id = f.id + "*" + g.id;
  if (!f.terms.empty()) {
    std::vector<TensorTerm> out;
    for (const auto& a : f.terms) {
      for (const auto& b : g.terms) {
        TensorTerm t;
        t.coeff = a.coeff * b.coeff;
        t.dual0 = a.dual0.cwiseProduct(b.dual0);
        t.dual1 = a.dual1.cwiseProduct(b.dual1);
        out.push_back(std::move(t));
      }
    }
    return project_terms_to_pw(*f.model, std::move(out), id);
  }
  return project_to_pw(*f.model, f.dual.cwiseProduct(g.dual), id);
}

cplx ft_at(const PWObservable& f, double X, int fine_row) {
  if (f.ft_closed) return f.ft_closed(X, row_point(*f.model, fine_row));
  const auto& fg = f.model->fiber;
  const double c = f.model->leb_norm(row_point(*f.model, fine_row));
  cplx acc = 0;
  for (int k = 0; k < fg.n_axis; ++k)
    acc += std::exp(cplx(0.0, fg.theta_axis[static_cast<size_t>(k)] * X)) * f.dual(fine_row, k);
  return acc * fg.dtheta / (kTwoPi * c);
}

cplx ft_at2(const PWObservable& f, double X0, double X1) {
  const auto& fg = f.model->fiber;
  auto axis_eval = [&fg](const std::function<cplx(double)>& closed, const VectorXcd& dual,
                         double X) {
    if (closed) return closed(X);
    cplx acc = 0;
    for (int k = 0; k < fg.n_axis; ++k)
      acc += std::exp(cplx(0.0, fg.theta_axis[static_cast<size_t>(k)] * X)) * dual[k];
    return acc * fg.dtheta / kTwoPi;
  };
  cplx v = 0;
  for (const auto& t : f.terms)
    v += t.coeff * axis_eval(t.ft0_closed, t.dual0, X0) * axis_eval(t.ft1_closed, t.dual1, X1);
  return v;
}

double sup_dual(const PWObservable& f) {
  if (!f.terms.empty()) return sup_terms(f.model->fiber, f.terms);
  return f.dual.cwiseAbs().maxCoeff();
}

}  // namespace gwq
