#include "gwq/quantize.hpp"

#include <cmath>
#include <stdexcept>

namespace gwq {

namespace {

using A2 = std::array<double, 2>;

double smooth_step_down(double u) {
  auto phi = [](double t) { return t > 0 ? std::exp(-1.0 / t) : 0.0; };
  const double a = phi(1.0 - u), b = phi(u);
  return a / (a + b);
}

// (dtheta/2pi) sum_k e^{i theta_k u} dual_k  — one axis factor of f-grave
cplx theta_sum(const FiberGrid& fg, const VectorXcd& dual, double u) {
  cplx acc = 0;
  for (int k = 0; k < fg.n_axis; ++k)
    acc += std::polar(1.0, fg.theta_axis[k] * u) * dual[k];
  return acc * (fg.dtheta / kTwoPi);
}

// Table of f-grave(u_r; q_s) over requested arguments x fine base points.
MatrixXcd ft_table(const GroupoidModel& m, const PWObservable& f, const VectorXd& u) {
  const Eigen::Index nf = m.base_fine.points.size();
  MatrixXcd V(u.size(), nf);
  if (f.ft_closed) {
    for (Eigen::Index r = 0; r < u.size(); ++r)
      for (Eigen::Index s = 0; s < nf; ++s)
        V(r, s) = f.ft_closed(u[r], m.base_fine.points[s]);
    return V;
  }
  const auto& fg = m.fiber;
  MatrixXcd E(u.size(), fg.n_axis);
  for (Eigen::Index r = 0; r < u.size(); ++r)
    for (int k = 0; k < fg.n_axis; ++k)
      E(r, k) = std::polar(fg.dtheta / kTwoPi, fg.theta_axis[k] * u[r]);
  V.noalias() = E * f.dual.transpose();
  for (Eigen::Index s = 0; s < nf; ++s) V.col(s) /= m.leb_norm(m.base_fine.points[s]);
  return V;
}

// Trigonometric interpolation of a derived observable in the base direction:
// f-grave(u; q) = sum_mu e^{i mu q} [ (dtheta/2pi) sum_k e^{i theta_k u}
// hat_h_mu(theta_k) ] / c(q), with negligible base modes dropped.
struct CircleModeEval {
  const GroupoidModel* m = nullptr;
  std::vector<int> mu;
  MatrixXcd rows;  // kept modes x theta grid

  void build(const PWObservable& f) {
    m = f.model;
    const int M = static_cast<int>(m->base_fine.points.size());
    const int nth = m->fiber.n_axis;
    MatrixXcd hat(M, nth);
    for (int k = 0; k < nth; ++k) hat.col(k) = dft_forward(f.dual.col(k)) / double(M);
    const double gmax = hat.cwiseAbs().maxCoeff();
    for (int r = 0; r < M; ++r) {
      const double rmax = hat.row(r).cwiseAbs().maxCoeff();
      if (gmax == 0.0 || rmax <= 1e-15 * gmax) continue;
      mu.push_back(r < M / 2 ? r : r - M);
      rows.conservativeResize(static_cast<Eigen::Index>(mu.size()), nth);
      rows.row(static_cast<Eigen::Index>(mu.size()) - 1) = hat.row(r);
    }
  }

  cplx eval(double u, double q) const {
    const auto& fg = m->fiber;
    VectorXcd ph(fg.n_axis);
    for (int k = 0; k < fg.n_axis; ++k) ph[k] = std::polar(1.0, fg.theta_axis[k] * u);
    cplx acc = 0;
    for (size_t r = 0; r < mu.size(); ++r) {
      cplx s = 0;
      for (int k = 0; k < fg.n_axis; ++k) s += rows(static_cast<Eigen::Index>(r), k) * ph[k];
      acc += std::polar(1.0, mu[r] * q) * s;
    }
    return acc * (fg.dtheta / (kTwoPi * m->leb_norm(q)));
  }
};

// 2D fiber evaluation with the first argument on the scaled lattice.
struct AffineFtEval {
  const PWObservable* f = nullptr;
  const FiberGrid* fg = nullptr;
  int m1 = 0;
  double du0 = 0;  // lattice step of the first argument (sign * dY)
  std::vector<VectorXcd> ax0cache;
  bool need_phase = false;

  void prepare(const PWObservable& obs, int m1_, double du0_) {
    f = &obs;
    fg = &obs.model->fiber;
    m1 = m1_;
    du0 = du0_;
    ax0cache.resize(f->terms.size());
    for (size_t t = 0; t < f->terms.size(); ++t) {
      const auto& tt = f->terms[t];
      if (!tt.ft1_closed) need_phase = true;
      if (tt.ft0_closed) continue;
      VectorXcd c(2 * m1 - 1);
      for (int D = -(m1 - 1); D <= m1 - 1; ++D)
        c[D + m1 - 1] = theta_sum(*fg, tt.dual0, D * du0);
      ax0cache[t] = std::move(c);
    }
  }

  // values at (D du0, u1) and the inverted argument (-D du0, -u1)
  void eval_pm(int D, double u1, cplx* vp, cplx* vm) const {
    VectorXcd ph;
    if (need_phase) {
      ph.resize(fg->n_axis);
      for (int k = 0; k < fg->n_axis; ++k) ph[k] = std::polar(1.0, fg->theta_axis[k] * u1);
    }
    const double u0 = D * du0;
    cplx accp = 0, accm = 0;
    for (size_t t = 0; t < f->terms.size(); ++t) {
      const auto& tt = f->terms[t];
      cplx a0p, a0m;
      if (tt.ft0_closed) {
        a0p = tt.ft0_closed(u0);
        a0m = tt.ft0_closed(-u0);
      } else {
        a0p = ax0cache[t][D + m1 - 1];
        a0m = ax0cache[t][-D + m1 - 1];
      }
      cplx a1p, a1m;
      if (tt.ft1_closed) {
        a1p = tt.ft1_closed(u1);
        a1m = tt.ft1_closed(-u1);
      } else {
        cplx sp = 0, sm = 0;
        for (int k = 0; k < fg->n_axis; ++k) {
          sp += ph[k] * tt.dual1[k];
          sm += std::conj(ph[k]) * tt.dual1[k];
        }
        a1p = sp * (fg->dtheta / kTwoPi);
        a1m = sm * (fg->dtheta / kTwoPi);
      }
      accp += tt.coeff * a0p * a1p;
      accm += tt.coeff * a0m * a1m;
    }
    *vp = accp;
    *vm = accm;
  }
};

void base_kernel_meta(KernelElement& K, const GroupoidModel& m, double hbar, int sign,
                      const PWObservable& f) {
  K.model = &m;
  K.hbar = hbar;
  K.sign = sign;
  K.label = f.id;
}

KernelElement assemble_line_family(const GroupoidModel& m, const PWObservable& f,
                                   double hbar, int sign, const Cutoff& kappa) {
  const Chart& ch = (m.family == Family::Pair) ? m.base : m.group_axis0;
  const int N = ch.n;
  const double h = ch.spacing;
  if (hbar * f.support_radius > 2.0 * ch.window + 1e-12)
    throw std::domain_error("weyl_quantize: kernel support exceeds the sample window");
  const double rmax = std::min(kappa.r_out, hbar * f.support_radius);
  const int b = std::min(N - 1, static_cast<int>(std::ceil(rmax / h)));

  VectorXd u(2 * b + 1);
  VectorXd kap(2 * b + 1);
  for (int d = -b; d <= b; ++d) {
    u[d + b] = sign * (d * h) / hbar;
    kap[d + b] = kappa(std::abs(d * h));
  }
  const MatrixXcd V = ft_table(m, f, u);
  const double scale = 1.0 / hbar;

  KernelElement K;
  base_kernel_meta(K, m, hbar, sign, f);
  K.dim = N;
  K.bandwidth = b;
  K.weights.resize(N);
  if (m.family == Family::Pair) {
    for (int i = 0; i < N; ++i) K.weights[i] = ch.weights[i] * m.fiber_density(ch.points[i]);
    MatrixXcd A = MatrixXcd::Zero(N, N);
    for (int i = 0; i < N; ++i)
      for (int j = std::max(0, i - b); j <= std::min(N - 1, i + b); ++j)
        A(i, j) = scale * kap[j - i + b] * V(j - i + b, i + j);
    K.mats.push_back(std::move(A));
    K.unit_q.push_back(0.0);  // unit-independent: one matrix serves every unit
    return K;
  }
  // translation action: index i is the fiber element with target point p_i,
  // so gamma_i gamma_j^{-1} has group coordinate p_i - p_j and Weyl midpoint
  // (p_i + p_j)/2 = fine row i + j, the same for every unit
  K.weights = ch.weights;
  MatrixXcd A = MatrixXcd::Zero(N, N);
  for (int i = 0; i < N; ++i)
    for (int j = std::max(0, i - b); j <= std::min(N - 1, i + b); ++j)
      A(i, j) = scale * kap[i - j + b] * V(i - j + b, i + j);
  for (double q : m.sampled_units) {
    K.unit_index.push_back(*m.base.index_of(q));
    K.unit_q.push_back(q);
    K.mats.push_back(A);
  }
  return K;
}

KernelElement assemble_pair_circle(const GroupoidModel& m, const PWObservable& f,
                                   double hbar, int sign, const Cutoff& kappa) {
  const Chart& ch = m.base;
  const int N = ch.n;
  const double scale = 1.0 / hbar;

  CircleModeEval mode;
  if (!f.ft_closed) mode.build(f);
  auto feval = [&](double uu, double q) {
    return f.ft_closed ? f.ft_closed(uu, q) : mode.eval(uu, q);
  };

  KernelElement K;
  base_kernel_meta(K, m, hbar, sign, f);
  K.dim = N;
  K.weights.resize(N);
  for (int i = 0; i < N; ++i) K.weights[i] = ch.weights[i] * m.fiber_density(ch.points[i]);
  MatrixXcd A = MatrixXcd::Zero(N, N);
  for (int i = 0; i < N; ++i) {
    for (int j = i; j < N; ++j) {
      const auto wl = weyl_log(m, GPoint{{ch.points[i], ch.points[j]}});
      if (!wl) continue;
      const double v = wl->X[0];
      const double kv = kappa(std::abs(v));
      if (kv == 0.0) continue;
      const double uu = sign * v / hbar;
      A(i, j) = scale * kv * feval(uu, wl->q);
      if (j != i) A(j, i) = scale * kv * feval(-uu, wl->q);
    }
  }
  K.mats.push_back(std::move(A));
  K.unit_q.push_back(0.0);
  return K;
}

KernelElement assemble_u1(const GroupoidModel& m, const PWObservable& f, double hbar,
                          int sign, const Cutoff& kappa) {
  const Chart& ch = m.group_axis0;
  const int N = ch.n;
  const double scale = 1.0 / hbar;
  KernelElement K;
  base_kernel_meta(K, m, hbar, sign, f);
  K.storage = StorageKind::CircVector;
  K.dim = N;
  K.weights = ch.weights;
  K.circ.setZero(N);
  auto feval = [&](double uu) { return f.ft_closed ? f.ft_closed(uu, 0.0) : ft_at(f, uu, 0); };
  // evaluate offsets d and n-d from one wrapped coordinate so the kernel of a
  // real observable comes out exactly hermitian
  for (int d = 0; d <= N / 2; ++d) {
    const double X = wrap_pm_pi(ch.points[d]);
    const double kv = kappa(std::abs(X));
    if (kv == 0.0) continue;
    const double uu = sign * X / hbar;
    K.circ[d] = scale * kv * feval(uu);
    if (d > 0 && d < N - d) K.circ[N - d] = scale * kv * feval(-uu);
  }
  return K;
}

KernelElement assemble_affine(const GroupoidModel& m, const PWObservable& f, double hbar,
                              int sign, const Cutoff& kappa) {
  const int m1 = m.scaled_points;
  const double R = m.scaled_halfwidth;
  const double dY = 2.0 * R / (m1 - 1);
  const int dim = m1 * m1;
  const double scale = 1.0 / (hbar * hbar);

  VectorXd Yv(m1), tz(m1);
  for (int a = 0; a < m1; ++a) {
    Yv[a] = -R + a * dY;
    tz[a] = (a == 0 || a == m1 - 1) ? 0.5 : 1.0;
  }
  std::vector<A2> gam(dim);
  KernelElement K;
  base_kernel_meta(K, m, hbar, sign, f);
  K.dim = dim;
  K.weights.resize(dim);
  for (int a = 0; a < m1; ++a) {
    for (int c = 0; c < m1; ++c) {
      const int al = a * m1 + c;
      const A2 Z{hbar * Yv[a], hbar * Yv[c]};
      gam[al] = m.group.exp(Z);
      K.weights[al] = hbar * hbar * m.group.exp_jacobian(Z) * tz[a] * tz[c] * dY * dY;
    }
  }

  AffineFtEval ev;
  ev.prepare(f, m1, sign * dY);

  MatrixXcd A(dim, dim);
  for (int al = 0; al < dim; ++al) {
    for (int be = al; be < dim; ++be) {
      const A2 Z = m.group.log(m.group.mul(m.group.inv(gam[al]), gam[be]));
      const double kv = kappa(std::hypot(Z[0], Z[1]));
      if (kv == 0.0) {
        A(al, be) = 0.0;
        A(be, al) = 0.0;
        continue;
      }
      // the first log coordinate is additive, so it sits on the scaled lattice
      const int D = be / m1 - al / m1;
      const double u1 = sign * Z[1] / hbar;
      cplx vp, vm;
      ev.eval_pm(D, u1, &vp, &vm);
      A(al, be) = scale * kv * vp;
      if (be != al) A(be, al) = scale * kv * vm;
    }
  }
  K.mats.push_back(std::move(A));
  K.unit_q.push_back(0.0);
  return K;
}

KernelElement assemble_rotation(const GroupoidModel& m, const PWObservable& f, double hbar,
                                int sign, const Cutoff& kappa) {
  const Chart& ch = m.base;
  const int N = ch.n;
  const double scale = 1.0 / hbar;

  VectorXd X(N), kap(N);
  std::vector<int> live_row(N, -1);
  std::vector<int> live;
  for (int d = 0; d < N; ++d) {
    X[d] = wrap_pm_pi(ch.points[d]);
    kap[d] = kappa(std::abs(X[d]));
    if (kap[d] > 0.0 && std::abs(X[d]) <= hbar * f.support_radius) {
      live_row[d] = static_cast<int>(live.size());
      live.push_back(d);
    } else {
      kap[d] = 0.0;
    }
  }
  MatrixXcd F;
  if (!f.ft_closed) {
    VectorXd u(live.size());
    for (size_t r = 0; r < live.size(); ++r) u[static_cast<Eigen::Index>(r)] = sign * X[live[r]] / hbar;
    F = ft_table(m, f, u);
  }

  KernelElement K;
  base_kernel_meta(K, m, hbar, sign, f);
  K.dim = N;
  K.weights = ch.weights;
  for (double q : m.sampled_units) {
    K.unit_index.push_back(*m.base.index_of(q));
    K.unit_q.push_back(q);
    MatrixXcd A = MatrixXcd::Zero(N, N);
    for (int i = 0; i < N; ++i) {
      for (int j = i; j < N; ++j) {
        const int d = j - i;  // in [0, N)
        if (kap[d] == 0.0) continue;
        const double qp = wrap_2pi(q - ch.points[i] - X[d] / 2.0);
        const double uu = sign * X[d] / hbar;
        cplx vp, vm;
        if (f.ft_closed) {
          vp = f.ft_closed(uu, qp);
          vm = f.ft_closed(-uu, qp);
        } else {
          const auto k = m.base_fine.index_of(qp);
          if (!k) throw std::runtime_error("rotation kernel midpoint off the fine lattice");
          vp = F(live_row[d], *k);
          vm = F(live_row[(N - d) % N], *k);
        }
        A(i, j) = scale * kap[d] * vp;
        if (j != i) A(j, i) = scale * kap[d] * vm;
      }
    }
    K.mats.push_back(std::move(A));
  }
  return K;
}

}  // namespace

double Cutoff::operator()(double r) const {
  const double a = std::abs(r);
  if (a <= r_in) return 1.0;
  if (a >= r_out) return 0.0;
  return smooth_step_down((a - r_in) / (r_out - r_in));
}

Cutoff trivial_cutoff() { return Cutoff{}; }

Cutoff make_cutoff(const GroupoidModel& m, double r_in, double r_out) {
  if (!(r_in > 0) || !(r_out > r_in))
    throw std::invalid_argument("cutoff radii must satisfy 0 < r_in < r_out");
  if (r_out > m.r_inj)
    throw std::invalid_argument("cutoff must be supported inside the injectivity radius");
  Cutoff k;
  k.r_in = r_in;
  k.r_out = r_out;
  return k;
}

Cutoff default_cutoff(const GroupoidModel& m) {
  if (std::isinf(m.r_inj)) return trivial_cutoff();
  const double r_out = std::min(2.8, 0.985 * m.r_inj);
  return make_cutoff(m, 1.8, r_out);
}

int default_sign(const GroupoidModel& m) { return m.family == Family::Pair ? -1 : +1; }

KernelElement weyl_quantize(const GroupoidModel& m, const PWObservable& f, double hbar,
                            int sign, const Cutoff& kappa) {
  if (!(hbar > 0)) throw std::invalid_argument("weyl_quantize: hbar must be positive");
  if (sign != 1 && sign != -1) throw std::invalid_argument("weyl_quantize: sign must be +1 or -1");
  if (f.model != &m) throw std::invalid_argument("weyl_quantize: observable built for a different model");
  if (!kappa.trivial() && kappa.r_out > m.r_inj)
    throw std::invalid_argument("weyl_quantize: cutoff exceeds the injectivity radius");
  if (kappa.trivial() && !std::isinf(m.r_inj))
    throw std::invalid_argument("weyl_quantize: this model requires a compactly supported cutoff");

  switch (m.family) {
    case Family::Pair:
      return m.base.is_circle() ? assemble_pair_circle(m, f, hbar, sign, kappa)
                                : assemble_line_family(m, f, hbar, sign, kappa);
    case Family::LieGroup:
      if (m.group.kind == GroupKind::U1) return assemble_u1(m, f, hbar, sign, kappa);
      if (m.group.kind == GroupKind::Affine) return assemble_affine(m, f, hbar, sign, kappa);
      throw std::invalid_argument("weyl_quantize: unsupported group kind");
    case Family::Transformation:
      return m.base.is_circle() ? assemble_rotation(m, f, hbar, sign, kappa)
                                : assemble_line_family(m, f, hbar, sign, kappa);
  }
  throw std::logic_error("weyl_quantize: unreachable");
}

KernelElement weyl_quantize(const GroupoidModel& m, const PWObservable& f, double hbar) {
  return weyl_quantize(m, f, hbar, default_sign(m), default_cutoff(m));
}

KernelElement transform_groupoid_quantize(const GroupoidModel& m, const PWObservable& f,
                                          double hbar, int sign, const Cutoff& kappa) {
  if (m.family != Family::Transformation)
    throw std::invalid_argument("transform_groupoid_quantize: not a transformation-family model");
  return weyl_quantize(m, f, hbar, sign, kappa);
}

KernelElement classical_section(const GroupoidModel& m, const PWObservable& f) {
  if (f.model != &m) throw std::invalid_argument("classical_section: observable model mismatch");
  KernelElement K;
  K.model = &m;
  K.hbar = 0.0;
  K.sign = default_sign(m);
  K.storage = StorageKind::Classical;
  K.classical = f;
  K.label = f.id;
  return K;
}

cplx kernel_value_at(const GroupoidModel& m, const PWObservable& f, double hbar, int sign,
                     const Cutoff& kappa, const GPoint& gamma) {
  if (!(hbar > 0)) throw std::invalid_argument("kernel_value_at: hbar must be positive");
  const auto wl = weyl_log(m, gamma);
  if (!wl) return 0.0;
  const double r = m.fiber_dim == 2 ? std::hypot(wl->X[0], wl->X[1]) : std::abs(wl->X[0]);
  const double kv = kappa(r);
  if (kv == 0.0) return 0.0;
  const double scale = m.fiber_dim == 2 ? 1.0 / (hbar * hbar) : 1.0 / hbar;
  if (m.fiber_dim == 2)
    return scale * kv * ft_at2(f, sign * wl->X[0] / hbar, sign * wl->X[1] / hbar);
  const double uu = sign * wl->X[0] / hbar;
  if (f.ft_closed) return scale * kv * f.ft_closed(uu, wl->q);
  if (!m.has_base()) return scale * kv * ft_at(f, uu, 0);
  const auto row = m.base_fine.index_of(wl->q);
  if (!row)
    throw std::invalid_argument("kernel_value_at: derived observable needs an on-lattice midpoint");
  return scale * kv * ft_at(f, uu, *row);
}

}  // namespace gwq
