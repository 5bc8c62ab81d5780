#include "gwq/cstar.hpp"

#include <Eigen/SVD>

#include <atomic>
#include <cmath>
#include <iostream>
#include <random>
#include <stdexcept>

namespace gwq {

namespace {

std::atomic<std::uint64_t> g_norm_seed{0};

void check_compatible(const KernelElement& a, const KernelElement& b, const char* who) {
  if (a.model != b.model) throw std::invalid_argument(std::string(who) + ": different models");
  if (a.storage != b.storage) throw std::invalid_argument(std::string(who) + ": storage mismatch");
  if (a.hbar != b.hbar) throw std::invalid_argument(std::string(who) + ": hbar mismatch");
  if (a.storage == StorageKind::DenseMats &&
      (a.dim != b.dim || a.mats.size() != b.mats.size()))
    throw std::invalid_argument(std::string(who) + ": dimension mismatch");
  if (a.storage == StorageKind::CircVector && a.dim != b.dim)
    throw std::invalid_argument(std::string(who) + ": dimension mismatch");
}

MatrixXcd banded_product(const MatrixXcd& A, const VectorXd& w, const MatrixXcd& B,
                         int ba, int bb) {
  const int n = static_cast<int>(A.rows());
  MatrixXcd C = MatrixXcd::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    const int klo = std::max(0, j - bb), khi = std::min(n - 1, j + bb);
    for (int k = klo; k <= khi; ++k) {
      const cplx coef = w[k] * B(k, j);
      if (coef == cplx(0.0, 0.0)) continue;
      const int ilo = std::max(0, k - ba), ihi = std::min(n - 1, k + ba);
      C.col(j).segment(ilo, ihi - ilo + 1) += coef * A.col(k).segment(ilo, ihi - ilo + 1);
    }
  }
  return C;
}

double power_iteration_norm(const MatrixXcd& M, int unit) {
  const int n = static_cast<int>(M.rows());
  if (M.cwiseAbs().maxCoeff() == 0.0) return 0.0;
  std::mt19937_64 rng(0x9e3779b97f4a7c15ULL ^ g_norm_seed.load() ^
                      (0x2545f4914f6cdd1dULL * static_cast<std::uint64_t>(unit + 1)));
  VectorXcd v(n);
  for (int i = 0; i < n; ++i)
    v[i] = cplx(uniform01(rng()) - 0.5, uniform01(rng()) - 0.5);
  v /= v.norm();
  double lam = 0, prev = -1;
  bool converged = false;
  for (int it = 0; it < 10000; ++it) {
    VectorXcd y = M * v;
    lam = y.squaredNorm();
    if (lam == 0.0) {  // start vector hit the null space; redraw
      for (int i = 0; i < n; ++i)
        v[i] = cplx(uniform01(rng()) - 0.5, uniform01(rng()) - 0.5);
      v /= v.norm();
      prev = -1;
      continue;
    }
    VectorXcd z = M.adjoint() * y;
    v = z / z.norm();
    if (prev >= 0 && std::abs(lam - prev) <= 1e-10 * std::max(lam, 1e-300)) {
      converged = true;
      break;
    }
    prev = lam;
  }
  if (!converged && n < 2048) {
    Eigen::BDCSVD<MatrixXcd> svd(M);
    return svd.singularValues()[0];
  }
  return std::sqrt(lam);
}

}  // namespace

void set_norm_seed(std::uint64_t seed) { g_norm_seed.store(seed); }

KernelElement convolve(const KernelElement& a, const KernelElement& b) {
  check_compatible(a, b, "convolve");
  const GroupoidModel& m = *a.model;
  if (a.storage == StorageKind::Classical)
    return classical_section(m, pw_product(a.classical, b.classical));

  KernelElement C;
  C.model = a.model;
  C.hbar = a.hbar;
  C.sign = a.sign;
  C.storage = a.storage;
  C.unit_index = a.unit_index;
  C.unit_q = a.unit_q;
  C.weights = a.weights;
  C.dim = a.dim;
  C.label = "(" + a.label + ")*(" + b.label + ")";

  if (a.storage == StorageKind::CircVector) {
    const int n = a.dim;
    const double w = a.weights[0];
    C.circ = VectorXcd::Zero(n);
    for (int e = 0; e < n; ++e) {
      cplx acc = 0;
      for (int d = 0; d < n; ++d) acc += a.circ[d] * b.circ[(e - d + n) % n];
      C.circ[e] = w * acc;
    }
    return C;
  }

  const int n = a.dim;
  int bw = -1;
  if (a.bandwidth >= 0 && b.bandwidth >= 0) {
    bw = a.bandwidth + b.bandwidth;
    if (bw >= n - 1) {
      if (!m.base.is_circle())
        std::cerr << "convolve: product support exceeds the truncation window; tails truncated\n";
      bw = n - 1;
    }
  }
  C.bandwidth = bw;
  for (size_t u = 0; u < a.mats.size(); ++u) {
    if (a.bandwidth >= 0 && b.bandwidth >= 0 && a.bandwidth + b.bandwidth < n - 1) {
      C.mats.push_back(banded_product(a.mats[u], a.weights, b.mats[u], a.bandwidth, b.bandwidth));
    } else {
      MatrixXcd P = a.mats[u] * a.weights.asDiagonal() * b.mats[u];
      C.mats.push_back(std::move(P));
    }
  }
  return C;
}

KernelElement involute(const KernelElement& a) {
  KernelElement B = a;
  B.label = "(" + a.label + ")*";
  if (a.storage == StorageKind::Classical) {
    B.classical = pw_conj(a.classical);
    return B;
  }
  if (a.storage == StorageKind::CircVector) {
    const int n = a.dim;
    for (int d = 0; d < n; ++d) B.circ[d] = std::conj(a.circ[(n - d) % n]);
    return B;
  }
  for (size_t u = 0; u < a.mats.size(); ++u) B.mats[u] = a.mats[u].adjoint();
  return B;
}

KernelElement kernel_lincomb(cplx alpha, const KernelElement& a, cplx beta,
                             const KernelElement& b) {
  check_compatible(a, b, "kernel_lincomb");
  KernelElement C = a;
  C.label = "lincomb(" + a.label + "," + b.label + ")";
  if (a.storage == StorageKind::Classical) {
    PWObservable& f = C.classical;
    f.id = C.label;
    if (!f.terms.empty()) {
      for (auto& t : f.terms) t.coeff *= alpha;
      for (const auto& t : b.classical.terms) {
        TensorTerm s = t;
        s.coeff *= beta;
        f.terms.push_back(std::move(s));
      }
    } else {
      f.dual = alpha * a.classical.dual + beta * b.classical.dual;
      f.ft = alpha * a.classical.ft + beta * b.classical.ft;
    }
    f.support_radius = std::max(a.classical.support_radius, b.classical.support_radius);
    f.trunc_mass = std::max(a.classical.trunc_mass, b.classical.trunc_mass);
    return C;
  }
  if (a.storage == StorageKind::CircVector) {
    C.circ = alpha * a.circ + beta * b.circ;
    return C;
  }
  C.bandwidth = (a.bandwidth < 0 || b.bandwidth < 0) ? -1 : std::max(a.bandwidth, b.bandwidth);
  for (size_t u = 0; u < a.mats.size(); ++u)
    C.mats[u] = alpha * a.mats[u] + beta * b.mats[u];
  return C;
}

KernelElement kernel_scale(cplx alpha, KernelElement a) {
  if (a.storage == StorageKind::Classical) {
    if (!a.classical.terms.empty()) {
      for (auto& t : a.classical.terms) t.coeff *= alpha;
    } else {
      a.classical.dual *= alpha;
      a.classical.ft *= alpha;
    }
    return a;
  }
  if (a.storage == StorageKind::CircVector) {
    a.circ *= alpha;
    return a;
  }
  for (auto& M : a.mats) M *= alpha;
  return a;
}

std::vector<OperatorMatrix> represent(const KernelElement& a) {
  if (a.storage == StorageKind::Classical)
    throw std::invalid_argument("represent: classical elements have no matrix representation");
  std::vector<OperatorMatrix> out;
  if (a.storage == StorageKind::CircVector) {
    const int n = a.dim;
    OperatorMatrix om;
    om.q = 0;
    om.mat.resize(n, n);
    const double w = a.weights[0];
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) om.mat(i, j) = w * a.circ[(j - i + n) % n];
    out.push_back(std::move(om));
    return out;
  }
  const VectorXd s = a.weights.cwiseSqrt();
  for (size_t u = 0; u < a.mats.size(); ++u) {
    OperatorMatrix om;
    om.q = a.unit_q.empty() ? 0.0 : a.unit_q[u];
    const MatrixXcd& A = a.mats[u];
    // symmetric prefactor first: the representation of the involution is
    // then bitwise the adjoint of the representation
    om.mat.resize(a.dim, a.dim);
    for (int i = 0; i < a.dim; ++i)
      for (int j = 0; j < a.dim; ++j) om.mat(i, j) = (s[i] * s[j]) * A(i, j);
    out.push_back(std::move(om));
  }
  return out;
}

double reduced_norm(const KernelElement& a) {
  if (a.storage == StorageKind::Classical) return sup_dual(a.classical);
  if (a.storage == StorageKind::CircVector) {
    // exact circulant eigenvalues lambda_k = w sum_d c_d e^{-2 pi i dk/n}
    const int n = a.dim;
    const double w = a.weights[0];
    double best = 0;
    for (int k = 0; k < n; ++k) {
      cplx acc = 0;
      for (int d = 0; d < n; ++d)
        acc += a.circ[d] * std::polar(1.0, -kTwoPi * double(d) * double(k) / double(n));
      best = std::max(best, std::abs(w * acc));
    }
    return best;
  }
  double best = 0;
  int unit = 0;
  for (const auto& om : represent(a))
    best = std::max(best, power_iteration_norm(om.mat, unit++));
  return best;
}

double reduced_norm_interior(const KernelElement& a, double margin) {
  if (margin <= 0.0 || a.storage != StorageKind::DenseMats || !a.model ||
      a.model->scaled_points == 0)
    return reduced_norm(a);
  const int m1 = a.model->scaled_points;
  const double R = a.model->scaled_halfwidth;
  const double dY = 2.0 * R / (m1 - 1);
  const double keep = R - margin;
  if (keep <= 0.0)
    throw std::domain_error("interior margin swallows the whole scaled window");
  std::vector<int> idx;
  for (int r = 0; r < m1; ++r) {
    if (std::abs(-R + r * dY) > keep) continue;
    for (int c = 0; c < m1; ++c)
      if (std::abs(-R + c * dY) <= keep) idx.push_back(r * m1 + c);
  }
  const int n = static_cast<int>(idx.size());
  const VectorXd s = a.weights.cwiseSqrt();
  double best = 0;
  int unit = 0;
  for (const auto& A : a.mats) {
    MatrixXcd M(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        M(i, j) = (s[idx[i]] * s[idx[j]]) * A(idx[i], idx[j]);
    best = std::max(best, power_iteration_norm(M, unit++));
  }
  return best;
}

double reduced_norm_dense_svd(const KernelElement& a) {
  if (a.storage == StorageKind::Classical) return sup_dual(a.classical);
  double best = 0;
  for (const auto& om : represent(a)) {
    Eigen::BDCSVD<MatrixXcd> svd(om.mat);
    best = std::max(best, svd.singularValues()[0]);
  }
  return best;
}

}  // namespace gwq
