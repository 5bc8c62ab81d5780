#include "gwq/poisson.hpp"

#include <stdexcept>

namespace gwq {

namespace {

void require_family(const GroupoidModel& m, const BracketDescriptor& d) {
  if (d.sign != 1 && d.sign != -1) throw std::invalid_argument("bracket sign must be +1 or -1");
  const bool ok = (d.family == BracketFamily::Canonical && m.family == Family::Pair) ||
                  (d.family == BracketFamily::LiePoisson && m.family == Family::LieGroup) ||
                  (d.family == BracketFamily::Semidirect && m.family == Family::Transformation);
  if (!ok) throw std::invalid_argument("bracket family does not match the groupoid family");
}

// f-grave multiplied by (-i X): the spectral theta-derivative seen from the
// transform side.
MatrixXcd mul_minus_ix(const FiberGrid& fg, const MatrixXcd& ft) {
  MatrixXcd out = ft;
  for (int j = 0; j < fg.n_axis; ++j)
    out.col(j) *= cplx(0.0, -fg.axis[static_cast<size_t>(j)]);
  return out;
}

VectorXcd axis_mul_minus_ix(const FiberGrid& fg, const VectorXcd& ft) {
  VectorXcd out = ft;
  for (int j = 0; j < fg.n_axis; ++j)
    out[j] *= cplx(0.0, -fg.axis[static_cast<size_t>(j)]);
  return out;
}

VectorXcd axis_mul_theta(const FiberGrid& fg, const VectorXcd& dual) {
  VectorXcd out = dual;
  for (int k = 0; k < fg.n_axis; ++k)
    out[k] *= fg.theta_axis[static_cast<size_t>(k)];
  return out;
}

// FD4 along matrix columns (the theta direction) with zero extension.
MatrixXcd fd4_theta(const MatrixXcd& a, double h) {
  MatrixXcd out = MatrixXcd::Zero(a.rows(), a.cols());
  const Eigen::Index n = a.cols();
  auto at = [&](Eigen::Index r, Eigen::Index j) -> cplx {
    return (j < 0 || j >= n) ? cplx(0.0, 0.0) : a(r, j);
  };
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    for (Eigen::Index j = 0; j < n; ++j)
      out(r, j) = (-at(r, j + 2) + 8.0 * at(r, j + 1) - 8.0 * at(r, j - 1) + at(r, j - 2)) /
                  (12.0 * h);
  return out;
}

MatrixXcd fd4_rows_dir(const MatrixXcd& a, double h) {
  // FD4 across rows with zero extension (2D-fiber oracle, axis-0 direction).
  MatrixXcd out = MatrixXcd::Zero(a.rows(), a.cols());
  const Eigen::Index n = a.rows();
  auto at = [&](Eigen::Index i, Eigen::Index c) -> cplx {
    return (i < 0 || i >= n) ? cplx(0.0, 0.0) : a(i, c);
  };
  for (Eigen::Index c = 0; c < a.cols(); ++c)
    for (Eigen::Index i = 0; i < n; ++i)
      out(i, c) = (-at(i + 2, c) + 8.0 * at(i + 1, c) - 8.0 * at(i - 1, c) + at(i - 2, c)) /
                  (12.0 * h);
  return out;
}

std::vector<TensorTerm> bracket_terms_affine(const GroupoidModel& m, int sign,
                                             const std::vector<TensorTerm>& F,
                                             const std::vector<TensorTerm>& G) {
  // Lie-Poisson with [e1, e2] = e2: {F,G}_+ = -theta2 (d1F d2G - d2F d1G).
  const auto& fg = m.fiber;
  std::vector<TensorTerm> out;
  for (const auto& s : F) {
    const VectorXcd da0 = axis_fourier(fg, axis_mul_minus_ix(fg, s.ft0));
    const VectorXcd db1 = axis_fourier(fg, axis_mul_minus_ix(fg, s.ft1));
    for (const auto& t : G) {
      const VectorXcd dc0 = axis_fourier(fg, axis_mul_minus_ix(fg, t.ft0));
      const VectorXcd dd1 = axis_fourier(fg, axis_mul_minus_ix(fg, t.ft1));
      TensorTerm t1;  // -theta2 * (a' c) (x) (b d')
      t1.coeff = -s.coeff * t.coeff * static_cast<double>(sign);
      t1.dual0 = da0.cwiseProduct(t.dual0);
      t1.dual1 = axis_mul_theta(fg, s.dual1.cwiseProduct(dd1));
      out.push_back(std::move(t1));
      TensorTerm t2;  // +theta2 * (a c') (x) (b' d)
      t2.coeff = s.coeff * t.coeff * static_cast<double>(sign);
      t2.dual0 = s.dual0.cwiseProduct(dc0);
      t2.dual1 = axis_mul_theta(fg, db1.cwiseProduct(t.dual1));
      out.push_back(std::move(t2));
    }
  }
  return out;
}

}  // namespace

BracketDescriptor default_bracket(const GroupoidModel& m) {
  BracketDescriptor d;
  switch (m.family) {
    case Family::Pair: d.family = BracketFamily::Canonical; break;
    case Family::LieGroup: d.family = BracketFamily::LiePoisson; break;
    case Family::Transformation: d.family = BracketFamily::Semidirect; break;
  }
  d.sign = +1;
  return d;
}

PWObservable poisson_bracket(const GroupoidModel& m, const BracketDescriptor& d,
                             const PWObservable& f, const PWObservable& g) {
  require_family(m, d);
  const std::string id = "{" + f.id + "," + g.id + "}";
  if (m.fiber_dim == 2) {
    return project_terms_to_pw(m, bracket_terms_affine(m, d.sign, f.terms, g.terms), id);
  }
  const double sgn = static_cast<double>(d.sign);
  if (d.family == BracketFamily::LiePoisson) {
    // one-dimensional fiber: the structure constants vanish
    MatrixXcd zero = MatrixXcd::Zero(f.dual.rows(), f.dual.cols());
    return project_to_pw(m, zero, id);
  }
  const MatrixXcd dFth = fiber_fourier(m, mul_minus_ix(m.fiber, f.ft));
  const MatrixXcd dGth = fiber_fourier(m, mul_minus_ix(m.fiber, g.ft));
  const MatrixXcd dFq = fd4_base_derivative(m.base_fine, f.dual);
  const MatrixXcd dGq = fd4_base_derivative(m.base_fine, g.dual);
  MatrixXcd H;
  if (d.family == BracketFamily::Canonical) {
    H = dFq.cwiseProduct(dGth) - dFth.cwiseProduct(dGq);
  } else {
    // semidirect with vanishing structure constants and action generator d/dq
    H = dFth.cwiseProduct(dGq) - dGth.cwiseProduct(dFq);
  }
  return project_to_pw(m, sgn * H, id);
}

MatrixXcd poisson_bracket_samples_fd(const GroupoidModel& m, const BracketDescriptor& d,
                                     const MatrixXcd& F, const MatrixXcd& G) {
  require_family(m, d);
  const double sgn = static_cast<double>(d.sign);
  if (d.family == BracketFamily::LiePoisson)
    return MatrixXcd::Zero(F.rows(), F.cols());
  const MatrixXcd dFth = fd4_theta(F, m.fiber.dtheta);
  const MatrixXcd dGth = fd4_theta(G, m.fiber.dtheta);
  const MatrixXcd dFq = fd4_base_derivative(m.base_fine, F);
  const MatrixXcd dGq = fd4_base_derivative(m.base_fine, G);
  if (d.family == BracketFamily::Canonical)
    return sgn * (dFq.cwiseProduct(dGth) - dFth.cwiseProduct(dGq));
  return sgn * (dFth.cwiseProduct(dGq) - dGth.cwiseProduct(dFq));
}

MatrixXcd poisson_bracket_samples_fd2(const GroupoidModel& m, const BracketDescriptor& d,
                                      const MatrixXcd& F, const MatrixXcd& G) {
  require_family(m, d);
  if (m.fiber_dim != 2) throw std::invalid_argument("2D-fiber oracle needs a 2D fiber");
  const double sgn = static_cast<double>(d.sign);
  const double h = m.fiber.dtheta;
  const MatrixXcd dF0 = fd4_rows_dir(F, h), dF1 = fd4_theta(F, h);
  const MatrixXcd dG0 = fd4_rows_dir(G, h), dG1 = fd4_theta(G, h);
  MatrixXcd out(F.rows(), F.cols());
  for (Eigen::Index k0 = 0; k0 < F.rows(); ++k0) {
    for (Eigen::Index k1 = 0; k1 < F.cols(); ++k1) {
      const double th2 = m.fiber.theta_axis[static_cast<size_t>(k1)];
      out(k0, k1) = -sgn * th2 *
                    (dF0(k0, k1) * dG1(k0, k1) - dF1(k0, k1) * dG0(k0, k1));
    }
  }
  return out;
}

MatrixXcd terms_dual_grid(const FiberGrid& fg, const std::vector<TensorTerm>& terms) {
  MatrixXcd out = MatrixXcd::Zero(fg.n_axis, fg.n_axis);
  for (const auto& t : terms) out += t.coeff * (t.dual0 * t.dual1.transpose());
  return out;
}

}  // namespace gwq
