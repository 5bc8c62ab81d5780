#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "gwq/geometry.hpp"

namespace gwq {

/// One tensor factor pair of a 2D observable: coeff * ax0(X0) * ax1(X1).
struct TensorTerm {
  cplx coeff{1.0, 0.0};
  VectorXcd ft0, ft1;      // per-axis transform samples on fiber.axis
  VectorXcd dual0, dual1;  // per-axis observable samples on fiber.theta_axis
  std::function<cplx(double)> ft0_closed, ft1_closed;  // optional fast path
};

/// Observable on the dual bundle together with its fiberwise Fourier
/// transform. 1D fibers store (fine-base x grid) sample matrices; 2D fibers
/// (affine group) store a sum of tensor terms instead.
struct PWObservable {
  const GroupoidModel* model = nullptr;
  std::string id;

  // rows: fine base grid (a single row when the family has no base)
  MatrixXcd ft;    // f-grave(X; q)
  MatrixXcd dual;  // f(theta; q)

  std::vector<TensorTerm> terms;  // fiber_dim == 2 only

  std::function<cplx(double, double)> ft_closed;  // (X, q); may be null

  bool selfadj = false;
  double support_radius = 0;  // bound on |X| over supp f-grave
  double trunc_radius = 0;    // Gaussian tail truncation radius (0 = exact)
  double trunc_mass = 0;      // L1 fraction clipped by the PW projection
};

/// Named observable constructors with optional parameter overrides
/// (zero/empty means the catalog default).
struct ObservableSpec {
  std::string id;        // gauss-a, gauss-b, moll-a, moll-b
  double s = 0;          // Gaussian width of f-grave
  double m = 0;          // center offset of the shifted-Gaussian pair
  double radius = 0;     // mollifier support radius
  double amp = 1.0;
  double env_center = std::numeric_limits<double>::quiet_NaN();
  double env_width = 0;  // line-window envelope
  double env_kappa = 0;  // circle envelope concentration
};

// ---- fiberwise Fourier transform pair ----
// Conventions: f(theta;q) = c(q) * sum_j e^{-i theta X_j} fgrave_j dX and
// fgrave(X;q) = (1/c(q)) * sum_k e^{+i theta_k X} f_k dtheta/(2pi), with c(q)
// the fiberwise Lebesgue normalization of the model. All 2pi factors sit on
// the theta side.

/// FFT path (phase-folded centered transform). Rejects data touching the
/// fiber window boundary.
MatrixXcd fiber_fourier(const GroupoidModel& m, const MatrixXcd& ft);
MatrixXcd fiber_inverse_fourier(const GroupoidModel& m, const MatrixXcd& dual);

/// Direct-summation oracle path (identical semantics, O(N^2)).
MatrixXcd fiber_fourier_direct(const GroupoidModel& m, const MatrixXcd& ft);
MatrixXcd fiber_inverse_fourier_direct(const GroupoidModel& m, const MatrixXcd& dual);

/// Per-axis centered transforms with unit normalization (tensor factors).
VectorXcd axis_fourier(const FiberGrid& fg, const VectorXcd& ft);
VectorXcd axis_inverse_fourier(const FiberGrid& fg, const VectorXcd& dual);

/// Plain unnormalized DFT, out_k = sum_j e^{-2 pi i jk/n} in_j (cached plans).
VectorXcd dft_forward(const VectorXcd& v);

/// Build a catalog observable for the model. Throws on unknown id or
/// non-compact support.
PWObservable make_pw_observable(const GroupoidModel& m, const ObservableSpec& spec);

/// Project dual-grid samples (1D fiber) back into the compactly supported
/// class: inverse transform, clip |fgrave| below 1e-13 of its maximum, record
/// the clipped mass, re-transform.
PWObservable project_to_pw(const GroupoidModel& m, const MatrixXcd& dual,
                           const std::string& id);

/// Same projection for a 2D tensor-term sum (clipping acts per axis factor).
PWObservable project_terms_to_pw(const GroupoidModel& m, std::vector<TensorTerm> terms,
                                 const std::string& id);

/// Complex conjugate observable (dual samples conjugated pointwise).
PWObservable pw_conj(const PWObservable& f);

/// Pointwise product fg through the dual samples, projected back to the class.
PWObservable pw_product(const PWObservable& f, const PWObservable& g);

/// Evaluate f-grave at arbitrary X for a fine-base row (closed form when
/// available, else a direct theta sum).
cplx ft_at(const PWObservable& f, double X, int fine_row);

/// 2D evaluation via tensor terms.
cplx ft_at2(const PWObservable& f, double X0, double X1);

/// Sup of |f| over the dual grid (the classical C0 norm).
double sup_dual(const PWObservable& f);

}  // namespace gwq
