#pragma once

#include <cstdint>
#include <vector>

#include "gwq/quantize.hpp"

namespace gwq {

/// Weighted representation matrix at one sampled unit: M acts on fiber
/// samples so that matrix products realize kernel convolution.
struct OperatorMatrix {
  double q = 0;
  MatrixXcd mat;
};

/// Seed mixed into the power-iteration start vectors (deterministic runs).
void set_norm_seed(std::uint64_t seed);

/// Fiberwise convolution (a * b)(g) = int a(g g1) b(g1^{-1}) dmu^t(g1),
/// realized per sampled unit as A diag(w) B. Reports (and truncates) products
/// whose band leaves a line-window sample grid.
KernelElement convolve(const KernelElement& a, const KernelElement& b);

/// Involution a*(g) = conj a(g^{-1}); conjugate transpose per sampled unit.
KernelElement involute(const KernelElement& a);

/// alpha a + beta b (matching storage, model and hbar).
KernelElement kernel_lincomb(cplx alpha, const KernelElement& a, cplx beta,
                             const KernelElement& b);
KernelElement kernel_scale(cplx alpha, KernelElement a);

/// Weighted matrices W^{1/2} A W^{1/2} per sampled unit.
std::vector<OperatorMatrix> represent(const KernelElement& a);

/// Largest represented operator norm over sampled units: power iteration on
/// M*M with Rayleigh stagnation (1e-10 relative, 1e4 iterations), falling
/// back to a dense SVD for small unconverged problems. Circle-group elements
/// use the exact circulant eigenvalues; classical elements the sup norm.
double reduced_norm(const KernelElement& a);

/// Norm of the interior section of a scaled-window element: rows and columns
/// are restricted to lattice points at least `margin` inside the window on
/// both axes. Discrete convolution rows are complete quadratures only there
/// (a kernel of support radius r reaches r beyond its row), so products
/// carry boundary-layer artifacts that this compression removes. Falls back
/// to the full norm for models without a scaled chart or margin <= 0.
double reduced_norm_interior(const KernelElement& a, double margin);

/// Dense SVD evaluation of the same quantity (oracle path).
double reduced_norm_dense_svd(const KernelElement& a);

}  // namespace gwq
