#pragma once

#include <limits>
#include <string>
#include <vector>

#include "gwq/expmaps.hpp"
#include "gwq/fourier.hpp"
#include "gwq/geometry.hpp"

namespace gwq {

/// Smooth even fiber cutoff: identically 1 on [0, r_in], identically 0 from
/// r_out on, C-infinity in between. Infinite radii give the trivial cutoff.
struct Cutoff {
  double r_in = std::numeric_limits<double>::infinity();
  double r_out = std::numeric_limits<double>::infinity();
  double operator()(double r) const;
  bool trivial() const { return std::isinf(r_out); }
};

Cutoff trivial_cutoff();

/// Validates 0 < r_in < r_out <= injectivity radius of the model.
Cutoff make_cutoff(const GroupoidModel& m, double r_in, double r_out);

/// Model default: trivial when the injectivity radius is infinite, else a
/// plateau comfortably inside it.
Cutoff default_cutoff(const GroupoidModel& m);

/// Kernel orientation that reproduces the standard position-space kernel on
/// the flat pair family (-1) resp. the group-side convention (+1).
int default_sign(const GroupoidModel& m);

enum class StorageKind { DenseMats, CircVector, Classical };

/// A compactly supported convolution kernel at fixed hbar, stored through its
/// matrix elements on sampled transitive fibers (one matrix per sampled
/// unit), as a circulant vector for the circle group, or as the classical
/// observable itself at hbar = 0.
struct KernelElement {
  const GroupoidModel* model = nullptr;
  double hbar = 0;
  int sign = -1;
  StorageKind storage = StorageKind::DenseMats;
  std::vector<int> unit_index;   // base indices of sampled units (may be empty)
  std::vector<double> unit_q;
  std::vector<MatrixXcd> mats;   // per sampled unit, A[i,j] = kernel at sample pair
  VectorXcd circ;                // circle group: kernel over the group grid
  PWObservable classical;        // hbar = 0 storage
  VectorXd weights;              // fiber quadrature weights (dim entries)
  int dim = 0;
  int bandwidth = -1;            // banded structure of mats; -1 = dense
  std::string label;
};

/// Weyl-type quantization: kernel value hbar^{-n} kappa(|X|) fgrave(sign X /
/// hbar; q') where (X, q') is the fiberwise logarithm of the groupoid point.
KernelElement weyl_quantize(const GroupoidModel& m, const PWObservable& f, double hbar,
                            int sign, const Cutoff& kappa);
KernelElement weyl_quantize(const GroupoidModel& m, const PWObservable& f, double hbar);

/// Entry point restricted to transformation-groupoid models.
KernelElement transform_groupoid_quantize(const GroupoidModel& m, const PWObservable& f,
                                          double hbar, int sign, const Cutoff& kappa);

/// hbar = 0 member of the continuous field: the observable itself.
KernelElement classical_section(const GroupoidModel& m, const PWObservable& f);

/// Scalar kernel evaluation at an arbitrary groupoid point (test support).
cplx kernel_value_at(const GroupoidModel& m, const PWObservable& f, double hbar, int sign,
                     const Cutoff& kappa, const GPoint& gamma);

}  // namespace gwq
