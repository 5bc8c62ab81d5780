#pragma once

#include "gwq/fourier.hpp"
#include "gwq/geometry.hpp"

namespace gwq {

/// Poisson structures carried by the dual bundle, per groupoid family.
enum class BracketFamily { Canonical, LiePoisson, Semidirect };

struct BracketDescriptor {
  BracketFamily family = BracketFamily::Canonical;
  int sign = +1;  // overall orientation, +1 or -1
};

/// The bracket naturally attached to the model's family.
BracketDescriptor default_bracket(const GroupoidModel& m);

/// Bracket of two observables in the transform class: theta-derivatives are
/// spectral (exact on the class), base derivatives use a fourth-order stencil.
/// The result is projected back to the class; throws if its fiber support
/// leaves the grid window.
PWObservable poisson_bracket(const GroupoidModel& m, const BracketDescriptor& d,
                             const PWObservable& f, const PWObservable& g);

/// Finite-difference oracle on raw dual-grid samples (1D fiber). All
/// derivatives are FD4 with zero extension; compare on interior points.
MatrixXcd poisson_bracket_samples_fd(const GroupoidModel& m, const BracketDescriptor& d,
                                     const MatrixXcd& F, const MatrixXcd& G);

/// Same oracle for a 2D fiber: F, G are (theta0 x theta1) grids.
MatrixXcd poisson_bracket_samples_fd2(const GroupoidModel& m, const BracketDescriptor& d,
                                      const MatrixXcd& F, const MatrixXcd& G);

/// Dense dual-grid evaluation of a tensor-term sum (test support).
MatrixXcd terms_dual_grid(const FiberGrid& fg, const std::vector<TensorTerm>& terms);

}  // namespace gwq
