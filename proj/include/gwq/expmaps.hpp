#pragma once

#include "gwq/geometry.hpp"

namespace gwq {

enum class ConnectionKind { Flat, LeviCivita1D, GroupTrivial, ActionTrivial };

/// Linear connection on the algebroid; only the 1D Levi-Civita kind carries
/// data (the Christoffel coefficient of the base metric).
struct ConnectionDescriptor {
  ConnectionKind kind = ConnectionKind::Flat;
  std::function<double(double)> gamma;  // Gamma(q), levi-civita-1d only
};

/// The connection each example ships with.
ConnectionDescriptor default_connection(const GroupoidModel& m);

struct InjectivityWindow {
  double r_inj = 0;
};

InjectivityWindow injectivity_window(const GroupoidModel& m);

/// Flow of the geodesic spray for time t from X0. Closed forms for the flat,
/// group-trivial and action-trivial kinds; adaptive RK4 with step doubling
/// (local error 1e-12) for levi-civita-1d. Throws if the base point leaves a
/// line-window chart.
AlgebroidVector geodesic_flow(const GroupoidModel& m, const ConnectionDescriptor& c,
                              const AlgebroidVector& X0, double t);

/// Left exponential: the endpoint of the left-invariant geodesic, landing in
/// the t-fiber over the base point of X.
GPoint exp_left(const GroupoidModel& m, const ConnectionDescriptor& c,
                const AlgebroidVector& X);

/// Weyl exponential Exp^L(-X/2)^{-1} Exp^L(X/2); the midpoint chart used by
/// the quantization kernels.
GPoint exp_weyl(const GroupoidModel& m, const ConnectionDescriptor& c,
                const AlgebroidVector& X);

/// Inverse of exp_weyl in closed form (principal branch). Returns nullopt for
/// points beyond the injectivity window, where kernels vanish by construction.
std::optional<AlgebroidVector> weyl_log(const GroupoidModel& m, const GPoint& g);

}  // namespace gwq
