#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "gwq/grids.hpp"

namespace gwq {

enum class Family { Pair, LieGroup, Transformation };
enum class GroupKind { None, RealLine, U1, Affine };

/// A groupoid element in chart coordinates. Layout by family:
///   Pair:           (x, y)   target x, source y
///   LieGroup:       group chart coords (1 or 2 of them)
///   Transformation: (x, q)   group element x acting at target unit q
struct GPoint {
  std::array<double, 2> c{0.0, 0.0};
};

/// An algebroid element: fiber components X plus base point q (ignored for
/// Lie-group families, whose base is a single unit).
struct AlgebroidVector {
  std::array<double, 2> X{0.0, 0.0};
  double q = 0.0;
};

/// A dual (momentum) element: covector components theta plus base point q.
struct DualVector {
  std::array<double, 2> theta{0.0, 0.0};
  double q = 0.0;
};

/// Chart-level operations of the structure group (closed forms throughout).
struct GroupOps {
  GroupKind kind = GroupKind::None;
  int dim = 0;
  // structure constants c^k_{ij} for [e_i, e_j] = c^k_{ij} e_k
  double c[2][2][2] = {};

  std::array<double, 2> mul(const std::array<double, 2>& a,
                            const std::array<double, 2>& b) const;
  std::array<double, 2> inv(const std::array<double, 2>& a) const;
  std::array<double, 2> exp(const std::array<double, 2>& X) const;
  // chart -> algebra; always defined for the shipped groups (U(1) uses the
  // principal branch, radius pi)
  std::array<double, 2> log(const std::array<double, 2>& a) const;
  std::array<double, 2> identity() const;
  /// Density of the left Haar measure w.r.t. chart Lebesgue measure.
  double haar_density(const std::array<double, 2>& a) const;
  /// Jacobian of exp w.r.t. left Haar at exp(X), normalized to 1 at X = 0.
  double exp_jacobian(const std::array<double, 2>& X) const;
};

/// Arclength bookkeeping for the 1D Riemannian circle: the metric is encoded
/// through a truncated Fourier series of sqrt(g), which makes ell(q) and its
/// inverse available in closed form to machine precision.
struct CircleMetric {
  std::function<double(double)> g;      // metric coefficient g(q)
  std::function<double(double)> dg;     // g'(q)
  std::vector<cplx> sqrtg_modes;        // sqrt(g) = sum_m c_m e^{imq}, |m| <= M
  double total_length = 0;

  double sqrtg(double q) const;
  double ell(double q) const;           // arclength from 0, additive in windings
  double ell_inverse(double s) const;   // Newton inversion
  /// Geodesic exponential in chart coordinates (exact: 1D geodesics preserve
  /// arclength).
  double exp_q(double q, double v) const;
  /// d/dv exp_q(q, v)
  double dexp_q(double q, double v) const;
};

struct Resolution {
  int base_points = 0;       // 0 = family default
  double window = 0;         // line-window half width L
  int group_points = 0;      // per axis for group grids
  double group_window = 0;   // affine: half width of the (log a, b) chart grid
  int fiber_points = 0;      // observable X-grid points per axis
  double fiber_window = 0;   // observable X-grid half width
  int scaled_points = 0;     // group-family operator fiber: points per axis
  double scaled_halfwidth = 0;
  std::vector<double> units; // transformation family: sampled units (base coords)
};

struct GroupoidModel {
  std::string name;
  Family family = Family::Pair;
  int fiber_dim = 1;

  Chart base;              // kernel-level base grid (Point chart for groups)
  Chart base_fine;         // 2x refinement carrying observable samples
  FiberGrid fiber;         // observable X-grid and its dual theta-grid

  GroupOps group;          // structure group (LieGroup / Transformation)
  Chart group_axis0;       // group grid, axis 0 (u1 circle / line / log a)
  Chart group_axis1;       // group grid, axis 1 (affine b), Point otherwise

  // scaled operator fiber for noncompact group families (affine): the t-fiber
  // is sampled at Exp(hbar Y) for Y on a fixed [-R, R]^n grid
  int scaled_points = 0;
  double scaled_halfwidth = 0;

  // pair-circle-metric data
  bool has_metric = false;
  CircleMetric metric;

  // transformation action q' = act(x, q)
  std::function<double(const std::array<double, 2>&, double)> action;

  std::vector<double> sampled_units;  // transf: units used for representations

  double r_inj = 0;  // injectivity radius in the fiber (inf if window-limited)

  /// Fiberwise Lebesgue normalization c(q) of mu^L_q (fixes J_q(0) = 1).
  double leb_norm(double q) const;
  /// t-fiber density for pair families (w.r.t. dw in the base chart).
  double fiber_density(double w) const;

  bool has_base() const { return family != Family::LieGroup; }
};

/// Names accepted by make_example.
std::vector<std::string> example_names();

/// Construct one of the shipped example groupoids. Throws on unknown name or
/// inconsistent resolution parameters.
GroupoidModel make_example(const std::string& name, const Resolution& res = {});

// ---- groupoid structure maps ----

double source_of(const GroupoidModel& m, const GPoint& g);
double target_of(const GroupoidModel& m, const GPoint& g);
GPoint unit_of(const GroupoidModel& m, double q);
GPoint invert(const GroupoidModel& m, const GPoint& g);
/// Composition g1 * g2, defined iff source(g1) matches target(g2) within tol.
std::optional<GPoint> compose(const GroupoidModel& m, const GPoint& g1,
                              const GPoint& g2, double tol = 1e-9);

// ---- Haar system ----

/// Left Haar system data: fiber densities plus the normalized Jacobian
/// J_q(X) relating mu^t_q (through the exponential chart) to mu^L_q.
struct HaarSystem {
  const GroupoidModel* model = nullptr;
  /// pair families: density of mu^t_q on the base chart (independent of q for
  /// the shipped examples); unused for group/transformation families.
  std::function<double(double)> base_density;
  /// Lebesgue normalization c(q) of the fiber measure mu^L_q.
  std::function<double(double)> leb_norm;
  /// J_q(X), strictly positive, J_q(0) = 1 exactly.
  std::function<double(double, const std::array<double, 2>&)> jacobian;
};

/// Default Haar system of a model (Riemannian density for the metric pair
/// family, Haar measure for group factors, Lebesgue otherwise).
HaarSystem build_haar_system(const GroupoidModel& m);
/// Haar system with a custom positive fiber density on the base chart (pair
/// families only; used to exercise nontrivial Jacobians).
HaarSystem build_haar_system(const GroupoidModel& m,
                             std::function<double(double)> density);

double haar_jacobian(const GroupoidModel& m, const HaarSystem& h, double q,
                     const std::array<double, 2>& X);

}  // namespace gwq
