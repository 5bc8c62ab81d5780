#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <stdexcept>

namespace gwq {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using Eigen::VectorXd;
using cplx = std::complex<double>;

constexpr double kTwoPi = 6.283185307179586476925286766559;

/// Reduce an angle to [0, 2pi).
inline double wrap_2pi(double x) {
  double y = std::fmod(x, kTwoPi);
  if (y < 0) y += kTwoPi;
  // fmod can return 2pi-eps rounding up to 2pi after the add
  if (y >= kTwoPi) y -= kTwoPi;
  return y;
}

/// Reduce an angle to (-pi, pi].
inline double wrap_pm_pi(double x) {
  double y = wrap_2pi(x);
  return (y > M_PI) ? y - kTwoPi : y;
}

enum class ChartKind { LineWindow, Circle, Point };

/// 1D sampled coordinate chart: either a symmetric window [-L, L] with
/// trapezoid weights or the circle [0, 2pi) with uniform Riemann weights.
struct Chart {
  ChartKind kind = ChartKind::Point;
  int n = 1;
  double window = 0;   // L for LineWindow, pi for Circle (half-extent)
  double spacing = 0;  // grid step
  VectorXd points;
  VectorXd weights;

  static Chart line(double L, int n) {
    if (L <= 0 || n < 2) throw std::invalid_argument("Chart::line: need L > 0, n >= 2");
    Chart c;
    c.kind = ChartKind::LineWindow;
    c.n = n;
    c.window = L;
    c.spacing = 2.0 * L / (n - 1);
    c.points.resize(n);
    c.weights.resize(n);
    for (int i = 0; i < n; ++i) {
      c.points[i] = -L + i * c.spacing;
      c.weights[i] = (i == 0 || i == n - 1) ? 0.5 * c.spacing : c.spacing;
    }
    return c;
  }

  static Chart circle(int n) {
    if (n < 4) throw std::invalid_argument("Chart::circle: need n >= 4");
    Chart c;
    c.kind = ChartKind::Circle;
    c.n = n;
    c.window = M_PI;
    c.spacing = kTwoPi / n;
    c.points.resize(n);
    c.weights = VectorXd::Constant(n, c.spacing);
    for (int i = 0; i < n; ++i) c.points[i] = i * c.spacing;
    return c;
  }

  static Chart point() { return Chart{}; }

  bool is_circle() const { return kind == ChartKind::Circle; }

  /// Reduce a coordinate to the canonical chart range (mod 2pi on circles).
  double wrap(double x) const { return is_circle() ? wrap_2pi(x) : x; }

  /// Signed difference a - b, shortest representative on circles.
  double diff(double a, double b) const {
    return is_circle() ? wrap_pm_pi(a - b) : a - b;
  }

  /// Index of a grid point within tol, if x lies on the grid.
  std::optional<int> index_of(double x, double tol = 1e-9) const {
    if (kind == ChartKind::Point) return 0;
    double u = is_circle() ? wrap_2pi(x) : x + window;
    double r = u / spacing;
    int i = static_cast<int>(std::lround(r));
    if (std::abs(r - i) > tol / spacing) return std::nullopt;
    if (is_circle()) {
      if (i == n) i = 0;
      return (i >= 0 && i < n) ? std::optional<int>(i) : std::nullopt;
    }
    return (i >= 0 && i < n) ? std::optional<int>(i) : std::nullopt;
  }
};

/// Uniform fiber grid on [-W, W)^dim together with its Fourier-dual grid.
/// N per axis must be a multiple of 4 so the centered DFT phase folding is
/// exact; dual spacing dtheta = 2pi/(N dx).
struct FiberGrid {
  int dim = 1;
  int n_axis = 0;
  double half_width = 0;
  double dx = 0;
  double dtheta = 0;
  VectorXd axis;        // X_j = -W + j dx
  VectorXd theta_axis;  // theta_k = (k - N/2) dtheta

  static FiberGrid make(int dim, int n_axis, double half_width) {
    if (dim < 1 || dim > 2) throw std::invalid_argument("FiberGrid: dim must be 1 or 2");
    if (n_axis < 8 || n_axis % 4 != 0)
      throw std::invalid_argument("FiberGrid: n_axis must be a multiple of 4, >= 8");
    FiberGrid g;
    g.dim = dim;
    g.n_axis = n_axis;
    g.half_width = half_width;
    g.dx = 2.0 * half_width / n_axis;
    g.dtheta = kTwoPi / (n_axis * g.dx);
    g.axis.resize(n_axis);
    g.theta_axis.resize(n_axis);
    for (int j = 0; j < n_axis; ++j) {
      g.axis[j] = -half_width + j * g.dx;
      g.theta_axis[j] = (j - n_axis / 2) * g.dtheta;
    }
    return g;
  }

  int flat_size() const { return dim == 1 ? n_axis : n_axis * n_axis; }
};

/// 4th-order centered first derivative along the sampled base coordinate.
/// Rows of `vals` index the base grid. Circle charts wrap periodically; line
/// windows use zero extension (observables are required to vanish near the
/// window edge, which the constructors enforce).
MatrixXcd fd4_base_derivative(const Chart& base, const MatrixXcd& vals);

/// Deterministic uniform double in [0,1) from a raw 64-bit draw.
inline double uniform01(uint64_t r) { return (r >> 11) * 0x1.0p-53; }

}  // namespace gwq
