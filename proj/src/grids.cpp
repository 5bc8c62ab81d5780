#include "gwq/grids.hpp"

namespace gwq {

MatrixXcd fd4_base_derivative(const Chart& base, const MatrixXcd& vals) {
  const int nq = static_cast<int>(vals.rows());
  if (base.kind != ChartKind::Point && nq != base.n)
    throw std::invalid_argument("fd4_base_derivative: row count != base grid size");
  if (base.kind == ChartKind::Point) return MatrixXcd::Zero(vals.rows(), vals.cols());

  MatrixXcd out(vals.rows(), vals.cols());
  const double h = base.spacing;
  const bool per = base.is_circle();
  auto row = [&](int i) -> MatrixXcd {
    if (per) return vals.row(((i % nq) + nq) % nq);
    if (i < 0 || i >= nq) return MatrixXcd::Zero(1, vals.cols());
    return vals.row(i);
  };
  for (int i = 0; i < nq; ++i) {
    // f' = (-f[i+2] + 8 f[i+1] - 8 f[i-1] + f[i-2]) / (12 h)
    out.row(i) =
        (-row(i + 2) + 8.0 * row(i + 1) - 8.0 * row(i - 1) + row(i - 2)) / (12.0 * h);
  }
  return out;
}

}  // namespace gwq
