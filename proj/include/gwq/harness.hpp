#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "gwq/cstar.hpp"
#include "gwq/poisson.hpp"

namespace gwq {

/// One records.csv row: defects of a quantized observable pair at one rung.
struct DefectRow {
  std::string example, f_id, g_id;
  int sign = -1;
  double hbar = 0;
  double dirac = 0, vn = 0, sa = 0;
  double qnorm = 0, cnorm = 0, trunc = 0, wall_ms = 0;
};

struct DefectOptions {
  int sign = -1;
  Cutoff kappa;
  bool timing = true;
};

/// Commutator-vs-bracket, product-vs-product and adjoint defects of the
/// quantization at one hbar, together with the operator and classical norms.
DefectRow compute_defects(const GroupoidModel& m, const PWObservable& f,
                          const PWObservable& g, double hbar, const DefectOptions& opt);

/// Operator norms along an hbar ladder; hbar = 0 contributes the classical
/// sup norm.
std::vector<std::pair<double, double>> norm_continuity_scan(
    const GroupoidModel& m, const PWObservable& f, const std::vector<double>& ladder,
    const DefectOptions& opt);

/// Least-squares slope of log(defect) vs log(hbar). Rungs with exactly zero
/// defect are excluded; all_zero marks a scan with nothing to fit.
struct OrderFit {
  double order = 0;
  double resid = 0;
  bool all_zero = false;
};
OrderFit order_fit(const std::vector<double>& hbars, const std::vector<double>& defects);

struct ExperimentConfig {
  std::string example;
  std::vector<ObservableSpec> observables;
  std::vector<double> ladder;
  std::string sign = "default";  // "default" | "+" | "-"
  bool kappa_default = true;
  bool kappa_none = false;
  double r_in = 0, r_out = 0;
  Resolution resolution;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  bool timing_wall = true;
};

/// Strict JSON config parsing; unknown keys are rejected.
ExperimentConfig parse_config_json(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Runs the ladder over all ordered observable pairs; writes records.csv
/// (with fitted-order summary rows), manifest.json, per-pair scan CSVs and
/// SVG plots into the output directory. Returns the emitted rows.
std::vector<DefectRow> run_experiment(const ExperimentConfig& cfg,
                                      const std::string& out_override = "");

struct CrosscheckRow {
  std::string f_id;
  double hbar = 0;
  double norm_transf = 0, norm_pair = 0, rel_diff = 0;
};

/// Norm comparison between the line-translation transformation model and the
/// flat pair model on identical grids; writes crosscheck.csv.
std::vector<CrosscheckRow> crosscheck_run(const ExperimentConfig& cfg, std::ostream& log);

/// Minimal SVG log-log plot of positive (x, y) pairs.
void write_svg_scan(const std::string& path, const std::string& title,
                    const std::vector<std::pair<double, double>>& pts);

/// Round-trip double formatting used in every CSV cell.
std::string format_g17(double v);

}  // namespace gwq
