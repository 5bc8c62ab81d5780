#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "gwq/harness.hpp"

namespace py = pybind11;
using namespace gwq;

namespace {

ExperimentConfig config_from(const std::string& config) {
  // a JSON object inline, or a path to a JSON file
  const auto brace = config.find('{');
  if (brace != std::string::npos) return parse_config_json(config);
  return load_config(config);
}

int resolve_sign_arg(const std::string& sign, const GroupoidModel& m) {
  if (sign == "+") return +1;
  if (sign == "-") return -1;
  if (sign == "default") return default_sign(m);
  throw std::invalid_argument("sign must be 'default', '+' or '-'");
}

py::dict row_dict(const DefectRow& r) {
  py::dict d;
  d["example"] = r.example;
  d["f_id"] = r.f_id;
  d["g_id"] = r.g_id;
  d["sign"] = r.sign;
  d["hbar"] = r.hbar;
  d["dirac_defect"] = r.dirac;
  d["vn_defect"] = r.vn;
  d["sa_defect"] = r.sa;
  d["reduced_norm"] = r.qnorm;
  d["classical_norm"] = r.cnorm;
  d["trunc_mass"] = r.trunc;
  d["wall_ms"] = r.wall_ms;
  return d;
}

}  // namespace

PYBIND11_MODULE(_gwq, m) {
  m.doc() = "Weyl quantization on groupoid models: kernels, defects, norm scans";
  m.attr("__version__") = "0.1.0";

  m.def("list_examples", &example_names, "Names of the built-in groupoid models.");

  m.def(
      "example_info",
      [](const std::string& name) {
        const GroupoidModel g = make_example(name);
        py::dict d;
        d["name"] = g.name;
        d["family"] = g.family == Family::Pair         ? "pair"
                      : g.family == Family::LieGroup   ? "group"
                                                       : "transformation";
        d["fiber_dim"] = g.fiber_dim;
        d["base_points"] = g.base.n;
        d["base_kind"] = g.base.kind == ChartKind::Circle     ? "circle"
                         : g.base.kind == ChartKind::LineWindow ? "line"
                                                                : "point";
        d["fiber_points"] = g.fiber.n_axis;
        d["fiber_halfwidth"] = g.fiber.half_width;
        d["injectivity_radius"] = g.r_inj;
        d["sampled_units"] = g.sampled_units;
        return d;
      },
      py::arg("name"), "Grid and chart summary of one built-in model.");

  m.def(
      "defects",
      [](const std::string& example, const std::string& f_id, const std::string& g_id,
         double hbar, const std::string& sign, std::uint64_t seed) {
        const GroupoidModel g = make_example(example);
        set_norm_seed(seed);
        DefectOptions opt;
        opt.sign = resolve_sign_arg(sign, g);
        opt.kappa = default_cutoff(g);
        opt.timing = false;
        ObservableSpec sf, sg;
        sf.id = f_id;
        sg.id = g_id;
        const PWObservable f = make_pw_observable(g, sf);
        const PWObservable h = make_pw_observable(g, sg);
        return row_dict(compute_defects(g, f, h, hbar, opt));
      },
      py::arg("example"), py::arg("f_id"), py::arg("g_id"), py::arg("hbar"),
      py::arg("sign") = "default", py::arg("seed") = 0,
      "Commutator, product and adjoint defects of one observable pair at one hbar.");

  m.def(
      "norm_scan",
      [](const std::string& example, const std::string& f_id,
         const std::vector<double>& ladder, std::uint64_t seed) {
        const GroupoidModel g = make_example(example);
        set_norm_seed(seed);
        DefectOptions opt;
        opt.sign = default_sign(g);
        opt.kappa = default_cutoff(g);
        ObservableSpec sf;
        sf.id = f_id;
        const PWObservable f = make_pw_observable(g, sf);
        return norm_continuity_scan(g, f, ladder, opt);
      },
      py::arg("example"), py::arg("f_id"), py::arg("ladder"), py::arg("seed") = 0,
      "Operator norms along an hbar ladder; hbar = 0 gives the classical sup norm.");

  m.def(
      "run_experiment",
      [](const std::string& config, const std::string& out) {
        const ExperimentConfig cfg = config_from(config);
        py::list rows;
        for (const auto& r : run_experiment(cfg, out)) rows.append(row_dict(r));
        return rows;
      },
      py::arg("config"), py::arg("out") = "",
      "Run a full defect-ladder experiment from a JSON config (inline or a path); "
      "writes records.csv, manifest.json and scan files, returns the rung rows.");

  m.def(
      "crosscheck",
      [](const std::string& config) {
        const ExperimentConfig cfg = config_from(config);
        std::ostringstream log;
        py::list out;
        for (const auto& r : crosscheck_run(cfg, log)) {
          py::dict d;
          d["f_id"] = r.f_id;
          d["hbar"] = r.hbar;
          d["norm_transf"] = r.norm_transf;
          d["norm_pair"] = r.norm_pair;
          d["rel_diff"] = r.rel_diff;
          out.append(d);
        }
        return out;
      },
      py::arg("config"),
      "Operator-norm comparison of the line-translation model against the flat "
      "pair model on matched grids.");

  m.def(
      "order_fit",
      [](const std::vector<double>& hbars, const std::vector<double>& defects) {
        const OrderFit f = order_fit(hbars, defects);
        py::dict d;
        d["order"] = f.order;
        d["resid"] = f.resid;
        d["all_zero"] = f.all_zero;
        return d;
      },
      py::arg("hbars"), py::arg("defects"),
      "Least-squares slope of log(defect) against log(hbar).");
}
