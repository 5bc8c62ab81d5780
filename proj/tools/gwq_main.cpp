#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gwq/harness.hpp"

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end && *end == '\0';
}

int cmd_plot(const std::string& records, const std::string& out_dir) {
  std::ifstream in(records);
  if (!in) {
    std::cerr << "cannot read " << records << "\n";
    return 1;
  }
  std::string line;
  if (!std::getline(in, line)) {
    std::cerr << "empty records file\n";
    return 1;
  }
  using Key = std::array<std::string, 3>;
  std::map<Key, std::vector<std::pair<double, double>>> dirac, vn;
  std::map<std::pair<std::string, std::string>, std::vector<std::pair<double, double>>> norm;
  while (std::getline(in, line)) {
    const auto c = split_csv_line(line);
    if (c.size() < 12) continue;
    double hb, dv, vv, qn;
    if (!parse_double(c[4], hb) || hb <= 0) continue;  // skip summary rows
    const Key key{c[0], c[1], c[2]};
    if (parse_double(c[5], dv)) dirac[key].emplace_back(hb, dv);
    if (parse_double(c[6], vv)) vn[key].emplace_back(hb, vv);
    if (parse_double(c[8], qn)) {
      auto& pts = norm[{c[0], c[1]}];
      if (pts.empty() || pts.back().first != hb) pts.emplace_back(hb, qn);
    }
  }
  std::filesystem::create_directories(out_dir);
  auto emit = [&](const Key& k, const char* kind, const char* label,
                  const std::vector<std::pair<double, double>>& pts) {
    const std::string path = out_dir + "/" + k[0] + "_" + k[1] + "_" + k[2] + "_" + kind + ".svg";
    gwq::write_svg_scan(path, std::string(label) + ": " + k[1] + ", " + k[2], pts);
    std::cout << "wrote " << path << "\n";
  };
  for (const auto& [k, pts] : dirac) emit(k, "dirac", "commutator defect", pts);
  for (const auto& [k, pts] : vn) emit(k, "vn", "product defect", pts);
  for (const auto& [k, pts] : norm) {
    const std::string path = out_dir + "/" + k.first + "_" + k.second + "_norm.svg";
    gwq::write_svg_scan(path, "norm scan: " + k.second, pts);
    std::cout << "wrote " << path << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weyl quantization on groupoid models: defect ladders and norm scans"};
  app.require_subcommand(1);

  auto* ls = app.add_subcommand("list-examples", "list the built-in groupoid models");

  std::string config_path, out_override;
  auto* run = app.add_subcommand("run", "run a defect-ladder experiment from a JSON config");
  run->add_option("--config", config_path, "JSON config file")->required();
  run->add_option("--out", out_override, "output directory override");

  std::string cc_config;
  double cc_tol = 1e-6;
  auto* cc = app.add_subcommand(
      "crosscheck", "compare line-translation operator norms against the flat pair model");
  cc->add_option("--config", cc_config, "JSON config file")->required();
  cc->add_option("--tol", cc_tol, "maximum allowed relative norm difference");

  std::string records_path, plot_out = "plots";
  auto* plot = app.add_subcommand("plot", "re-render SVG scans from a records.csv file");
  plot->add_option("--records", records_path, "records.csv produced by 'run'")->required();
  plot->add_option("--out", plot_out, "directory for the SVG files");

  CLI11_PARSE(app, argc, argv);

  try {
    if (ls->parsed()) {
      for (const auto& name : gwq::example_names()) std::cout << name << "\n";
      return 0;
    }
    if (run->parsed()) {
      const gwq::ExperimentConfig cfg = gwq::load_config(config_path);
      const auto rows = gwq::run_experiment(cfg, out_override);
      const std::string out = out_override.empty() ? cfg.out_dir : out_override;
      for (const auto& r : rows) {
        std::cout << r.example << " " << r.f_id << "," << r.g_id
                  << " hbar=" << gwq::format_g17(r.hbar)
                  << " dirac=" << gwq::format_g17(r.dirac)
                  << " vn=" << gwq::format_g17(r.vn) << " sa=" << gwq::format_g17(r.sa)
                  << "\n";
      }
      std::cout << "wrote " << out << "/records.csv (" << rows.size() << " rung rows)\n";
      return 0;
    }
    if (cc->parsed()) {
      const gwq::ExperimentConfig cfg = gwq::load_config(cc_config);
      const auto rows = gwq::crosscheck_run(cfg, std::cout);
      double worst = 0;
      for (const auto& r : rows) worst = std::max(worst, r.rel_diff);
      if (worst > cc_tol) {
        std::cout << "crosscheck FAIL (tol " << gwq::format_g17(cc_tol) << ")\n";
        return 1;
      }
      std::cout << "crosscheck OK (tol " << gwq::format_g17(cc_tol) << ")\n";
      return 0;
    }
    if (plot->parsed()) return cmd_plot(records_path, plot_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
