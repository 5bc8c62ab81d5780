#include "gwq/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace gwq {

namespace {

int resolve_sign(const std::string& s, const GroupoidModel& m) {
  if (s == "+") return +1;
  if (s == "-") return -1;
  return default_sign(m);
}

Cutoff resolve_kappa(const ExperimentConfig& cfg, const GroupoidModel& m) {
  if (cfg.kappa_none) return trivial_cutoff();
  if (cfg.kappa_default) return default_cutoff(m);
  return make_cutoff(m, cfg.r_in, cfg.r_out);
}

ObservableSpec parse_obs(const json& j) {
  ObservableSpec s;
  if (j.is_string()) {
    s.id = j.get<std::string>();
    return s;
  }
  if (!j.is_object()) throw std::invalid_argument("observable entry must be a string or object");
  for (const auto& [k, v] : j.items()) {
    if (k == "id") s.id = v.get<std::string>();
    else if (k == "s") s.s = v.get<double>();
    else if (k == "m") s.m = v.get<double>();
    else if (k == "radius") s.radius = v.get<double>();
    else if (k == "amp") s.amp = v.get<double>();
    else if (k == "env_center") s.env_center = v.get<double>();
    else if (k == "env_width") s.env_width = v.get<double>();
    else if (k == "env_kappa") s.env_kappa = v.get<double>();
    else throw std::invalid_argument("unknown observable key '" + k + "'");
  }
  if (s.id.empty()) throw std::invalid_argument("observable entry needs an id");
  return s;
}

Resolution parse_res(const json& j) {
  Resolution r;
  if (!j.is_object()) throw std::invalid_argument("resolution must be an object");
  for (const auto& [k, v] : j.items()) {
    if (k == "base_points") r.base_points = v.get<int>();
    else if (k == "window") r.window = v.get<double>();
    else if (k == "group_points") r.group_points = v.get<int>();
    else if (k == "group_window") r.group_window = v.get<double>();
    else if (k == "fiber_points") r.fiber_points = v.get<int>();
    else if (k == "fiber_window") r.fiber_window = v.get<double>();
    else if (k == "scaled_points") r.scaled_points = v.get<int>();
    else if (k == "scaled_halfwidth") r.scaled_halfwidth = v.get<double>();
    else if (k == "units") r.units = v.get<std::vector<double>>();
    else throw std::invalid_argument("unknown resolution key '" + k + "'");
  }
  return r;
}

json obs_to_json(const ObservableSpec& s) {
  json j;
  j["id"] = s.id;
  if (s.s > 0) j["s"] = s.s;
  if (s.m > 0) j["m"] = s.m;
  if (s.radius > 0) j["radius"] = s.radius;
  if (s.amp != 1.0) j["amp"] = s.amp;
  if (!std::isnan(s.env_center)) j["env_center"] = s.env_center;
  if (s.env_width > 0) j["env_width"] = s.env_width;
  if (s.env_kappa > 0) j["env_kappa"] = s.env_kappa;
  return j;
}

json res_to_json(const Resolution& r) {
  json j = json::object();
  if (r.base_points) j["base_points"] = r.base_points;
  if (r.window > 0) j["window"] = r.window;
  if (r.group_points) j["group_points"] = r.group_points;
  if (r.group_window > 0) j["group_window"] = r.group_window;
  if (r.fiber_points) j["fiber_points"] = r.fiber_points;
  if (r.fiber_window > 0) j["fiber_window"] = r.fiber_window;
  if (r.scaled_points) j["scaled_points"] = r.scaled_points;
  if (r.scaled_halfwidth > 0) j["scaled_halfwidth"] = r.scaled_halfwidth;
  if (!r.units.empty()) j["units"] = r.units;
  return j;
}

void write_scan_csv(const fs::path& path, const char* ycol,
                    const std::vector<std::pair<double, double>>& pts) {
  std::FILE* fp = std::fopen(path.string().c_str(), "w");
  if (!fp) throw std::runtime_error("cannot open " + path.string());
  std::fprintf(fp, "hbar,%s\n", ycol);
  for (const auto& [x, y] : pts)
    std::fprintf(fp, "%s,%s\n", format_g17(x).c_str(), format_g17(y).c_str());
  std::fclose(fp);
}

std::string sanitize(std::string s) {
  for (char& c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '.') c = '_';
  return s;
}

}  // namespace

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

DefectRow compute_defects(const GroupoidModel& m, const PWObservable& f,
                          const PWObservable& g, double hbar, const DefectOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  DefectRow row;
  row.example = m.name;
  row.f_id = f.id;
  row.g_id = g.id;
  row.sign = opt.sign;
  row.hbar = hbar;

  const KernelElement Qf = weyl_quantize(m, f, hbar, opt.sign, opt.kappa);
  const KernelElement Qg = weyl_quantize(m, g, hbar, opt.sign, opt.kappa);
  const KernelElement C1 = convolve(Qf, Qg);
  const KernelElement C2 = convolve(Qg, Qf);

  BracketDescriptor desc = default_bracket(m);
  desc.sign = opt.sign;  // kernel orientation pairs with bracket orientation
  const PWObservable h = poisson_bracket(m, desc, f, g);
  const KernelElement Qh = weyl_quantize(m, h, hbar, opt.sign, opt.kappa);
  const cplx ih(0.0, 1.0 / hbar);
  const KernelElement comm = kernel_lincomb(ih, C1, -ih, C2);
  // on scaled-window models the convolution rows within a support radius of
  // the boundary are incomplete quadratures; defect norms are taken on the
  // complete interior section
  const double marg = std::max(f.support_radius, g.support_radius);
  row.dirac = reduced_norm_interior(kernel_lincomb(1.0, comm, -1.0, Qh), marg);

  const PWObservable p = pw_product(f, g);
  const KernelElement Qp = weyl_quantize(m, p, hbar, opt.sign, opt.kappa);
  row.vn = reduced_norm_interior(kernel_lincomb(1.0, C1, -1.0, Qp), f.support_radius);

  const KernelElement Qfc = weyl_quantize(m, pw_conj(f), hbar, opt.sign, opt.kappa);
  row.sa = reduced_norm(kernel_lincomb(1.0, Qfc, -1.0, involute(Qf)));

  row.qnorm = reduced_norm(Qf);
  row.cnorm = sup_dual(f);
  row.trunc = std::max(std::max(f.trunc_mass, g.trunc_mass),
                       std::max(h.trunc_mass, p.trunc_mass));
  if (opt.timing) {
    row.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
  }
  return row;
}

std::vector<std::pair<double, double>> norm_continuity_scan(
    const GroupoidModel& m, const PWObservable& f, const std::vector<double>& ladder,
    const DefectOptions& opt) {
  std::vector<std::pair<double, double>> out;
  for (double hb : ladder) {
    const KernelElement K =
        hb == 0.0 ? classical_section(m, f) : weyl_quantize(m, f, hb, opt.sign, opt.kappa);
    out.emplace_back(hb, reduced_norm(K));
  }
  return out;
}

OrderFit order_fit(const std::vector<double>& hbars, const std::vector<double>& defects) {
  OrderFit fit;
  std::vector<double> x, y;
  for (size_t i = 0; i < hbars.size(); ++i) {
    if (hbars[i] > 0 && defects[i] > 0) {
      x.push_back(std::log(hbars[i]));
      y.push_back(std::log(defects[i]));
    }
  }
  if (x.empty()) {
    fit.all_zero = true;
    fit.order = std::numeric_limits<double>::infinity();
    return fit;
  }
  if (x.size() == 1) return fit;
  const size_t n = x.size();
  double mx = 0, my = 0;
  for (size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  fit.order = sxy / sxx;
  const double b = my - fit.order * mx;
  double ss = 0;
  for (size_t i = 0; i < n; ++i) {
    const double r = y[i] - (fit.order * x[i] + b);
    ss += r * r;
  }
  fit.resid = std::sqrt(ss / n);
  return fit;
}

ExperimentConfig parse_config_json(const std::string& text) {
  const json j = json::parse(text);
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  ExperimentConfig c;
  bool have_example = false, have_obs = false, have_ladder = false;
  for (const auto& [k, v] : j.items()) {
    if (k == "example") {
      c.example = v.get<std::string>();
      have_example = true;
    } else if (k == "observables") {
      if (!v.is_array()) throw std::invalid_argument("observables must be an array");
      for (const auto& o : v) c.observables.push_back(parse_obs(o));
      have_obs = !c.observables.empty();
    } else if (k == "ladder") {
      c.ladder = v.get<std::vector<double>>();
      have_ladder = !c.ladder.empty();
    } else if (k == "sign") {
      c.sign = v.get<std::string>();
      if (c.sign != "default" && c.sign != "+" && c.sign != "-")
        throw std::invalid_argument("sign must be 'default', '+' or '-'");
    } else if (k == "kappa") {
      if (v.is_string()) {
        const std::string s = v.get<std::string>();
        if (s == "default") {
          c.kappa_default = true;
        } else if (s == "none") {
          c.kappa_default = false;
          c.kappa_none = true;
        } else {
          throw std::invalid_argument("kappa must be 'default', 'none' or {r_in, r_out}");
        }
      } else if (v.is_object()) {
        c.kappa_default = false;
        for (const auto& [kk, vv] : v.items()) {
          if (kk == "r_in") c.r_in = vv.get<double>();
          else if (kk == "r_out") c.r_out = vv.get<double>();
          else throw std::invalid_argument("unknown kappa key '" + kk + "'");
        }
      } else {
        throw std::invalid_argument("kappa must be 'default', 'none' or {r_in, r_out}");
      }
    } else if (k == "resolution") {
      const Resolution r = parse_res(v);
      const double keep_window = c.resolution.window;
      c.resolution = r;
      if (keep_window > 0 && r.window == 0) c.resolution.window = keep_window;
    } else if (k == "window") {
      c.resolution.window = v.get<double>();
    } else if (k == "out_dir") {
      c.out_dir = v.get<std::string>();
    } else if (k == "seed") {
      c.seed = v.get<std::uint64_t>();
    } else if (k == "timing") {
      const std::string s = v.get<std::string>();
      if (s == "wall") c.timing_wall = true;
      else if (s == "none") c.timing_wall = false;
      else throw std::invalid_argument("timing must be 'wall' or 'none'");
    } else {
      throw std::invalid_argument("unknown config key '" + k + "'");
    }
  }
  if (!have_example) throw std::invalid_argument("config needs an 'example'");
  if (!have_obs) throw std::invalid_argument("config needs a nonempty 'observables' list");
  if (!have_ladder) throw std::invalid_argument("config needs a nonempty 'ladder'");
  for (double hb : c.ladder)
    if (hb < 0) throw std::invalid_argument("ladder entries must be >= 0");
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_config_json(text);
}

std::vector<DefectRow> run_experiment(const ExperimentConfig& cfg,
                                      const std::string& out_override) {
  const GroupoidModel model = make_example(cfg.example, cfg.resolution);
  set_norm_seed(cfg.seed);
  DefectOptions opt;
  opt.sign = resolve_sign(cfg.sign, model);
  opt.kappa = resolve_kappa(cfg, model);
  opt.timing = cfg.timing_wall;

  std::vector<PWObservable> obs;
  for (const auto& s : cfg.observables) obs.push_back(make_pw_observable(model, s));

  const fs::path out = out_override.empty() ? fs::path(cfg.out_dir) : fs::path(out_override);
  fs::create_directories(out / "scans");

  std::vector<std::pair<int, int>> pairs;
  if (obs.size() == 1) {
    pairs.emplace_back(0, 0);
  } else {
    for (size_t i = 0; i < obs.size(); ++i)
      for (size_t j = 0; j < obs.size(); ++j)
        if (i != j) pairs.emplace_back(static_cast<int>(i), static_cast<int>(j));
  }

  std::vector<DefectRow> rows;
  struct PairFit {
    int fi, gi;
    OrderFit dirac, vn;
    bool fitted = false;
  };
  std::vector<PairFit> fits;

  for (const auto& [fi, gi] : pairs) {
    std::vector<double> hb, dd, vv;
    std::vector<std::pair<double, double>> dpts, vpts;
    for (double hbar : cfg.ladder) {
      if (hbar == 0.0) continue;  // classical rung contributes to norm scans only
      DefectRow row = compute_defects(model, obs[fi], obs[gi], hbar, opt);
      hb.push_back(hbar);
      dd.push_back(row.dirac);
      vv.push_back(row.vn);
      dpts.emplace_back(hbar, row.dirac);
      vpts.emplace_back(hbar, row.vn);
      rows.push_back(std::move(row));
    }
    PairFit pf;
    pf.fi = fi;
    pf.gi = gi;
    if (!hb.empty()) {
      pf.dirac = order_fit(hb, dd);
      pf.vn = order_fit(hb, vv);
      pf.fitted = true;
    }
    fits.push_back(pf);

    const std::string stem =
        sanitize(cfg.example) + "_" + sanitize(obs[fi].id) + "_" + sanitize(obs[gi].id);
    write_scan_csv(out / "scans" / (stem + "_dirac.csv"), "dirac_defect", dpts);
    write_scan_csv(out / "scans" / (stem + "_vn.csv"), "vn_defect", vpts);
    write_svg_scan((out / "scans" / (stem + "_dirac.svg")).string(),
                   "commutator defect: " + obs[fi].id + ", " + obs[gi].id, dpts);
    write_svg_scan((out / "scans" / (stem + "_vn.svg")).string(),
                   "product defect: " + obs[fi].id + ", " + obs[gi].id, vpts);
  }

  for (const auto& f : obs) {
    const auto scan = norm_continuity_scan(model, f, cfg.ladder, opt);
    const std::string stem = sanitize(cfg.example) + "_" + sanitize(f.id);
    write_scan_csv(out / "scans" / (stem + "_norm.csv"), "reduced_norm", scan);
    write_svg_scan((out / "scans" / (stem + "_norm.svg")).string(), "norm scan: " + f.id,
                   scan);
  }

  // records.csv: defect rows grouped per pair, then that pair's fitted orders
  std::FILE* fp = std::fopen((out / "records.csv").string().c_str(), "w");
  if (!fp) throw std::runtime_error("cannot open records.csv for writing");
  std::fprintf(fp,
               "example,f_id,g_id,sign,hbar,dirac_defect,vn_defect,sa_defect,"
               "reduced_norm,classical_norm,trunc_mass,wall_ms\n");
  size_t cursor = 0;
  for (const auto& pf : fits) {
    const std::string fid = obs[pf.fi].id, gid = obs[pf.gi].id;
    for (; cursor < rows.size(); ++cursor) {
      const DefectRow& r = rows[cursor];
      if (r.f_id != fid || r.g_id != gid) break;
      std::fprintf(fp, "%s,%s,%s,%d,%s,%s,%s,%s,%s,%s,%s,%s\n", r.example.c_str(),
                   r.f_id.c_str(), r.g_id.c_str(), r.sign, format_g17(r.hbar).c_str(),
                   format_g17(r.dirac).c_str(), format_g17(r.vn).c_str(),
                   format_g17(r.sa).c_str(), format_g17(r.qnorm).c_str(),
                   format_g17(r.cnorm).c_str(), format_g17(r.trunc).c_str(),
                   format_g17(r.wall_ms).c_str());
    }
    if (!pf.fitted) continue;
    auto ord = [](const OrderFit& f) {
      return f.all_zero ? std::string("inf") : format_g17(f.order);
    };
    std::fprintf(fp, "%s,%s,%s,%d,order,%s,%s,,,,,\n", cfg.example.c_str(), fid.c_str(),
                 gid.c_str(), opt.sign, ord(pf.dirac).c_str(), ord(pf.vn).c_str());
    std::fprintf(fp, "%s,%s,%s,%d,order-resid,%s,%s,,,,,\n", cfg.example.c_str(),
                 fid.c_str(), gid.c_str(), opt.sign,
                 (pf.dirac.all_zero ? std::string("inf") : format_g17(pf.dirac.resid)).c_str(),
                 (pf.vn.all_zero ? std::string("inf") : format_g17(pf.vn.resid)).c_str());
  }
  std::fclose(fp);

  json manifest;
  manifest["version"] = "0.1.0";
  manifest["example"] = cfg.example;
  manifest["seed"] = cfg.seed;
  manifest["records"] = "records.csv";
  json cj;
  cj["example"] = cfg.example;
  cj["observables"] = json::array();
  for (const auto& s : cfg.observables) cj["observables"].push_back(obs_to_json(s));
  cj["ladder"] = cfg.ladder;
  cj["sign"] = cfg.sign;
  if (cfg.kappa_none) {
    cj["kappa"] = "none";
  } else if (cfg.kappa_default) {
    cj["kappa"] = "default";
  } else {
    cj["kappa"] = json{{"r_in", cfg.r_in}, {"r_out", cfg.r_out}};
  }
  const json rj = res_to_json(cfg.resolution);
  if (!rj.empty()) cj["resolution"] = rj;
  cj["out_dir"] = cfg.out_dir;
  cj["timing"] = cfg.timing_wall ? "wall" : "none";
  manifest["config"] = cj;
  std::ofstream mf(out / "manifest.json");
  mf << manifest.dump(2) << "\n";
  return rows;
}

std::vector<CrosscheckRow> crosscheck_run(const ExperimentConfig& cfg, std::ostream& log) {
  if (cfg.example != "transf-line-translation")
    throw std::invalid_argument("crosscheck expects example 'transf-line-translation'");
  const GroupoidModel mt = make_example(cfg.example, cfg.resolution);
  const GroupoidModel mp = make_example("pair-flat-line", cfg.resolution);
  set_norm_seed(cfg.seed);
  const int st = resolve_sign(cfg.sign, mt);
  const int sp = resolve_sign(cfg.sign, mp);
  const Cutoff kt = resolve_kappa(cfg, mt);
  const Cutoff kp = resolve_kappa(cfg, mp);

  std::vector<CrosscheckRow> out;
  double worst = 0;
  for (const auto& spec : cfg.observables) {
    const PWObservable ft = make_pw_observable(mt, spec);
    const PWObservable fpw = make_pw_observable(mp, spec);
    for (double hbar : cfg.ladder) {
      if (hbar == 0.0) continue;
      CrosscheckRow row;
      row.f_id = spec.id;
      row.hbar = hbar;
      row.norm_transf = reduced_norm(weyl_quantize(mt, ft, hbar, st, kt));
      row.norm_pair = reduced_norm(weyl_quantize(mp, fpw, hbar, sp, kp));
      row.rel_diff = std::abs(row.norm_transf - row.norm_pair) /
                     std::max(row.norm_pair, 1e-300);
      worst = std::max(worst, row.rel_diff);
      log << "crosscheck " << spec.id << " hbar=" << format_g17(hbar)
          << " transf=" << format_g17(row.norm_transf)
          << " pair=" << format_g17(row.norm_pair)
          << " rel=" << format_g17(row.rel_diff) << "\n";
      out.push_back(row);
    }
  }
  log << "crosscheck max relative difference: " << format_g17(worst) << "\n";

  const fs::path out_dir(cfg.out_dir);
  fs::create_directories(out_dir);
  std::FILE* fp = std::fopen((out_dir / "crosscheck.csv").string().c_str(), "w");
  if (!fp) throw std::runtime_error("cannot open crosscheck.csv for writing");
  std::fprintf(fp, "f_id,hbar,norm_transf,norm_pair,rel_diff\n");
  for (const auto& r : out)
    std::fprintf(fp, "%s,%s,%s,%s,%s\n", r.f_id.c_str(), format_g17(r.hbar).c_str(),
                 format_g17(r.norm_transf).c_str(), format_g17(r.norm_pair).c_str(),
                 format_g17(r.rel_diff).c_str());
  std::fclose(fp);
  return out;
}

void write_svg_scan(const std::string& path, const std::string& title,
                    const std::vector<std::pair<double, double>>& pts) {
  std::vector<std::pair<double, double>> p;
  for (const auto& [x, y] : pts)
    if (x > 0 && y > 0) p.emplace_back(std::log10(x), std::log10(y));
  const double W = 480, H = 360, ml = 64, mr = 20, mt = 34, mb = 40;
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
  f << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  f << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"13\">"
    << title << "</text>\n";
  f << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << W - ml - mr
    << "\" height=\"" << H - mt - mb << "\" fill=\"none\" stroke=\"#888\"/>\n";
  if (!p.empty()) {
    double xmin = p[0].first, xmax = p[0].first, ymin = p[0].second, ymax = p[0].second;
    for (const auto& [x, y] : p) {
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
    if (xmax - xmin < 1e-12) {
      xmin -= 0.5;
      xmax += 0.5;
    }
    if (ymax - ymin < 1e-12) {
      ymin -= 0.5;
      ymax += 0.5;
    }
    auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (W - ml - mr); };
    auto py = [&](double y) { return H - mb - (y - ymin) / (ymax - ymin) * (H - mt - mb); };
    f << "<polyline fill=\"none\" stroke=\"#336699\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : p) f << px(x) << "," << py(y) << " ";
    f << "\"/>\n";
    for (const auto& [x, y] : p)
      f << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"3\" fill=\"#336699\"/>\n";
    char buf[64];
    std::snprintf(buf, sizeof buf, "1e%.2f", xmin);
    f << "<text x=\"" << ml << "\" y=\"" << H - 18 << "\" font-size=\"11\">" << buf
      << "</text>\n";
    std::snprintf(buf, sizeof buf, "1e%.2f", xmax);
    f << "<text x=\"" << W - mr << "\" y=\"" << H - 18
      << "\" text-anchor=\"end\" font-size=\"11\">" << buf << "</text>\n";
    std::snprintf(buf, sizeof buf, "1e%.2f", ymax);
    f << "<text x=\"4\" y=\"" << mt + 10 << "\" font-size=\"11\">" << buf << "</text>\n";
    std::snprintf(buf, sizeof buf, "1e%.2f", ymin);
    f << "<text x=\"4\" y=\"" << H - mb << "\" font-size=\"11\">" << buf << "</text>\n";
    f << "<text x=\"" << W / 2 << "\" y=\"" << H - 6
      << "\" text-anchor=\"middle\" font-size=\"11\">hbar (log)</text>\n";
  } else {
    f << "<text x=\"" << W / 2 << "\" y=\"" << H / 2
      << "\" text-anchor=\"middle\" font-size=\"12\">no positive data</text>\n";
  }
  f << "</svg>\n";
}

}  // namespace gwq
