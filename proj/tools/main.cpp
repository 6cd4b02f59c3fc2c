// mdiff: steady states, coarsening dynamics, accumulation times, and reduced
// dynamics for diffusion problems with small interior compartments.
//
// Subcommands: greens, steady2d, steady3d, ripen, accum, qs, kuramoto,
// oracle, compare. Every run writes a manifest next to its outputs; identical
// inputs give byte-identical CSV/JSON.

#include <CLI11.hpp>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "mdiff/accumulation.hpp"
#include "mdiff/greens.hpp"
#include "mdiff/manifest.hpp"
#include "mdiff/oracle.hpp"
#include "mdiff/pdeode.hpp"
#include "mdiff/ripening.hpp"
#include "mdiff/spec_io.hpp"
#include "mdiff/steady2d.hpp"
#include "mdiff/steady3d.hpp"
#include "mdiff/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mdiff;

namespace {

struct CommonArgs {
  std::string spec_path;
  std::string out_dir = ".";
  double epsilon_override = -1.0;
  std::string sweep;  // key=a:b:n
  int jobs = 1;
  bool emit_plot_data = false;
};

class CsvWriter {
 public:
  CsvWriter(const fs::path& path, const std::string& header) : out_(path) {
    if (!out_) throw Error("cannot open for writing: " + path.string());
    out_ << header << "\n";
  }
  void row(const std::vector<double>& values) {
    for (size_t i = 0; i < values.size(); ++i) {
      if (i) out_ << ",";
      out_ << format_g17(values[i]);
    }
    out_ << "\n";
  }

 private:
  std::ofstream out_;
};

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open: " + path);
  json j;
  in >> j;
  return j;
}

void write_json_file(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open for writing: " + path.string());
  out << j.dump(2) << "\n";
}

ProblemSpec load_spec(const CommonArgs& a) {
  ProblemSpec ps = read_spec_file(a.spec_path);
  if (a.epsilon_override > 0.0) ps.epsilon = a.epsilon_override;
  return ps;
}

RunManifest start_manifest(const std::string& sub, const CommonArgs& a) {
  RunManifest m;
  m.subcommand = sub;
  m.spec_path = a.spec_path;
  m.version = version_string;
  m.parameters["jobs"] = a.jobs;
  if (a.epsilon_override > 0.0) m.parameters["epsilon"] = a.epsilon_override;
  return m;
}

void finish_manifest(RunManifest& m, const fs::path& dir,
                     std::chrono::steady_clock::time_point t0) {
  m.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  write_manifest((dir / "manifest.json").string(), m);
}

// parse "key=a:b:n"
struct Sweep {
  std::string key;
  double a = 0.0, b = 0.0;
  int n = 0;
};
Sweep parse_sweep(const std::string& s) {
  Sweep sw;
  auto eq = s.find('=');
  if (eq == std::string::npos) throw Error("sweep: expected key=a:b:n");
  sw.key = s.substr(0, eq);
  std::string rest = s.substr(eq + 1);
  if (std::sscanf(rest.c_str(), "%lf:%lf:%d", &sw.a, &sw.b, &sw.n) != 3 ||
      sw.n < 1)
    throw Error("sweep: expected key=a:b:n with n >= 1");
  return sw;
}

Point parse_point(const std::string& s) {
  Point p = Point::Zero();
  double x = 0, y = 0, z = 0;
  int got = std::sscanf(s.c_str(), "%lf,%lf,%lf", &x, &y, &z);
  if (got < 2) throw Error("expected a point like 0.3,0.0[,0.1]");
  p = Point(x, y, z);
  return p;
}

// ----------------------------------------------------------------------------

void run_greens(const CommonArgs& a, const std::string& source, int grid) {
  auto t0 = std::chrono::steady_clock::now();
  ProblemSpec ps = load_spec(a);
  fs::create_directories(a.out_dir);
  RunManifest man = start_manifest("greens", a);
  man.parameters["grid"] = grid;

  Point src;
  if (!source.empty()) {
    src = parse_point(source);
  } else if (!ps.compartments.empty()) {
    src = ps.compartments[0].center;
  } else {
    throw Error("greens: give --source or a spec with compartments");
  }
  man.parameters["source"] = {src[0], src[1], src[2]};

  GreensFunction G = ps.gamma0 > 0.0
                         ? make_helmholtz_greens(ps.geometry, ps.D, ps.gamma0)
                         : make_laplace_greens(ps.geometry, ps.D);
  const int dim = dimension(ps.geometry);
  fs::path csv = fs::path(a.out_dir) / "greens.csv";
  CsvWriter w(csv, dim == 2 ? "x,y,value,regular_part"
                            : "x,y,z,value,regular_part");
  auto emit = [&](const Point& x) {
    if ((x - src).norm() < 1e-9) return;
    if (boundary_distance(ps.geometry, x) <= 0.0) return;
    auto g = G.eval(x, src);
    if (dim == 2)
      w.row({x[0], x[1], g.value, g.regular_part});
    else
      w.row({x[0], x[1], x[2], g.value, g.regular_part});
  };
  // lattice over the bounding box
  double Lx, Ly, Lz = 0.0, ox = 0.0, oy = 0.0, oz = 0.0;
  if (const auto* r = std::get_if<Rect2D>(&ps.geometry)) {
    Lx = r->L1;
    Ly = r->L2;
  } else if (const auto* dk = std::get_if<Disk2D>(&ps.geometry)) {
    Lx = Ly = 2.0 * dk->radius;
    ox = oy = -dk->radius;
  } else {
    const auto& sp = std::get<Sphere3D>(ps.geometry);
    Lx = Ly = Lz = 2.0 * sp.R0;
    ox = oy = oz = -sp.R0;
  }
  for (int iz = 0; iz < (dim == 3 ? grid : 1); ++iz)
    for (int iy = 0; iy < grid; ++iy)
      for (int ix = 0; ix < grid; ++ix) {
        Point x(ox + (ix + 0.5) * Lx / grid, oy + (iy + 0.5) * Ly / grid,
                dim == 3 ? oz + (iz + 0.5) * Lz / grid : 0.0);
        emit(x);
      }
  man.outputs.push_back(csv.string());
  finish_manifest(man, a.out_dir, t0);
}

json coefficients2d_json(const SteadyField2D& f) {
  const auto& c = f.coefficients();
  json j;
  j["nu"] = c.nu;
  j["A"] = std::vector<double>(c.A.data(), c.A.data() + c.A.size());
  j["Psi"] = std::vector<double>(c.Psi.data(), c.Psi.data() + c.Psi.size());
  j["c0"] = std::vector<double>(c.c0.data(), c.c0.data() + c.c0.size());
  if (c.u_inf) j["u_inf"] = *c.u_inf;
  j["solve_residual"] = c.solve_residual;
  return j;
}

void sample_field_2d(const fs::path& csv, const ProblemSpec& ps,
                     const std::function<double(const Point&)>& field,
                     int grid) {
  CsvWriter w(csv, "x,y,u");
  double Lx, Ly, ox = 0.0, oy = 0.0;
  if (const auto* r = std::get_if<Rect2D>(&ps.geometry)) {
    Lx = r->L1;
    Ly = r->L2;
  } else {
    const auto& dk = std::get<Disk2D>(ps.geometry);
    Lx = Ly = 2.0 * dk.radius;
    ox = oy = -dk.radius;
  }
  for (int iy = 0; iy < grid; ++iy)
    for (int ix = 0; ix < grid; ++ix) {
      Point x(ox + (ix + 0.5) * Lx / grid, oy + (iy + 0.5) * Ly / grid, 0.0);
      if (boundary_distance(ps.geometry, x) <= 0.0) continue;
      bool near = false;
      for (const auto& c : ps.compartments)
        if ((x - c.center).norm() < 2.0 * ps.epsilon * c.ell) near = true;
      if (near) continue;
      w.row({x[0], x[1], field(x)});
    }
}

void run_steady2d_once(const ProblemSpec& ps, const fs::path& dir, int grid,
                       json& coeff_out) {
  auto spec = validate_or_throw(ps);
  bool model3 = !ps.compartments.empty() &&
                std::holds_alternative<ModelIII>(ps.compartments[0].model);
  fs::create_directories(dir);
  if (!model3) {
    SteadyField2D f = solve_model1_2d(spec);
    coeff_out = coefficients2d_json(f);
    write_json_file(dir / "coefficients.json", coeff_out);
    sample_field_2d(dir / "field.csv", ps,
                    [&](const Point& x) { return f.eval_outer(x); }, grid);
  } else {
    const auto& m3 = std::get<ModelIII>(ps.compartments[0].model);
    Kinetics kin = make_kinetics(m3.kinetics_name, m3.kinetics_params);
    auto roots = solve_model3_2d(spec, kin);
    json jroots = json::array();
    for (const auto& r : roots) {
      json jr;
      jr["residual"] = r.residual;
      jr["A"] = std::vector<double>(r.A.data(), r.A.data() + r.A.size());
      std::vector<std::vector<double>> wst;
      for (int j = 0; j < r.w.rows(); ++j)
        wst.emplace_back(r.w.row(j).data(), r.w.row(j).data() + r.w.cols());
      jr["w"] = wst;
      jroots.push_back(jr);
    }
    coeff_out = json{{"roots", jroots}, {"nu", spec.nu()}};
    write_json_file(dir / "coefficients.json", coeff_out);
  }
}

void run_steady3d_once(const ProblemSpec& ps, const fs::path& dir, int grid,
                       json& coeff_out) {
  auto spec = validate_or_throw(ps);
  fs::create_directories(dir);
  bool model2 = !ps.compartments.empty() &&
                std::holds_alternative<ModelII>(ps.compartments[0].model);
  bool model3 = !ps.compartments.empty() &&
                std::holds_alternative<ModelIII>(ps.compartments[0].model);
  if (model3) {
    const auto& m3 = std::get<ModelIII>(ps.compartments[0].model);
    Kinetics kin = make_kinetics(m3.kinetics_name, m3.kinetics_params);
    auto roots = solve_model3_3d(spec, kin);
    json jroots = json::array();
    for (const auto& r : roots) {
      json jr;
      jr["residual"] = r.residual;
      std::vector<std::vector<double>> wst;
      for (int j = 0; j < r.w.rows(); ++j)
        wst.emplace_back(r.w.row(j).data(), r.w.row(j).data() + r.w.cols());
      jr["w"] = wst;
      jroots.push_back(jr);
    }
    coeff_out = json{{"roots", jroots}};
    write_json_file(dir / "coefficients.json", coeff_out);
    return;
  }
  if (model2) {
    json comps = json::array();
    for (const auto& c : ps.compartments) {
      auto m = model2_coefficient_3d(c, ps.D);
      comps.push_back({{"A", m.A}, {"B", m.B}, {"beta_bar", m.beta_bar}});
    }
    coeff_out = json{{"model2", comps}, {"epsilon", ps.epsilon}};
    write_json_file(dir / "coefficients.json", coeff_out);
    return;
  }
  SteadyField3D f = solve_model1_3d(spec);
  const auto& c = f.coefficients();
  coeff_out["epsilon"] = c.epsilon;
  coeff_out["Lambda"] =
      std::vector<double>(c.Lambda.data(), c.Lambda.data() + c.Lambda.size());
  coeff_out["chi"] =
      std::vector<double>(c.chi.data(), c.chi.data() + c.chi.size());
  coeff_out["c0"] = std::vector<double>(c.c0.data(), c.c0.data() + c.c0.size());
  if (c.u_inf) coeff_out["u_inf"] = *c.u_inf;
  write_json_file(dir / "coefficients.json", coeff_out);

  const auto& ball = std::get<Sphere3D>(ps.geometry);
  CsvWriter w(dir / "field.csv", "x,y,z,u");
  for (int iz = 0; iz < grid; ++iz)
    for (int iy = 0; iy < grid; ++iy)
      for (int ix = 0; ix < grid; ++ix) {
        Point x(-ball.R0 + (ix + 0.5) * 2.0 * ball.R0 / grid,
                -ball.R0 + (iy + 0.5) * 2.0 * ball.R0 / grid,
                -ball.R0 + (iz + 0.5) * 2.0 * ball.R0 / grid);
        if (x.norm() >= ball.R0) continue;
        bool near = false;
        for (const auto& cc : ps.compartments)
          if ((x - cc.center).norm() < 2.0 * ps.epsilon * cc.ell) near = true;
        if (near) continue;
        w.row({x[0], x[1], x[2], f.eval_outer(x)});
      }
}

template <class RunOnce>
void run_with_sweep(const CommonArgs& a, const std::string& sub,
                    RunOnce&& once) {
  auto t0 = std::chrono::steady_clock::now();
  ProblemSpec base = load_spec(a);
  fs::create_directories(a.out_dir);
  RunManifest man = start_manifest(sub, a);

  if (a.sweep.empty()) {
    json coeff;
    once(base, fs::path(a.out_dir), coeff);
    man.outputs.push_back((fs::path(a.out_dir) / "coefficients.json").string());
    finish_manifest(man, a.out_dir, t0);
    return;
  }
  Sweep sw = parse_sweep(a.sweep);
  man.parameters["sweep"] = {{"key", sw.key}, {"a", sw.a}, {"b", sw.b},
                             {"n", sw.n}};
  std::vector<ProblemSpec> specs(sw.n, base);
  for (int i = 0; i < sw.n; ++i) {
    double v = sw.n == 1 ? sw.a : sw.a + (sw.b - sw.a) * i / (sw.n - 1.0);
    json j = to_json(specs[i]);
    if (!j.contains(sw.key) || !j[sw.key].is_number())
      throw Error("sweep key must name a top-level numeric spec field");
    j[sw.key] = v;
    specs[i] = spec_from_json(j);
  }
  std::vector<json> coeffs(sw.n);
  std::atomic<int> next{0};
  auto worker = [&]() {
    while (true) {
      int i = next.fetch_add(1);
      if (i >= sw.n) break;
      char name[32];
      std::snprintf(name, sizeof(name), "sweep_%03d", i);
      once(specs[i], fs::path(a.out_dir) / name, coeffs[i]);
    }
  };
  int jobs = std::max(1, a.jobs);
  std::vector<std::thread> pool;
  for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  for (int i = 0; i < sw.n; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "sweep_%03d", i);
    man.outputs.push_back((fs::path(a.out_dir) / name).string());
  }
  finish_manifest(man, a.out_dir, t0);
}

void run_ripen(const CommonArgs& a, const std::string& params_path) {
  auto t0 = std::chrono::steady_clock::now();
  json p = read_json_file(params_path);
  fs::create_directories(a.out_dir);
  RunManifest man = start_manifest("ripen", a);
  man.spec_path = params_path;
  man.parameters = p;

  RipeningParams rp;
  rp.D = p.value("D", 1.0);
  rp.phi_a = p.value("phi_a", 0.1);
  rp.phi_b = p.value("phi_b", 1.0);
  rp.ell_c = p.value("ell_c", 0.1);
  int dim = p.at("dim").get<int>();
  if (p.contains("nu"))
    rp.nu = p["nu"].get<double>();
  else if (p.contains("epsilon"))
    rp.nu = nu_from_epsilon(p["epsilon"].get<double>());
  std::vector<double> ell0 = p.at("ell").get<std::vector<double>>();
  DropletState st;
  st.ell = Eigen::Map<Eigen::VectorXd>(ell0.data(), ell0.size());
  double t_end = p.at("t_end").get<double>();
  double rtol = p.value("rtol", 1e-10);

  auto traj = evolve(st, rp, dim, t_end, rtol);
  std::string header = "tau";
  for (size_t j = 0; j < ell0.size(); ++j)
    header += ",ell_" + std::to_string(j + 1);
  header += ",active_count";
  fs::path csv = fs::path(a.out_dir) / "trajectory.csv";
  CsvWriter w(csv, header);
  for (size_t i = 0; i < traj.tau.size(); ++i) {
    std::vector<double> row{traj.tau[i]};
    for (int j = 0; j < traj.ell[i].size(); ++j) row.push_back(traj.ell[i][j]);
    row.push_back(static_cast<double>(traj.active_count[i]));
    w.row(row);
  }
  man.parameters["conservation_drift"] = traj.conservation_drift;
  man.outputs.push_back(csv.string());
  finish_manifest(man, a.out_dir, t0);
}

void run_accum(const CommonArgs& a, const std::string& ic_path,
               const std::string& probes_str) {
  auto t0 = std::chrono::steady_clock::now();
  ProblemSpec ps = load_spec(a);
  auto spec = validate_or_throw(ps);
  json icj = read_json_file(ic_path);
  fs::create_directories(a.out_dir);
  RunManifest man = start_manifest("accum", a);
  man.parameters["ic"] = icj;

  InitialCondition ic;
  std::string type = icj.at("type").get<std::string>();
  if (type == "constant") {
    ic = constant_ic(icj.at("value").get<double>());
  } else if (type == "gaussian-bump") {
    auto c = icj.at("center").get<std::vector<double>>();
    Point center = Point::Zero();
    for (size_t i = 0; i < c.size() && i < 3; ++i) center[i] = c[i];
    ic = gaussian_bump_ic(center, icj.at("width").get<double>(),
                          icj.at("amplitude").get<double>(),
                          icj.value("support_radius", 0.0));
  } else {
    throw Error("accum: ic type must be constant or gaussian-bump");
  }

  std::vector<Point> probes;
  for (const auto& tok : [&] {
         std::vector<std::string> v;
         std::string cur;
         for (char ch : probes_str) {
           if (ch == ';') {
             v.push_back(cur);
             cur.clear();
           } else {
             cur += ch;
           }
         }
         if (!cur.empty()) v.push_back(cur);
         return v;
       }())
    probes.push_back(parse_point(tok));
  if (probes.empty()) throw Error("accum: no probes given");

  const int dim = dimension(ps.geometry);
  fs::path csv = fs::path(a.out_dir) / "accum.csv";
  CsvWriter w(csv, dim == 2 ? "x,y,T" : "x,y,z,T");
  for (const auto& x : probes) {
    auto res = dim == 2 ? accumulation_time_2d(spec, ic, x)
                        : accumulation_time_3d(spec, ic, x);
    if (dim == 2)
      w.row({x[0], x[1], res.T});
    else
      w.row({x[0], x[1], x[2], res.T});
  }
  man.outputs.push_back(csv.string());
  finish_manifest(man, a.out_dir, t0);
}

void run_qs(const CommonArgs& a, const std::string& params_path) {
  auto t0 = std::chrono::steady_clock::now();
  ProblemSpec ps = load_spec(a);
  auto spec = validate_or_throw(ps);
  json p = read_json_file(params_path);
  fs::create_directories(a.out_dir);
  RunManifest man = start_manifest("qs", a);
  man.parameters = p;

  if (ps.compartments.empty() ||
      !std::holds_alternative<ModelIII>(ps.compartments[0].model))
    throw Error("qs: spec compartments must be model III");
  const auto& m3 = std::get<ModelIII>(ps.compartments[0].model);
  Kinetics kin = make_kinetics(m3.kinetics_name, m3.kinetics_params);

  double D0 = p.at("D0").get<double>();
  ReducedModel model(spec, D0, kin);
  Eigen::VectorXd y0(model.state_size());
  y0[0] = p.value("ubar0", 0.0);
  for (int j = 0; j < model.N(); ++j) {
    const auto* mj = std::get_if<ModelIII>(&ps.compartments[j].model);
    for (int k = 0; k < model.K(); ++k)
      y0[1 + j * model.K() + k] =
          (mj && static_cast<int>(mj->w0.size()) == model.K()) ? mj->w0[k]
                                                               : 0.5;
  }
  double t_end = p.at("t_end").get<double>();
  double dt = p.value("dt_sample", t_end / 400.0);
  auto traj = integrate_reduced(model, y0, t_end, dt);

  std::string header = "t,ubar";
  for (int j = 0; j < model.N(); ++j)
    for (int k = 0; k < model.K(); ++k)
      header += ",w_" + std::to_string(j + 1) + "_" + std::to_string(k);
  fs::path csv = fs::path(a.out_dir) / "trajectory.csv";
  CsvWriter w(csv, header);
  for (size_t i = 0; i < traj.t.size(); ++i) {
    std::vector<double> row{traj.t[i]};
    for (int k = 0; k < traj.y[i].size(); ++k) row.push_back(traj.y[i][k]);
    w.row(row);
  }
  if (!traj.advisory.empty()) man.parameters["advisory"] = traj.advisory;
  man.outputs.push_back(csv.string());
  finish_manifest(man, a.out_dir, t0);
}

void run_kuramoto(const CommonArgs& a, const std::string& params_path) {
  auto t0 = std::chrono::steady_clock::now();
  json p = read_json_file(params_path);
  fs::create_directories(a.out_dir);
  RunManifest man = start_manifest("kuramoto", a);
  man.spec_path = params_path;
  man.parameters = p;

  int N = p.at("N").get<int>();
  KuramotoParams kp;
  kp.kappa_hat = p.value("kappa_hat", 1.0);
  kp.alpha = p.value("alpha", 1.0);
  kp.gamma0 = p.value("gamma0", 0.0);
  kp.omega0 = p.value("omega0", 0.0);
  std::string dist = p.value("freq_dist", "uniform");
  double scale = p.value("freq_scale", 0.0);
  kp.omega = frequency_quantiles(dist, scale, N);

  OscState init;
  init.theta.resize(N);
  for (int j = 0; j < N; ++j) init.theta[j] = 2.0 * M_PI * j / N;
  init.z = {p.value("z0_re", 0.1), p.value("z0_im", 0.0)};

  const Eigen::MatrixXd* Wptr = nullptr;
  Eigen::MatrixXd W;
  if (!a.spec_path.empty()) {
    ProblemSpec ps = load_spec(a);
    auto spec = validate_or_throw(ps);
    auto cw = coupling_matrix(spec, p.value("D0", 1.0));
    W = cw.W;
    Wptr = &W;
    man.parameters["W_from_spec"] = true;
  }

  double t_end = p.at("t_end").get<double>();
  double dt = p.value("dt_sample", t_end / 400.0);
  auto traj = integrate_kuramoto(init, kp, Wptr, t_end, dt);

  fs::path csv = fs::path(a.out_dir) / "trajectory.csv";
  CsvWriter w(csv, "t,abs_zbar,abs_z,theta_mean,theta_std");
  for (size_t i = 0; i < traj.t.size(); ++i) {
    double mean = traj.theta[i].mean();
    double var = (traj.theta[i].array() - mean).square().mean();
    w.row({traj.t[i], traj.abs_zbar[i], traj.abs_z[i], mean, std::sqrt(var)});
  }
  man.outputs.push_back(csv.string());
  finish_manifest(man, a.out_dir, t0);
}

void run_oracle(const CommonArgs& a, const std::string& params_path) {
  auto t0 = std::chrono::steady_clock::now();
  json p = read_json_file(params_path);
  fs::create_directories(a.out_dir);
  RunManifest man = start_manifest("oracle", a);
  man.spec_path = params_path;
  man.parameters = p;

  std::string mode = p.at("mode").get<std::string>();
  if (mode == "radial") {
    RadialProblem rp;
    rp.dim = p.value("dim", 2);
    rp.R = p.value("R", 1.0);
    rp.r_in = p.at("r_in").get<double>();
    rp.D = p.value("D", 1.0);
    rp.gamma0 = p.value("gamma0", 0.0);
    rp.I0 = p.value("I0", 0.0);
    rp.c0 = p.value("c0", 0.0);
    if (p.contains("kappa_phys")) rp.kappa_phys = p["kappa_phys"].get<double>();
    rp.model2 = p.value("model2", false);
    if (rp.model2) {
      rp.Dbar = p.at("Dbar").get<double>();
      rp.gammabar_phys = p.at("gammabar_phys").get<double>();
      rp.Ibar_phys = p.value("Ibar_phys", 0.0);
    }
    auto sol = rp.dim == 2 ? radial_exact_disk(rp) : radial_exact_sphere(rp);
    int nsamp = p.value("samples", 200);
    fs::path csv = fs::path(a.out_dir) / "radial.csv";
    CsvWriter w(csv, "r,u");
    for (int i = 0; i <= nsamp; ++i) {
      double r = rp.r_in + (rp.R - rp.r_in) * i / nsamp;
      w.row({r, sol.u(r)});
    }
    man.outputs.push_back(csv.string());
  } else if (mode == "fd") {
    FdProblem fp;
    std::string geom = p.value("geometry", "rect");
    if (geom == "rect")
      fp.geometry = Rect2D{p.value("L1", 1.0), p.value("L2", 1.0)};
    else
      fp.geometry = Disk2D{p.value("radius", 1.0)};
    fp.D = p.value("D", 1.0);
    fp.gamma0 = p.value("gamma0", 0.0);
    fp.I0 = p.value("I0", 0.0);
    fp.zero_mean = p.value("zero_mean", false);
    for (const auto& cj : p.value("compartments", json::array())) {
      FdCompartment c;
      auto cc = cj.at("center").get<std::vector<double>>();
      c.center = Point(cc[0], cc[1], 0.0);
      c.radius = cj.at("radius").get<double>();
      if (cj.contains("kappa")) c.kappa = cj["kappa"].get<double>();
      c.c0 = cj.value("c0", 0.0);
      fp.compartments.push_back(c);
    }
    GridField g = fd_solve_rect(fp, p.at("h").get<double>());
    fs::path csv = fs::path(a.out_dir) / "field.csv";
    CsvWriter w(csv, "x,y,u");
    for (int iy = 0; iy < g.ny; ++iy)
      for (int ix = 0; ix < g.nx; ++ix)
        if (g.mask[iy * g.nx + ix])
          w.row({g.x0 + ix * g.hx, g.y0 + iy * g.hy, g.u[iy * g.nx + ix]});
    man.parameters["residual"] = g.residual;
    man.parameters["iterations"] = g.iterations;
    man.outputs.push_back(csv.string());
  } else {
    throw Error("oracle: mode must be radial or fd");
  }
  finish_manifest(man, a.out_dir, t0);
}

void run_compare(const CommonArgs& a, const std::string& fa,
                 const std::string& fb) {
  auto t0 = std::chrono::steady_clock::now();
  fs::create_directories(a.out_dir);
  RunManifest man = start_manifest("compare", a);
  man.parameters["a"] = fa;
  man.parameters["b"] = fb;

  auto load_csv = [](const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open: " + path);
    std::string line;
    std::getline(in, line);  // header
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
      std::vector<double> row;
      std::string cur;
      for (char ch : line) {
        if (ch == ',') {
          row.push_back(std::stod(cur));
          cur.clear();
        } else {
          cur += ch;
        }
      }
      if (!cur.empty()) row.push_back(std::stod(cur));
      rows.push_back(row);
    }
    return rows;
  };
  auto ra = load_csv(fa), rb = load_csv(fb);
  if (ra.size() != rb.size())
    throw Error("compare: files have different row counts");
  ErrorReport rep;
  for (size_t i = 0; i < ra.size(); ++i) {
    ProbeError pe;
    pe.x = Point(ra[i][0], ra[i].size() > 2 ? ra[i][1] : 0.0, 0.0);
    pe.a = ra[i].back();
    pe.b = rb[i].back();
    pe.abs_err = std::fabs(pe.a - pe.b);
    double scale = std::max(std::fabs(pe.a), std::fabs(pe.b));
    pe.rel_err = scale > 0 ? pe.abs_err / scale : 0.0;
    rep.max_abs = std::max(rep.max_abs, pe.abs_err);
    rep.max_rel = std::max(rep.max_rel, pe.rel_err);
    rep.mean_abs += pe.abs_err;
    rep.mean_rel += pe.rel_err;
    ++rep.used;
    rep.probes.push_back(pe);
  }
  if (rep.used) {
    rep.mean_abs /= rep.used;
    rep.mean_rel /= rep.used;
  }
  json j = {{"max_abs", rep.max_abs},
            {"max_rel", rep.max_rel},
            {"mean_abs", rep.mean_abs},
            {"mean_rel", rep.mean_rel},
            {"used", rep.used}};
  fs::path rp = fs::path(a.out_dir) / "report.json";
  write_json_file(rp, j);
  man.outputs.push_back(rp.string());
  finish_manifest(man, a.out_dir, t0);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"diffusion in domains with small interior compartments"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string source, ic_path, probes, params_path, file_a, file_b;
  int grid = 32;

  auto add_common = [&](CLI::App* sub, bool needs_spec) {
    if (needs_spec)
      sub->add_option("--spec", args.spec_path, "problem spec (JSON)")
          ->required();
    else
      sub->add_option("--spec", args.spec_path, "problem spec (JSON)");
    sub->add_option("--out", args.out_dir, "output directory");
    sub->add_option("--epsilon", args.epsilon_override,
                    "override the spec's epsilon");
    sub->add_option("--sweep", args.sweep, "key=a:b:n parameter sweep");
    sub->add_option("--jobs", args.jobs, "parallel sweep workers");
    sub->add_flag("--emit-plot-data", args.emit_plot_data,
                  "write tidy long-format CSV next to the outputs");
  };

  auto* greens = app.add_subcommand("greens", "sample a Green's function");
  add_common(greens, true);
  greens->add_option("--source", source, "source point x,y[,z]");
  greens->add_option("--grid", grid, "lattice points per axis");

  auto* s2d = app.add_subcommand("steady2d", "planar steady state");
  add_common(s2d, true);
  s2d->add_option("--grid", grid, "field sample lattice");

  auto* s3d = app.add_subcommand("steady3d", "ball steady state");
  add_common(s3d, true);
  s3d->add_option("--grid", grid, "field sample lattice");

  auto* ripen = app.add_subcommand("ripen", "droplet coarsening trajectory");
  ripen->add_option("--params", params_path, "parameters (JSON)")->required();
  ripen->add_option("--out", args.out_dir, "output directory");

  auto* accum = app.add_subcommand("accum", "accumulation times");
  add_common(accum, true);
  accum->add_option("--ic", ic_path, "initial condition descriptor (JSON)")
      ->required();
  accum->add_option("--probes", probes, "semicolon-separated points")
      ->required();

  auto* qs = app.add_subcommand("qs", "reduced quorum-sensing dynamics");
  add_common(qs, true);
  qs->add_option("--params", params_path, "run parameters (JSON)")->required();

  auto* kur = app.add_subcommand("kuramoto", "environment-coupled oscillators");
  kur->add_option("--params", params_path, "run parameters (JSON)")->required();
  kur->add_option("--spec", args.spec_path,
                  "optional spec for the spatial coupling W");
  kur->add_option("--out", args.out_dir, "output directory");

  auto* oracle = app.add_subcommand("oracle", "brute-force reference solvers");
  oracle->add_option("--params", params_path, "oracle parameters (JSON)")
      ->required();
  oracle->add_option("--out", args.out_dir, "output directory");

  auto* cmp = app.add_subcommand("compare", "pointwise field comparison");
  cmp->add_option("--a", file_a, "first field CSV")->required();
  cmp->add_option("--b", file_b, "second field CSV")->required();
  cmp->add_option("--out", args.out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (greens->parsed()) run_greens(args, source, grid);
    if (s2d->parsed())
      run_with_sweep(args, "steady2d",
                     [&](const ProblemSpec& ps, const fs::path& dir, json& c) {
                       run_steady2d_once(ps, dir, grid, c);
                     });
    if (s3d->parsed())
      run_with_sweep(args, "steady3d",
                     [&](const ProblemSpec& ps, const fs::path& dir, json& c) {
                       run_steady3d_once(ps, dir, grid, c);
                     });
    if (ripen->parsed()) run_ripen(args, params_path);
    if (accum->parsed()) run_accum(args, ic_path, probes);
    if (qs->parsed()) run_qs(args, params_path);
    if (kur->parsed()) run_kuramoto(args, params_path);
    if (oracle->parsed()) run_oracle(args, params_path);
    if (cmp->parsed()) run_compare(args, file_a, file_b);
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const ConditioningError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const ConvergenceError& e) {
    std::cerr << "numerical failure: " << e.what() << "\nresiduals:";
    for (double r : e.residual_history) std::cerr << " " << r;
    std::cerr << "\n";
    return 3;
  } catch (const AccuracyError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
