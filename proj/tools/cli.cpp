#include "cli.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "stratwave/branch.hpp"
#include "stratwave/error.hpp"
#include "stratwave/fields.hpp"
#include "stratwave/profile_json.hpp"

namespace stratwave::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <class T>
T get(const json& sec, const char* key, T fallback) {
  if (!sec.contains(key)) return fallback;
  try {
    return sec.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("key '") + key + "' has the wrong type");
  }
}

json section(const json& j, const char* key) {
  if (!j.contains(key)) return json::object();
  if (!j.at(key).is_object()) throw ConfigError(std::string("'") + key + "' must be an object");
  return j.at(key);
}

std::string num(double v) { return fmt::format("{:.17g}", v); }

// JSON has no infinities
json real(double v) { return std::isfinite(v) ? json(v) : json(num(v)); }

class Csv {
 public:
  Csv(const fs::path& file, const std::vector<std::string>& header) : os_(file) {
    if (!os_) throw ConfigError("cannot write " + file.string());
    row(header);
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os_ << (i ? "," : "") << cells[i];
    os_ << '\n';
  }
  void values(std::initializer_list<double> v) {
    std::vector<std::string> c;
    for (double x : v) c.push_back(num(x));
    row(c);
  }

 private:
  std::ofstream os_;
};

void write_json(const fs::path& file, const json& j) {
  std::ofstream os(file);
  if (!os) throw ConfigError("cannot write " + file.string());
  os << j.dump(2) << '\n';
}

fs::path prepare(const RunConfig& cfg) {
  fs::create_directories(cfg.out);
  return cfg.out;
}

ShootResult laminar_stage(const RunConfig& cfg) { return shoot_depth(cfg.params, cfg.laminar); }

bool analytic_case(const PhysicalParameters& prm) {
  return prm.profile.constant_density() && prm.profile.irrotational();
}

struct BranchVerdict {
  json report;
  bool pass = true;
};

BranchVerdict judge(const BranchProblem& prob, const BranchRun& run) {
  BranchVerdict v;
  json dirs = json::object();
  for (const auto& [name, dir] : {std::pair{"plus", &run.plus}, std::pair{"minus", &run.minus}}) {
    const int accepted = int(dir->points.size()) - 1;
    double res = 0.0, defect = 0.0, mean = 0.0, minhp = INFINITY;
    bool crests = true, mono = true;
    for (int k = 1; k <= accepted; ++k) {
      const auto& pt = dir->points[k];
      res = std::max(res, pt.residual_norm);
      defect = std::max(defect, pt.diag.even_defect);
      mean = std::max(mean, std::abs(pt.eta_mean));
      minhp = std::min(minhp, pt.min_hp_total);
      crests = crests && pt.crest_count == 2;  // one crest, one trough
      mono = mono && pt.diag.monotone_ok;
    }
    const bool ok = accepted >= 5 && res <= 1e-10 && defect <= 1e-10 && mean <= 1e-9 &&
                    minhp > 0.0 && crests && mono;
    v.pass = v.pass && ok;
    dirs[name] = {{"status", dir->status}, {"accepted", accepted},   {"max_residual", res},
                  {"even_defect", defect}, {"max_abs_eta_mean", mean}, {"min_hp_total", real(minhp)},
                  {"one_crest_one_trough", crests},   {"monotone", mono},        {"pass", ok}};
  }
  const auto fit = fit_branch(prob, run);
  v.report = {{"lambda_star", run.lambda_star},
              {"directions", dirs},
              {"fit", {{"C_lambda", fit.C_lambda}, {"C_quad", fit.C_quad},
                       {"slope", fit.slope}, {"used", fit.used}}}};
  return v;
}

// rows p_j, columns q_m
void write_snapshot(const fs::path& file, const BranchProblem& prob, const ContinuationPoint& pt) {
  std::vector<std::string> header{"p"};
  for (int m = 0; m < prob.nq(); ++m) header.push_back("q=" + num(prob.q(m)));
  Csv csv(file, header);
  const Eigen::MatrixXd U = prob.unfold(pt.h);
  for (int j = 0; j <= prob.np(); ++j) {
    std::vector<std::string> row{num(prob.p(j))};
    for (int m = 0; m < prob.nq(); ++m) row.push_back(num(U(j, m)));
    csv.row(row);
  }
}

}  // namespace

RunConfig make_config(const json& j, const Overrides& ov) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig cfg{j, parse_parameters(j), {}, {}};

  const json lam = section(j, "laminar");
  cfg.laminar.n_p = get(lam, "n_p", cfg.laminar.n_p);
  cfg.laminar.picard_tol = get(lam, "picard_tol", cfg.laminar.picard_tol);
  cfg.laminar.shoot_tol = get(lam, "shoot_tol", cfg.laminar.shoot_tol);

  const json dsp = section(j, "dispersion");
  cfg.dispersion.lambda_hat = get(dsp, "lambda_hat", cfg.dispersion.lambda_hat);
  cfg.dispersion.atol = get(dsp, "atol", cfg.dispersion.atol);
  cfg.dispersion.rtol = get(dsp, "rtol", cfg.dispersion.rtol);
  cfg.dispersion.scan_points = get(dsp, "scan_points", cfg.dispersion.scan_points);
  cfg.dispersion.k_max = get(dsp, "k_max", cfg.dispersion.k_max);

  const json br = section(j, "branch");
  cfg.nq = get(br, "nq", cfg.nq);
  cfg.np = get(br, "np", cfg.np);
  cfg.steps = get(br, "steps", cfg.steps);
  cfg.ds = get(br, "ds", cfg.ds);

  const json fl = section(j, "fields");
  cfg.ny = get(fl, "ny", cfg.ny);
  cfg.amplitude = get(fl, "amplitude", cfg.amplitude);

  cfg.out = get<std::string>(j, "out", cfg.out.string());
  if (const char* env = std::getenv("STRATWAVE_OUT"); env && *env) cfg.out = env;

  if (ov.lambda_hat) cfg.dispersion.lambda_hat = *ov.lambda_hat;
  if (ov.nq) cfg.nq = *ov.nq;
  if (ov.np) cfg.np = *ov.np;
  if (ov.steps) cfg.steps = *ov.steps;
  if (ov.ds) cfg.ds = *ov.ds;
  if (ov.out) cfg.out = *ov.out;

  if (cfg.laminar.n_p < 16) throw ConfigError("laminar.n_p must be at least 16");
  if (!(cfg.dispersion.lambda_hat > 0.0)) throw ConfigError("lambda_hat must be positive");
  if (cfg.nq < 8 || cfg.nq % 2) throw ConfigError("nq must be even and at least 8");
  if (cfg.np < 4) throw ConfigError("np must be at least 4");
  if (cfg.steps < 1) throw ConfigError("steps must be positive");
  if (!(cfg.ds > 0.0)) throw ConfigError("ds must be positive");
  if (cfg.ny < 3) throw ConfigError("fields.ny must be at least 3");
  if (!(cfg.amplitude != 0.0)) throw ConfigError("fields.amplitude must be nonzero");
  return cfg;
}

RunConfig load_config(const fs::path& file, const Overrides& ov) {
  std::ifstream is(file);
  if (!is) throw ConfigError("cannot open config " + file.string());
  json j;
  try {
    j = json::parse(is);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  return make_config(j, ov);
}

int cmd_check(const RunConfig& cfg, std::ostream& log) {
  const auto dir = prepare(cfg);
  json rep;
  std::vector<std::string> failed;

  const auto r2 = check_res2(cfg.params);
  rep["res2"] = {{"holds", r2.holds}, {"margin", real(r2.margin)}};
  if (!r2.holds) failed.push_back("RES2");

  if (r2.holds) {
    const auto r3 = check_res3(cfg.params);
    rep["res3"] = {{"holds", r3.holds}, {"lhs", r3.lhs}, {"bound", 0.5 * x_star()}};
    if (!r3.holds) failed.push_back("RES3");
  } else {
    rep["res3"] = {{"holds", false}, {"skipped", "RES2 does not hold"}};
    failed.push_back("RES3");
  }

  try {
    const auto sh = laminar_stage(cfg);
    rep["shoot_depth"] = {{"ok", true}, {"mu", sh.flow.mu}, {"H0_error", sh.H0_error},
                          {"brackets", sh.brackets.size()}};
    const auto c0 = check_cthe0(sh.flow);
    rep["cthe0"] = {{"holds", c0.holds}, {"a0", c0.a0},
                    {"margin", 5.0 - (std::exp(2.0 * c0.a0) - 2.0 * c0.a0)}};
    if (!c0.holds) failed.push_back("CTHE0");
    const auto w0 = check_w0_nondegenerate(sh.flow, cfg.dispersion);
    rep["w0"] = {{"holds", w0.holds}, {"w0_at_top", w0.w0_at_top}, {"w0_sup", w0.w0_sup},
                 {"min_z0", w0.min_z0}};
    if (!w0.holds) failed.push_back("W0");
  } catch (const std::runtime_error& e) {
    rep["shoot_depth"] = {{"ok", false}, {"error", e.what()}};
    failed.push_back("SHOOT_DEPTH");
  }

  rep["failed"] = failed;
  rep["pass"] = failed.empty();
  write_json(dir / "report.json", rep);
  if (failed.empty()) {
    fmt::print(log, "check: all conditions hold\n");
    return ok;
  }
  std::string which;
  for (const auto& f : failed) which += (which.empty() ? "" : ", ") + f;
  fmt::print(log, "check: failed {}\n", which);
  return condition_failed;
}

int cmd_laminar(const RunConfig& cfg, std::ostream& log) {
  const auto dir = prepare(cfg);
  const auto sh = laminar_stage(cfg);
  const auto& f = sh.flow;
  {
    Csv csv(dir / "laminar.csv", {"p", "H", "Hp", "a", "A"});
    for (std::size_t i = 0; i < f.H.size(); ++i)
      csv.values({f.grid.p[i], f.H[i], f.Hp[i], f.a[i], f.A[i]});
  }
  const auto c0 = check_cthe0(f);
  json brackets = json::array();
  for (const auto& [lo, hi] : sh.brackets) brackets.push_back({lo, hi});
  write_json(dir / "laminar.json", {{"mu", f.mu},
                                    {"H0_error", sh.H0_error},
                                    {"residual", laminar_residual(f)},
                                    {"cthe0_holds", c0.holds},
                                    {"a0", c0.a0},
                                    {"iterations", f.iterations},
                                    {"marched", f.marched},
                                    {"brackets", brackets}});
  fmt::print(log, "laminar: mu = {}\n", num(f.mu));
  return ok;
}

int cmd_dispersion(const RunConfig& cfg, std::ostream& log) {
  const auto dir = prepare(cfg);
  const auto sh = laminar_stage(cfg);
  const auto disp = dispersion_constant(sh.flow, cfg.dispersion);
  {
    Csv csv(dir / "dispersion_theta.csv", {"lambda", "theta", "theta_over_lambda2"});
    for (std::size_t i = 0; i < disp.lambda_samples.size(); ++i) {
      const double l = disp.lambda_samples[i], t = disp.theta_of_lambda[i];
      csv.values({l, t, t / (l * l)});
    }
  }
  {
    const auto& w = disp.w1_profile;
    Csv csv(dir / "dispersion_w1.csv", {"p", "w1", "z1"});
    for (std::size_t i = 0; i < w.p.size(); ++i) csv.values({w.p[i], w.w[i], w.z[i]});
  }
  json modes = json::array();
  for (const auto& m : disp.higher_modes)
    modes.push_back({{"k", m.k}, {"W", m.W}, {"scale", m.scale}, {"collides", m.collides}});
  json rep = {{"C_D", disp.C_D},
              {"lambda_star", disp.lambda_star},
              {"transversality", disp.transversality},
              {"transversality_fd", disp.transversality_fd},
              {"scaling_deviation", disp.scaling_deviation},
              {"root_count", disp.root_count},
              {"secondary_constants", disp.secondary_constants},
              {"higher_modes", modes},
              {"kernel_collision", disp.kernel_collision},
              {"warnings", disp.warnings}};
  if (analytic_case(cfg.params)) {
    const double ca = analytic_dispersion(cfg.params);
    rep["C_D_analytic"] = ca;
    rep["C_D_rel_gap"] = std::abs(disp.C_D - ca) / ca;
  }
  write_json(dir / "dispersion.json", rep);
  fmt::print(log, "dispersion: C_D = {}, lambda* = {}\n", num(disp.C_D), num(disp.lambda_star));
  return ok;
}

int run_branch(const RunConfig& cfg, const LaminarFlow& flow, const DispersionResult& disp,
               std::ostream& log) {
  try {
    require_bifurcation_data(disp);
  } catch (const ConditionError& e) {
    fmt::print(log, "branch: refused: {}\n", e.what());
    return condition_failed;
  }
  const auto dir = prepare(cfg);
  BranchProblem prob(flow, cfg.nq, cfg.np);
  const auto km = kernel_mode(flow, disp.lambda_star, cfg.dispersion);
  ContinuationOptions co;
  co.n_steps = cfg.steps;
  co.ds = cfg.ds;
  const auto run = continue_branch(prob, disp, km, co);

  {
    Csv csv(dir / "branch.csv", {"direction", "index", "s", "lambda", "residual", "eta_mean",
                                 "crest_count", "min_hp_total", "eta_sup", "iterations", "ds"});
    for (const auto& [name, d] : {std::pair{"plus", &run.plus}, std::pair{"minus", &run.minus}})
      for (std::size_t k = 0; k < d->points.size(); ++k) {
        const auto& pt = d->points[k];
        csv.row({name, std::to_string(k), num(pt.s), num(pt.lambda), num(pt.residual_norm),
                 num(pt.eta_mean), std::to_string(pt.crest_count), num(pt.min_hp_total),
                 num(pt.diag.eta_max), std::to_string(pt.iterations), num(pt.ds)});
      }
  }
  if (run.plus.points.size() > 1) write_snapshot(dir / "branch_h_plus.csv", prob, run.plus.points.back());
  if (run.minus.points.size() > 1)
    write_snapshot(dir / "branch_h_minus.csv", prob, run.minus.points.back());

  auto v = judge(prob, run);
  v.report["config"] = cfg.raw;
  v.report["nq"] = cfg.nq;
  v.report["np"] = cfg.np;
  v.report["transversality"] = disp.transversality;
  v.report["verdict"] = v.pass ? "pass" : "fail";
  write_json(dir / "branch.json", v.report);
  fmt::print(log, "branch: {} / {} points, verdict {}\n", run.plus.points.size() - 1,
             run.minus.points.size() - 1, v.pass ? "pass" : "fail");
  return v.pass ? ok : numerical_failure;
}

int cmd_branch(const RunConfig& cfg, std::ostream& log) {
  const auto sh = laminar_stage(cfg);
  const auto disp = dispersion_constant(sh.flow, cfg.dispersion);
  return run_branch(cfg, sh.flow, disp, log);
}

int cmd_reconstruct(const RunConfig& cfg, std::ostream& log) {
  const auto dir = prepare(cfg);
  const auto sh = laminar_stage(cfg);
  const auto disp = dispersion_constant(sh.flow, cfg.dispersion);
  require_bifurcation_data(disp);
  const auto km = kernel_mode(sh.flow, disp.lambda_star, cfg.dispersion);
  BranchProblem prob(sh.flow, cfg.nq, cfg.np);
  const Eigen::VectorXd w = prob.sample(km);
  const auto nr = newton_correct(prob, cfg.amplitude * w, disp.lambda_star,
                                 Constraint::amplitude(w, cfg.amplitude));
  if (!nr.converged) throw NumericalError("reconstruct: corrector failed: " + nr.status);

  HeightInterpolant hi(prob, nr.u, nr.lambda);
  FieldOptions fo;
  fo.ny = cfg.ny;
  const auto f = reconstruct(hi, fo);
  {
    Csv csv(dir / "fields.csv", {"x", "y", "u_rel", "v", "P", "rho", "psi"});
    for (int i = 0; i < f.nx; ++i)
      for (int k = 0; k < f.ny; ++k)
        csv.values({f.x[i], f.y(i, k), f.u_rel(i, k), f.v(i, k), f.P(i, k), f.rho(i, k),
                    f.psi(i, k)});
  }
  {
    Csv csv(dir / "surface.csv", {"x", "eta", "P_surface", "curvature"});
    for (int i = 0; i < f.nx; ++i) {
      const double ex = f.eta_x[i];
      csv.values({f.x[i], f.eta[i], f.P(i, f.ny - 1),
                  f.eta_xx[i] / std::pow(1.0 + ex * ex, 1.5)});
    }
  }
  const auto r = euler_residuals(f, cfg.params);
  const auto sc = streamline_constancy(f, hi, cfg.params);
  write_json(dir / "fields.json", {{"lambda", f.lambda},
                                   {"amplitude", cfg.amplitude},
                                   {"Q", f.Q},
                                   {"nx", f.nx},
                                   {"ny", f.ny},
                                   {"momentum_x", r.momentum_x},
                                   {"momentum_y", r.momentum_y},
                                   {"density", r.density},
                                   {"incompressibility", r.incompressibility},
                                   {"dynamic", r.dynamic},
                                   {"kinematic", r.kinematic},
                                   {"bottom", r.bottom},
                                   {"mean_zero", r.mean_zero},
                                   {"rho_streamline_variation", sc.rho_variation},
                                   {"head_streamline_variation", sc.head_variation},
                                   {"round_trip", round_trip_error(f, hi)}});
  fmt::print(log, "reconstruct: lambda = {}, max interior residual {}\n", num(f.lambda),
             num(r.max_interior()));
  return ok;
}

int main(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"stratwave: steady periodic stratified capillary-gravity waves"};
  app.require_subcommand(1, 1);
  std::string config;
  Overrides ov;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", config, "JSON run configuration")->required();
    sub->add_option("--lambda-hat", ov.lambda_hat, "reference wavelength for the Wronskian root");
    sub->add_option("--nq", ov.nq, "grid points per period in q");
    sub->add_option("--np", ov.np, "grid cells in p");
    sub->add_option("--ds", ov.ds, "initial continuation step");
    sub->add_option("--steps", ov.steps, "continuation steps per direction");
    sub->add_option("--out", ov.out, "output directory");
  };
  using Cmd = int (*)(const RunConfig&, std::ostream&);
  const std::vector<std::tuple<const char*, const char*, Cmd>> cmds = {
      {"check", "admissibility conditions", cmd_check},
      {"laminar", "laminar background flow", cmd_laminar},
      {"dispersion", "dispersion constant and critical wavelength", cmd_dispersion},
      {"branch", "continue the bifurcating branch", cmd_branch},
      {"reconstruct", "physical fields at a branch point", cmd_reconstruct}};
  std::vector<std::pair<CLI::App*, Cmd>> subs;
  for (const auto& [name, help, fn] : cmds) {
    auto* s = app.add_subcommand(name, help);
    add_common(s);
    subs.emplace_back(s, fn);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return config_error;
  }

  try {
    const auto cfg = load_config(config, ov);
    for (const auto& [s, fn] : subs)
      if (s->parsed()) return fn(cfg, out);
  } catch (const ConfigError& e) {
    fmt::print(err, "config error: {}\n", e.what());
    return config_error;
  } catch (const json::exception& e) {
    fmt::print(err, "config error: {}\n", e.what());
    return config_error;
  } catch (const ConditionError& e) {
    fmt::print(err, "condition failed: {}\n", e.what());
    return condition_failed;
  } catch (const NumericalError& e) {
    fmt::print(err, "numerical failure: {}\n", e.what());
    return numerical_failure;
  } catch (const fs::filesystem_error& e) {
    fmt::print(err, "output error: {}\n", e.what());
    return config_error;
  }
  return config_error;
}

}  // namespace stratwave::cli
