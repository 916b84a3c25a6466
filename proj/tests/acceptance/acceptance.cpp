#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "stratwave/branch.hpp"
#include "stratwave/fields.hpp"

using namespace stratwave;
using Eigen::MatrixXd;
using Eigen::VectorXd;
constexpr double kPi = std::numbers::pi;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void criterion(const char* id, const char* name, double budget_s,
               const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome r;
  try {
    r = body();
  } catch (const std::exception& e) {
    r = {false, std::string("exception: ") + e.what()};
  }
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool fast = dt < budget_s;
  const bool ok = r.pass && fast;
  if (!ok) ++failures;
  std::printf("[%s] %s %s: %s; %.3f s (limit %g s)%s\n", ok ? "PASS" : "FAIL", id, name,
              r.detail.c_str(), dt, budget_s, fast ? "" : " too slow");
  std::fflush(stdout);
}

struct Admissibility {
  bool all;
  std::string detail;
};

Admissibility admissible(const PhysicalParameters& prm, const LaminarFlow& flow) {
  const auto r2 = check_res2(prm);
  bool r3 = false;
  double lhs = NAN;
  if (r2.holds) {
    const auto c = check_res3(prm);
    r3 = c.holds;
    lhs = c.lhs;
  }
  const bool c0 = check_cthe0(flow).holds;
  const bool w0 = check_w0_nondegenerate(flow).holds;
  return {r2.holds && r3 && c0 && w0,
          fmt::format("RES2 {} RES3 {} (lhs {:.4g} vs {:.4g}) C:the0 {} w0 {}", r2.holds, r3, lhs,
                      0.5 * x_star(), c0, w0)};
}

PhysicalParameters vortical(double p0, double beta, double sigma = 3.0) {
  StratificationProfile pr(p0, [](double) { return 1.0; },
                           [beta, p0](double p) { return beta * (p - p0); });
  pr.set_constant_density(true);
  return {9.81, 1.0, sigma, pr};
}

// smooth, bottom-vanishing state
VectorXd random_state(const BranchProblem& bp, std::mt19937_64& rng, double amp) {
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  double c[3][2];
  for (auto& r : c)
    for (auto& x : r) x = uni(rng);
  MatrixXd U = MatrixXd::Zero(bp.np() + 1, bp.nq());
  const double p0 = bp.p(0);
  for (int j = 0; j <= bp.np(); ++j)
    for (int m = 0; m < bp.nq(); ++m) {
      const double z = (bp.p(j) - p0) / -p0;
      double v = 0.0;
      for (int k = 0; k < 3; ++k)
        v += (c[k][0] * z + c[k][1] * z * z) * std::cos(2.0 * kPi * (k + 1) * bp.q(m));
      U(j, m) = amp * v;
    }
  return bp.fold(U);
}

struct Setup {
  LaminarFlow flow;
  DispersionResult disp;
  KernelMode km;
};

Setup make(const PhysicalParameters& prm) {
  auto f = shoot_depth(prm).flow;
  auto d = dispersion_constant(f);
  auto k = kernel_mode(f, d.lambda_star);
  return {std::move(f), std::move(d), std::move(k)};
}

}  // namespace

int main() {
  criterion("AC1", "x* root", 1e-3, [] {
    const double x = x_star();
    const double res = std::abs(std::exp(x) - x - 5.0);
    return Outcome{std::abs(x - 1.9368) <= 1e-4 && res <= 1e-9,
                   fmt::format("x* = {:.10f}, |e^x - x - 5| = {:.2e}", x, res)};
  });

  criterion("AC2", "constant-density laminar closed form", 0.1, [] {
    const double p0 = -3.2, d = 1.0;
    const auto sh = shoot_depth(fixtures::constant_density(p0, 0.3));
    const auto& f = sh.flow;
    const double mu_err = std::abs(f.mu - p0 * p0 / (d * d)) / (p0 * p0);
    double h_err = 0.0;
    for (std::size_t i = 0; i < f.H.size(); ++i)
      h_err = std::max(h_err, std::abs(f.H[i] - d * (f.grid.p[i] - p0) / -p0));
    for (int i = 0; i <= 1000; ++i) {
      const double p = p0 - p0 * i / 1000.0;
      h_err = std::max(h_err, std::abs(f.H_at(p) - d * (p - p0) / -p0));
    }
    return Outcome{mu_err <= 1e-10 && h_err <= 1e-10,
                   fmt::format("mu rel err {:.2e}, sup |H - d(p-p0)/|p0|| {:.2e}", mu_err, h_err)};
  });

  criterion("AC3", "singular Bernoulli profile against the explicit integral", 1.0, [] {
    const double p0 = -2.0, C = 0.3, mu = 2.5;
    const auto f = picard_solve(fixtures::sqrt_singular(p0, C), mu);
    const int m = 10 * f.grid.n;
    double err = 0.0;
    for (int i = 0; i <= m; ++i) {
      const double p = p0 - p0 * double(i) / m;
      err = std::max(err, std::abs(f.H_at(p) - oracle::example_sqrt_height(p, p0, mu, C)));
    }
    return Outcome{err <= 1e-7, fmt::format("sup err {:.2e} on {} points", err, m + 1)};
  });

  for (double sigma : {0.1, 0.3, 1.0}) {
    const auto name = fmt::format("dispersion oracle, sigma = {}", sigma);
    criterion("AC4", name.c_str(), 5.0, [sigma] {
      const auto f = shoot_depth(fixtures::constant_density(-3.2, sigma)).flow;
      const auto r = dispersion_constant(f);
      const double x = oracle::dispersion_root(9.81, 1.0, 1.0, -3.2, sigma);
      const double rel = std::abs(r.C_D - x * x) / (x * x);
      const int changes = oracle::dispersion_sign_changes(9.81, 1.0, 1.0, -3.2, sigma, 10 * x);
      return Outcome{rel <= 1e-6 && r.root_count == 1 && changes == 1,
                     fmt::format("C_D {:.12g} vs {:.12g} (rel {:.2e}), roots {} / oracle {}",
                                 r.C_D, x * x, rel, r.root_count, changes)};
    });
  }

  criterion("AC5", "scaling law theta = C_D lambda^2", 10.0, [] {
    const auto prm = fixtures::linear_strat(-4.0, 3.0);
    const auto f = shoot_depth(prm).flow;
    const auto adm = admissible(prm, f);
    std::vector<double> ratio;
    for (double l : {0.5, 1.0, 2.0}) ratio.push_back(largest_root_theta(f, l).theta / (l * l));
    const auto [lo, hi] = std::minmax_element(ratio.begin(), ratio.end());
    const double spread = (*hi - *lo) / *lo;
    return Outcome{spread <= 1e-6 && adm.all,
                   fmt::format("p0 = -4 spread {:.2e}; {}", spread, adm.detail)};
  });

  const auto strat5 = fixtures::linear_strat(-5.0, 3.0);
  const auto strat_flow = shoot_depth(strat5).flow;

  criterion("AC6", "W_theta / W_lambda = -lambda / (2 theta)", 5.0, [&] {
    double worst = 0.0;
    bool signs = true;
    for (double l : {0.5, 1.0, 2.0}) {
      const double th = largest_root_theta(strat_flow, l).theta;
      const auto ic = wronskian_identity_check(strat_flow, l, th);
      worst = std::max(worst, ic.indeterminate ? INFINITY : ic.rel_err);
      signs = signs && ic.sign_ok;
    }
    return Outcome{worst <= 1e-4 && signs,
                   fmt::format("max rel err {:.2e}, w1(0) W_lambda < 0: {}", worst, signs)};
  });

  criterion("AC7", "Wronskian constancy along p", 2.0, [&] {
    const auto cflow = shoot_depth(fixtures::constant_density(-3.2, 0.3)).flow;
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ul(0.3, 3.0), ut(0.0, 200.0);
    double worst = 0.0;
    for (const LaminarFlow* f : {&cflow, &strat_flow})
      for (int k = 0; k < 4; ++k) worst = std::max(worst, wronskian_constancy(*f, ul(rng), ut(rng)));
    return Outcome{worst <= 1e-8, fmt::format("max relative variation {:.2e} over 8 samples", worst)};
  });

  const Setup base = make(fixtures::constant_density(-3.2, 3.0));

  criterion("AC8", "kernel and transversality at lambda*", 30.0, [&] {
    BranchProblem bp(base.flow, 64, 128);
    const VectorXd w = bp.sample(base.km);
    const auto sv = jacobian_singular_values(bp, VectorXd::Zero(bp.size()), base.disp.lambda_star, w);
    const double tv = base.disp.transversality;
    return Outcome{sv.sigma_min <= 1e-6 * sv.norm && sv.angle <= 1e-3 && tv > 0.0,
                   fmt::format("sigma_min/|J| {:.2e}, angle {:.2e}, transversality {:.6g}",
                               sv.sigma_min / sv.norm, sv.angle, tv)};
  });

  criterion("AC9", "branch existence and shape", 120.0, [&] {
    BranchProblem bp(base.flow, 64, 128);
    const auto run = continue_branch(bp, base.disp, base.km);
    bool ok = true;
    int fewest = 1 << 30;
    double res = 0.0, defect = 0.0, mean = 0.0, minhp = INFINITY;
    for (const auto* dir : {&run.plus, &run.minus}) {
      fewest = std::min(fewest, int(dir->points.size()) - 1);
      for (std::size_t k = 1; k < dir->points.size(); ++k) {
        const auto& pt = dir->points[k];
        res = std::max(res, pt.residual_norm);
        defect = std::max(defect, pt.diag.even_defect);
        mean = std::max(mean, std::abs(pt.eta_mean));
        minhp = std::min(minhp, pt.min_hp_total);
        ok = ok && pt.crest_count == 2 && pt.diag.monotone_ok;
      }
    }
    const auto fit = fit_branch(bp, run, 3);
    const bool shape = fit.used >= 6 && std::isfinite(fit.C_lambda) && std::isfinite(fit.C_quad) &&
                       std::abs(fit.slope - 2.0) <= 0.2;
    ok = ok && fewest >= 5 && res <= 1e-10 && defect <= 1e-10 && mean <= 1e-9 && minhp > 0.0 &&
         shape;
    return Outcome{ok, fmt::format("points >= {}, residual {:.1e}, even defect {:.1e}, |mean eta| "
                                   "{:.1e}, min h_p+H' {:.4f}, C {:.4g}, C' {:.4g}, slope {:.3f}",
                                   fewest, res, defect, mean, minhp, fit.C_lambda, fit.C_quad,
                                   fit.slope)};
  });

  criterion("AC10", "Euler residuals under grid doubling", 60.0, [&] {
    const auto rep = convergence_study(base.flow, base.disp, base.km, 0.005);
    const Setup strat = make(strat5);
    const auto rrho = convergence_study(strat.flow, strat.disp, strat.km, 1e-5);
    const auto vprm = vortical(-5.0, 0.2);
    const Setup vort = make(vprm);
    const auto rhead = convergence_study(vort.flow, vort.disp, vort.km, 1e-5);
    double bc = 0.0;
    for (const auto* r : {&rep.coarse, &rep.fine, &rrho.coarse, &rrho.fine, &rhead.coarse, &rhead.fine})
      bc = std::max({bc, r->kinematic, r->bottom, r->mean_zero});
    const bool ok = rep.order_momentum >= 1.8 && rep.order_dynamic >= 1.8 &&
                    rep.order_incompressibility >= 1.8 && bc <= 1e-8 && rrho.order_rho >= 1.8 &&
                    rhead.order_head >= 1.8 && admissible(vprm, vort.flow).all;
    return Outcome{ok, fmt::format("orders momentum {:.2f} dynamic {:.2f} incompressibility {:.2f}; "
                                   "boundary {:.1e}; rho order {:.2f} (stratified); E order "
                                   "{:.2f} (beta = 0.2)",
                                   rep.order_momentum, rep.order_dynamic,
                                   rep.order_incompressibility, bc, rrho.order_rho,
                                   rhead.order_head)};
  });

  criterion("AC11", "analytic Jacobian against central differences", 30.0, [&] {
    std::mt19937_64 rng(2024);
    BranchProblem bp(base.flow, 64, 128);
    double worst = 0.0;
    int dirs = 0;
    for (int st = 0; st < 3; ++st) {
      const VectorXd u = random_state(bp, rng, 0.02);
      const auto fc = bp.fd_check(u, base.disp.lambda_star * (0.8 + 0.1 * st), 10, 300 + st);
      worst = std::max(worst, fc.max_rel_err);
      dirs += fc.directions;
    }
    return Outcome{worst <= 1e-6 && dirs == 30,
                   fmt::format("max rel err {:.2e} over {} directions", worst, dirs)};
  });

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
