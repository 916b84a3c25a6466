#include "stratwave/dispersion.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint.hpp>

#include "stratwave/error.hpp"

namespace stratwave {

namespace {

using State = std::array<double, 2>;
namespace ode = boost::numeric::odeint;
constexpr double kPi = std::numbers::pi;

struct SLSystem {
  const LaminarFlow& flow;
  double kappa;  // theta / lambda^2

  void coeffs(double p, double& a, double& rho, double& Ap) const {
    a = flow.a_at(p);
    rho = flow.params.profile.rho(p);
    Ap = flow.params.g * rho / (a * a * a);
  }
  void operator()(const State& y, State& dy, double p) const {
    double a, rho, Ap;
    coeffs(p, a, rho, Ap);
    dy[0] = Ap * y[0] + y[1] / (a * a * a);
    dy[1] = (kappa * a - flow.params.g * rho * Ap) * y[0] - Ap * y[1];
  }
};

void check_finite(const State& y, double p) {
  if (!std::isfinite(y[0]) || !std::isfinite(y[1]))
    throw NumericalError("Sturm-Liouville integration failed near p=" + std::to_string(p));
}

SLTrajectory integrate_on_grid(const LaminarFlow& flow, double lambda, double theta,
                               const DispersionOptions& opt, bool forward) {
  if (!(lambda > 0.0)) throw ConfigError("lambda must be positive");
  SLSystem sys{flow, theta / (lambda * lambda)};
  const auto& pr = flow.params.profile;
  const double g = flow.params.g, sigma = flow.params.sigma;
  SLTrajectory tr;
  tr.lambda = lambda;
  tr.theta = theta;
  tr.direction = forward ? SLTrajectory::Direction::forward_from_p0
                         : SLTrajectory::Direction::backward_from_top;
  std::vector<double> times = flow.grid.p;
  State y;
  if (forward) {
    const double a0 = flow.a_at(pr.p0());
    y = {0.0, a0 * a0 * a0};
  } else {
    std::reverse(times.begin(), times.end());
    const double a = flow.a_at(0.0);
    const double a3 = a * a * a;
    const double w = lambda * lambda * a3;
    const double wp = lambda * lambda * g * pr.rho(0.0) + sigma * theta;
    y = {w, a3 * wp - g * pr.rho(0.0) * w};
  }
  const double dt0 = (forward ? 1e-3 : -1e-3) * (-pr.p0());
  std::vector<double> ps, ws, zs;
  try {
    ode::integrate_times(ode::make_dense_output(opt.atol, opt.rtol, ode::runge_kutta_dopri5<State>()),
                         sys, y, times.begin(), times.end(), dt0,
                         [&](const State& s, double p) {
                           check_finite(s, p);
                           ps.push_back(p);
                           ws.push_back(s[0]);
                           zs.push_back(s[1]);
                         });
  } catch (const ode::step_adjustment_error& e) {
    throw NumericalError(std::string("Sturm-Liouville integrator step underflow: ") + e.what());
  }
  if (!forward) {
    std::reverse(ps.begin(), ps.end());
    std::reverse(ws.begin(), ws.end());
    std::reverse(zs.begin(), zs.end());
  }
  tr.p = ps;
  tr.w = ws;
  tr.z = zs;
  tr.wp.resize(ps.size());
  for (std::size_t i = 0; i < ps.size(); ++i) {
    double a, rho, Ap;
    sys.coeffs(ps[i], a, rho, Ap);
    tr.wp[i] = Ap * ws[i] + zs[i] / (a * a * a);
  }
  return tr;
}

}  // namespace

SLTrajectory integrate_w1(const LaminarFlow& flow, double lambda, double theta,
                          const DispersionOptions& opt) {
  return integrate_on_grid(flow, lambda, theta, opt, true);
}

SLTrajectory integrate_w2(const LaminarFlow& flow, double lambda, double theta,
                          const DispersionOptions& opt) {
  return integrate_on_grid(flow, lambda, theta, opt, false);
}

double wronskian_at_top(const LaminarFlow& flow, double lambda, double theta,
                        const DispersionOptions& opt, WronskianInfo* info) {
  SLSystem sys{flow, theta / (lambda * lambda)};
  const double p0 = flow.params.profile.p0();
  const double a0 = flow.a_at(p0);
  State y{0.0, a0 * a0 * a0};
  // segments with renormalisation: large theta overflows double otherwise
  constexpr int kSeg = 16;
  double log_scale = 0.0;
  auto stepper = ode::make_controlled(opt.atol, opt.rtol, ode::runge_kutta_dopri5<State>());
  try {
    for (int k = 0; k < kSeg; ++k) {
      const double pa = p0 - p0 * double(k) / kSeg;
      const double pb = (k + 1 == kSeg) ? 0.0 : p0 - p0 * double(k + 1) / kSeg;
      ode::integrate_adaptive(stepper, sys, y, pa, pb, -1e-3 * p0);
      const double m = std::max(std::abs(y[0]), std::abs(y[1]));
      if (m > 1e100) {
        y[0] /= m;
        y[1] /= m;
        log_scale += std::log(m);
      }
    }
  } catch (const ode::step_adjustment_error& e) {
    throw NumericalError(std::string("Sturm-Liouville integrator step underflow: ") + e.what());
  }
  check_finite(y, 0.0);
  const double t1 = flow.params.sigma * theta * y[0];
  const double t2 = lambda * lambda * y[1];
  const double f = std::exp(log_scale);
  if (info) {
    info->scale = (std::abs(t1) + std::abs(t2)) * f;
    info->w1_top = y[0] * f;
    info->rel = (t1 - t2) / (std::abs(t1) + std::abs(t2));
  }
  return (t1 - t2) * f;
}

RootScan largest_root_theta(const LaminarFlow& flow, double lambda, const DispersionOptions& opt) {
  const auto& pr = flow.params.profile;
  const double g = flow.params.g;
  const double amin = *std::min_element(flow.a.begin(), flow.a.end());
  const double chopin = g * g * pr.rho(pr.p0()) * pr.rho(pr.p0()) / std::pow(amin, 4);
  RootScan rs;
  rs.theta_hi = lambda * lambda *
                std::max(opt.chopin_factor * chopin, 16.0 * kPi * kPi * opt.safety);
  auto W = [&](double th) { return wronskian_at_top(flow, lambda, th, opt); };

  while (W(rs.theta_hi) <= 0.0) {
    if (rs.doublings >= opt.max_doublings)
      throw NumericalError("W(theta_hi) <= 0 after doubling the scan range");
    rs.theta_hi *= 2.0;
    ++rs.doublings;
  }

  // half linear, half logarithmic abscissae on [0, theta_hi]
  const int n = std::max(opt.scan_points, 8);
  std::vector<double> th;
  th.push_back(0.0);
  const int nl = n / 2;
  for (int i = 1; i <= nl; ++i) th.push_back(rs.theta_hi * double(i) / nl);
  const int ng = n - 1 - nl;
  for (int i = 0; i < ng; ++i) th.push_back(rs.theta_hi * std::pow(1e-6, 1.0 - double(i) / ng));
  std::sort(th.begin(), th.end());
  th.erase(std::unique(th.begin(), th.end()), th.end());

  std::vector<double> Wv(th.size());
  for (std::size_t i = 0; i < th.size(); ++i) Wv[i] = W(th[i]);

  for (std::size_t i = 1; i < th.size(); ++i) {
    if (Wv[i] == 0.0) {
      rs.roots.push_back(th[i]);
      continue;
    }
    if (Wv[i - 1] == 0.0 || (Wv[i - 1] < 0.0) == (Wv[i] < 0.0)) continue;
    std::uintmax_t it = 200;
    auto [lo, hi] = boost::math::tools::toms748_solve(
        W, th[i - 1], th[i], Wv[i - 1], Wv[i],
        boost::math::tools::eps_tolerance<double>(opt.root_bits), it);
    rs.roots.push_back(0.5 * (lo + hi));
  }
  if (rs.roots.empty())
    throw NumericalError("inconsistent state: no sign change of W(0; lambda, theta) on the scan");
  rs.theta = rs.roots.back();
  return rs;
}

double analytic_dispersion(const PhysicalParameters& params) {
  const auto& pr = params.profile;
  if (!pr.constant_density() || !pr.irrotational())
    throw ConfigError("analytic dispersion needs constant density and beta = 0");
  const double rho = pr.rho(0.0), g = params.g, d = params.d, s = params.sigma;
  const double c = pr.p0() * pr.p0() / (d * d);
  if (!(g * rho * d - c < 0.0))
    throw ConditionError("dispersion relation: f(0) >= 0 (g rho d >= p0^2/d^2)");
  auto f = [=](double x) { return (g * rho + s * x * x) * std::tanh(d * x) / x - c; };
  double hi = 1.0;
  while (f(hi) < 0.0) hi *= 2.0;
  double lo = hi / 2.0;
  while (lo > 1e-300 && f(lo) > 0.0) lo /= 2.0;
  std::uintmax_t it = 300;
  auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, boost::math::tools::eps_tolerance<double>(52), it);
  const double x = 0.5 * (a + b);
  return x * x;
}

W0Check check_w0_nondegenerate(const LaminarFlow& flow, const DispersionOptions& opt) {
  auto tr = integrate_w1(flow, 1.0, 0.0, opt);
  double sup = 0.0;
  for (double v : tr.w) sup = std::max(sup, std::abs(v));
  const double zmin = *std::min_element(tr.z.begin(), tr.z.end());
  const double top = tr.w.back();
  return {std::abs(top) > 1e-8 * sup, top, sup, zmin};
}

IdentityCheck wronskian_identity_check(const LaminarFlow& flow, double lambda, double theta,
                                       const DispersionOptions& opt) {
  IdentityCheck ic;
  const double hl = opt.fd_step * lambda, ht = opt.fd_step * theta;
  WronskianInfo wi;
  wronskian_at_top(flow, lambda, theta, opt, &wi);
  const double scale = wi.scale;
  ic.w1_top = wi.w1_top;
  ic.W_lambda = (wronskian_at_top(flow, lambda + hl, theta, opt) -
                 wronskian_at_top(flow, lambda - hl, theta, opt)) / (2.0 * hl);
  ic.W_theta = (wronskian_at_top(flow, lambda, theta + ht, opt) -
                wronskian_at_top(flow, lambda, theta - ht, opt)) / (2.0 * ht);
  ic.expected = -lambda / (2.0 * theta);
  ic.indeterminate = std::abs(ic.W_lambda) * lambda <= 1e-8 * scale;
  ic.ratio = ic.W_theta / ic.W_lambda;
  ic.rel_err = std::abs(ic.ratio - ic.expected) / std::abs(ic.expected);
  ic.sign_ok = ic.w1_top * ic.W_lambda < 0.0;
  return ic;
}

double transversality_value(const LaminarFlow& flow, double /*lambda_star*/, const SLTrajectory& w1) {
  const auto& pr = flow.params.profile;
  const double g = flow.params.g;
  const int n = int(w1.p.size()) - 1;
  std::vector<double> f(n + 1), rho(n + 1);
  for (int i = 0; i <= n; ++i) {
    const double a = flow.a[i];
    f[i] = a * a * a * w1.wp[i] * w1.wp[i] * flow.grid.dpdt[i];
    rho[i] = pr.rho(w1.p[i]);
  }
  const double kinetic = cumulative_integral(f, flow.grid.dt()).back();
  // int w^2 d rho, Richardson-combined trapezoid sums on the two nested grids
  auto stieltjes = [&](int step) {
    double s = 0.0;
    for (int i = 0; i + step <= n; i += step)
      s += 0.5 * (w1.w[i] * w1.w[i] + w1.w[i + step] * w1.w[i + step]) * (rho[i + step] - rho[i]);
    return s;
  };
  const double sh = stieltjes(1);
  const double dens = (n % 2 == 0) ? (4.0 * sh - stieltjes(2)) / 3.0 : sh;
  const double top = g * rho[n] * w1.w[n] * w1.w[n];
  return 0.5 * (kinetic - top + g * dens);
}

double transversality_fd(const LaminarFlow& flow, double lambda_star, const DispersionOptions& opt) {
  const double theta = 4.0 * kPi * kPi;
  const double h = opt.fd_step * lambda_star;
  WronskianInfo wi;
  wronskian_at_top(flow, lambda_star, theta, opt, &wi);
  const double w1top = wi.w1_top;
  const double Wl = (wronskian_at_top(flow, lambda_star + h, theta, opt) -
                     wronskian_at_top(flow, lambda_star - h, theta, opt)) / (2.0 * h);
  return -w1top / (4.0 * lambda_star) * Wl;
}

double wronskian_constancy(const LaminarFlow& flow, double lambda, double theta,
                           const DispersionOptions& opt) {
  auto w1 = integrate_w1(flow, lambda, theta, opt);
  auto w2 = integrate_w2(flow, lambda, theta, opt);
  double lo = 0.0, hi = 0.0, mx = 0.0;
  for (std::size_t i = 0; i < w1.p.size(); ++i) {
    const double c = w1.z[i] * w2.w[i] - w1.w[i] * w2.z[i];
    if (i == 0) lo = hi = c;
    lo = std::min(lo, c);
    hi = std::max(hi, c);
    mx = std::max(mx, std::abs(c));
  }
  return mx > 0.0 ? (hi - lo) / mx : 0.0;
}

KernelMode::KernelMode(const PGrid& grid, const SLTrajectory& w1) : grid_(grid) {
  std::vector<double> dw(w1.w.size());
  for (std::size_t i = 0; i < dw.size(); ++i) dw[i] = w1.wp[i] * grid.dpdt[i];
  w_ = Hermite(w1.w, dw, 0.0, grid.dt());
}

double KernelMode::profile(double p) const { return w_(grid_.t_of_p(p)); }

double KernelMode::profile_prime(double p) const {
  const double t = grid_.t_of_p(p);
  const double dp = grid_.dpdt_of_t(t);
  if (dp == 0.0) return 1.0;  // graded grid at p0: w1'(p0) = 1 by construction
  return w_.prime(t) / dp;
}

double KernelMode::operator()(double q, double p) const {
  return profile(p) * std::cos(2.0 * kPi * q);
}

KernelMode kernel_mode(const LaminarFlow& flow, double lambda_star, const DispersionOptions& opt) {
  return KernelMode(flow.grid, integrate_w1(flow, lambda_star, 4.0 * kPi * kPi, opt));
}

DispersionResult dispersion_constant(const LaminarFlow& flow, const DispersionOptions& opt) {
  DispersionResult r;
  const double lh = opt.lambda_hat;
  r.lambda_samples = {0.5 * lh, lh, 2.0 * lh};
  RootScan main_scan;
  for (double l : r.lambda_samples) {
    auto rs = largest_root_theta(flow, l, opt);
    r.theta_of_lambda.push_back(rs.theta);
    if (l == lh) main_scan = rs;
  }
  r.root_count = int(main_scan.roots.size());
  for (double th : main_scan.roots) r.secondary_constants.push_back(th / (lh * lh));
  r.C_D = main_scan.theta / (lh * lh);
  double lo = r.C_D, hi = r.C_D;
  for (std::size_t i = 0; i < r.lambda_samples.size(); ++i) {
    const double c = r.theta_of_lambda[i] / (r.lambda_samples[i] * r.lambda_samples[i]);
    lo = std::min(lo, c);
    hi = std::max(hi, c);
  }
  r.scaling_deviation = (hi - lo) / r.C_D;
  if (r.scaling_deviation > opt.scaling_warn)
    r.warnings.push_back("theta(lambda)/lambda^2 spread " + std::to_string(r.scaling_deviation) +
                         " exceeds tolerance: integrator inaccuracy");
  r.lambda_star = 2.0 * kPi / std::sqrt(r.C_D);
  r.w1_profile = integrate_w1(flow, r.lambda_star, 4.0 * kPi * kPi, opt);
  r.transversality = transversality_value(flow, r.lambda_star, r.w1_profile);
  r.transversality_fd = transversality_fd(flow, r.lambda_star, opt);
  if (!(r.transversality > 0.0))
    r.warnings.push_back("transversality value not positive: bifurcation theorem inapplicable");

  for (int k = 2; k <= opt.k_max; ++k) {
    const double th = 4.0 * kPi * kPi * k * k;
    WronskianInfo wi;
    const double W = wronskian_at_top(flow, r.lambda_star, th, opt, &wi);
    const bool col = std::abs(wi.rel) <= opt.collision_tol;
    r.higher_modes.push_back({k, W, wi.scale, col});
    r.kernel_collision = r.kernel_collision || col;
  }
  // a secondary constant C_i = k^2 C_D would put mode k in the kernel at lambda*
  for (double c : r.secondary_constants) {
    for (int k = 2; k <= opt.k_max; ++k)
      if (std::abs(c - k * k * r.C_D) <= 1e-6 * c) r.kernel_collision = true;
  }
  if (r.kernel_collision) r.warnings.push_back("kernel collision with a higher Fourier mode");
  return r;
}

}  // namespace stratwave
