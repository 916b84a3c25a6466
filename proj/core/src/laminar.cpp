#include "stratwave/laminar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <boost/math/tools/roots.hpp>

#include "stratwave/error.hpp"

namespace stratwave {

double LaminarFlow::radicand(double p, double Hv, double Sv) const {
  const auto& pr = params.profile;
  const double g = params.g, d = params.d;
  return mu - 2.0 * (g * pr.rho(p) * (Hv - d) + g * d * pr.rho(pr.p0()) - g * Sv) -
         2.0 * pr.B(p);
}

double LaminarFlow::radicand_at(double p) const { return radicand(p, H_at(p), S_at(p)); }

double LaminarFlow::Hp_at(double p) const { return 1.0 / std::sqrt(radicand_at(p)); }

double LaminarFlow::a_at(double p) const { return std::sqrt(radicand_at(p)); }

void LaminarFlow::build_interpolants() {
  const auto& pr = params.profile;
  const int n = grid.n;
  std::vector<double> dH(n + 1), dS(n + 1), dA(n + 1);
  for (int i = 0; i <= n; ++i) {
    const double r = pr.rho(grid.p[i]);
    dH[i] = Hp[i] * grid.dpdt[i];
    dS[i] = r * dH[i];
    dA[i] = params.g * r * Hp[i] * Hp[i] * Hp[i] * grid.dpdt[i];
  }
  Ht_ = Hermite(H, dH, 0.0, grid.dt());
  St_ = Hermite(S, dS, 0.0, grid.dt());
  At_ = Hermite(A, dA, 0.0, grid.dt());
}

namespace {

struct Sweep {
  std::vector<double> H, S;
};

Sweep integrate_sweep(const LaminarFlow& f, const std::vector<double>& Hp,
                      const std::vector<double>& rho) {
  const int n = f.grid.n;
  std::vector<double> fh(n + 1), fs(n + 1);
  for (int i = 0; i <= n; ++i) {
    fh[i] = Hp[i] * f.grid.dpdt[i];
    fs[i] = rho[i] * fh[i];
  }
  return {cumulative_integral(fh, f.grid.dt()), cumulative_integral(fs, f.grid.dt())};
}

// one Picard map on indices [lo, hi]; returns false if the radicand turns nonpositive
bool picard_map(const LaminarFlow& f, const Sweep& sw, std::vector<double>& Hp, int lo, int hi) {
  for (int i = lo; i <= hi; ++i) {
    const double R = f.radicand(f.grid.p[i], sw.H[i], sw.S[i]);
    if (!(R > 0.0)) return false;
    Hp[i] = 1.0 / std::sqrt(R);
  }
  return true;
}

double sup_diff(const std::vector<double>& a, const std::vector<double>& b, int lo, int hi) {
  double m = 0.0;
  for (int i = lo; i <= hi; ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Plain iteration over the whole interval. Returns false on divergence.
bool full_picard(LaminarFlow& f, const std::vector<double>& rho, const LaminarOptions& opt) {
  const int n = f.grid.n;
  std::vector<double> Hp(n + 1, 1.0 / std::sqrt(f.mu));
  double prev = std::numeric_limits<double>::infinity();
  int growth = 0;
  for (int it = 1; it <= opt.max_iter; ++it) {
    Sweep sw = integrate_sweep(f, Hp, rho);
    if (!picard_map(f, sw, Hp, 0, n)) return false;
    Sweep nw = integrate_sweep(f, Hp, rho);
    const double err = sup_diff(nw.H, sw.H, 0, n);
    f.iterations = it;
    if (err <= opt.picard_tol) {
      f.Hp = Hp;
      f.H = nw.H;
      f.S = nw.S;
      return true;
    }
    growth = (err > prev) ? growth + 1 : 0;
    if (growth >= 4 || !std::isfinite(err)) return false;
    prev = err;
  }
  return false;
}

// Interval marching: converge on a window of length L, freeze, advance.
void marching_picard(LaminarFlow& f, const std::vector<double>& rho, const LaminarOptions& opt) {
  const auto& params = f.params;
  const int n = f.grid.n;
  const double ms = mu_star(params);
  const double L = std::pow(f.mu - ms, 1.5) /
                   (2.0 * params.g * (params.profile.rho_prime_l1() + 1.0));
  if (!(L > 0.0)) throw NumericalError("mu too close to mu_star");
  std::vector<double> Hp(n + 1, 1.0 / std::sqrt(f.mu));
  int lo = 0;
  f.iterations = 0;
  while (lo <= n) {
    int hi = lo;
    while (hi < n && f.grid.p[hi + 1] - f.grid.p[lo] <= L) ++hi;
    std::fill(Hp.begin() + lo, Hp.end(), Hp[std::max(lo - 1, 0)]);
    bool done = false;
    for (int it = 0; it < opt.max_iter; ++it) {
      Sweep sw = integrate_sweep(f, Hp, rho);
      std::vector<double> old = Hp;
      if (!picard_map(f, sw, Hp, lo, hi))
        throw NumericalError("mu too close to mu_star: radicand <= 0");
      ++f.iterations;
      Sweep nw = integrate_sweep(f, Hp, rho);
      if (sup_diff(nw.H, sw.H, lo, hi) <= opt.picard_tol) {
        done = true;
        break;
      }
    }
    if (!done) throw NumericalError("Picard iteration diverged on marching window");
    lo = hi + 1;
  }
  Sweep sw = integrate_sweep(f, Hp, rho);
  f.Hp = Hp;
  f.H = sw.H;
  f.S = sw.S;
  f.marched = true;
}

}  // namespace

LaminarFlow picard_solve(const PhysicalParameters& params, double mu, const LaminarOptions& opt) {
  validate(params);
  const double ms = mu_star(params);
  if (!(mu > ms)) throw NumericalError("mu too close to mu_star: mu <= mu_star");
  LaminarFlow f(params, PGrid::make(params.profile.p0(), opt.n_p, params.profile.singular_beta()));
  f.mu = mu;
  const int n = f.grid.n;
  std::vector<double> rho(n + 1);
  for (int i = 0; i <= n; ++i) rho[i] = params.profile.rho(f.grid.p[i]);

  if (opt.force_marching || !full_picard(f, rho, opt)) marching_picard(f, rho, opt);

  f.a.resize(n + 1);
  std::vector<double> fa(n + 1);
  for (int i = 0; i <= n; ++i) {
    if (!(f.Hp[i] > 0.0) || !std::isfinite(f.Hp[i]))
      throw NumericalError("mu too close to mu_star: H' not positive");
    f.a[i] = 1.0 / f.Hp[i];
    fa[i] = params.g * rho[i] * f.Hp[i] * f.Hp[i] * f.Hp[i] * f.grid.dpdt[i];
  }
  f.A = cumulative_integral(fa, f.grid.dt());
  f.build_interpolants();
  return f;
}

ShootResult shoot_depth(const PhysicalParameters& params, const LaminarOptions& opt) {
  validate(params);
  const double d = params.d, p0 = params.profile.p0();
  const double ms = mu_star(params);
  const double mu_hi = ms + p0 * p0 / (d * d) + 1.0;

  auto depth_gap = [&](double mu) { return picard_solve(params, mu, opt).H.back() - d; };

  ShootResult res{picard_solve(params, mu_hi, opt), {}, 0.0};
  double mu_prev = mu_hi;
  double f_prev = res.flow.H.back() - d;
  for (int k = 1; k <= opt.max_scan; ++k) {
    const double mu_k = ms + (mu_hi - ms) * std::ldexp(1.0, -k);
    if (!(mu_k > ms)) break;
    double fk;
    try {
      fk = depth_gap(mu_k);
    } catch (const NumericalError&) {
      break;  // reached the region where the radicand degenerates
    }
    if ((f_prev < 0.0) != (fk < 0.0)) res.brackets.emplace_back(mu_k, mu_prev);
    mu_prev = mu_k;
    f_prev = fk;
  }
  if (res.brackets.empty()) throw ConditionError("RES2 margin insufficient numerically");

  // brackets are stored in decreasing mu; the first is the largest-mu one
  auto [lo, hi] = res.brackets.front();
  std::uintmax_t it = 200;
  auto [a, b] = boost::math::tools::toms748_solve(
      depth_gap, lo, hi, boost::math::tools::eps_tolerance<double>(50), it);
  const double fa = depth_gap(a), fb = depth_gap(b);
  const double mu = std::abs(fa) <= std::abs(fb) ? a : b;
  res.flow = picard_solve(params, mu, opt);
  res.H0_error = std::abs(res.flow.H.back() - d);
  if (res.H0_error > opt.shoot_tol)
    throw NumericalError("shooting did not reach depth tolerance: |H(0)-d| = " +
                         std::to_string(res.H0_error));
  return res;
}

double laminar_residual(const LaminarFlow& flow) {
  const int n = flow.grid.n;
  const int m = 2 * n;
  const double dt = 0.5 * flow.grid.dt();
  std::vector<double> Hf(m + 1), dS(m + 1), p(m + 1), dpdt(m + 1);
  for (int i = 0; i <= m; ++i) {
    const double t = double(i) / m;
    p[i] = (i == m) ? 0.0 : flow.grid.p_of_t(t);
    dpdt[i] = flow.grid.dpdt_of_t(t);
  }
  // interpolate H in t, with slopes taken from the stored node data
  std::vector<double> dH(n + 1);
  for (int i = 0; i <= n; ++i) dH[i] = flow.Hp[i] * flow.grid.dpdt[i];
  Hermite Hi(flow.H, dH, 0.0, flow.grid.dt());
  for (int i = 0; i <= m; ++i) {
    const double t = double(i) / m;
    Hf[i] = Hi(t);
    dS[i] = flow.params.profile.rho(p[i]) * Hi.prime(t);
  }
  const auto S = cumulative_integral(dS, dt);
  std::vector<double> g(m + 1);
  for (int i = 0; i <= m; ++i) {
    const double R = flow.radicand(p[i], Hf[i], S[i]);
    if (!(R > 0.0)) return std::numeric_limits<double>::infinity();
    g[i] = dpdt[i] / std::sqrt(R);
  }
  const auto I = cumulative_integral(g, dt);
  double r = 0.0;
  for (int i = 0; i <= n; ++i) r = std::max(r, std::abs(flow.H[i] - I[2 * i]));
  return r;
}

Cthe0Result check_cthe0(const LaminarFlow& flow) { return check_cthe0(flow.A.back()); }

}  // namespace stratwave
