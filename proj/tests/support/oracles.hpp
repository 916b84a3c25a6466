#pragma once

// Reference computations that share no code with the library.

#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/numeric/odeint.hpp>

namespace oracle {

inline double bisect(const std::function<double(double)>& f, double lo, double hi,
                     int iters = 200) {
  double flo = f(lo);
  for (int i = 0; i < iters; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
    if (hi - lo <= 1e-16 * std::abs(mid)) break;
  }
  return 0.5 * (lo + hi);
}

// f(x) = (g rho + sigma x^2) tanh(d x) / x - p0^2/d^2; C_D = x^2
inline double dispersion_root(double g, double rho, double d, double p0, double sigma) {
  auto f = [=](double x) {
    return (g * rho + sigma * x * x) * std::tanh(d * x) / x - p0 * p0 / (d * d);
  };
  double hi = 1.0;
  while (f(hi) < 0.0) hi *= 2.0;
  return bisect(f, 1e-12, hi);
}

// number of sign changes of f on a fine grid of (0, xmax]
inline int dispersion_sign_changes(double g, double rho, double d, double p0, double sigma,
                                   double xmax, int n = 200000) {
  auto f = [=](double x) {
    return (g * rho + sigma * x * x) * std::tanh(d * x) / x - p0 * p0 / (d * d);
  };
  int c = 0;
  double prev = f(xmax / n);
  for (int i = 2; i <= n; ++i) {
    const double v = f(xmax * i / n);
    if ((v < 0.0) != (prev < 0.0)) ++c;
    prev = v;
  }
  return c;
}

// H(p) = int_{p0}^p (mu - 4 C (r - p0)^{1/2})^{-1/2} dr
inline double example_sqrt_height(double p, double p0, double mu, double C) {
  if (p <= p0) return 0.0;
  boost::math::quadrature::tanh_sinh<double> ts;
  auto f = [=](double r) { return 1.0 / std::sqrt(mu - 4.0 * C * std::sqrt(std::max(0.0, r - p0))); };
  return ts.integrate(f, p0, p, 1e-14);
}

// Laminar IVP in (H, R): H' = R^{-1/2}, R' = -2 [g rho'(H - d) + beta], R(p0) = mu.
// Returns H at the requested points (increasing).
inline std::vector<double> laminar_ivp(double p0, double mu, double g, double d,
                                       const std::function<double(double)>& drho,
                                       const std::function<double(double)>& beta,
                                       const std::vector<double>& pts) {
  using State = std::array<double, 2>;
  namespace ode = boost::numeric::odeint;
  auto sys = [&](const State& y, State& dy, double p) {
    dy[0] = 1.0 / std::sqrt(y[1]);
    dy[1] = -2.0 * (g * drho(p) * (y[0] - d) + beta(p));
  };
  State y{0.0, mu};
  std::vector<double> out;
  auto stepper = ode::make_dense_output(1e-14, 1e-13, ode::runge_kutta_dopri5<State>());
  std::vector<double> times = pts;
  ode::integrate_times(stepper, sys, y, times.begin(), times.end(), 1e-4,
                       [&](const State& s, double) { out.push_back(s[0]); });
  return out;
}

}  // namespace oracle
