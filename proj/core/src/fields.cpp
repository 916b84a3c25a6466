#include "stratwave/fields.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "stratwave/error.hpp"
#include "stratwave/spectral.hpp"

namespace stratwave {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
using Spline = boost::math::interpolators::cardinal_cubic_b_spline<double>;

// third-order one-sided end slopes
double slope_left(const std::vector<double>& f, double h) {
  return (-11.0 * f[0] + 18.0 * f[1] - 9.0 * f[2] + 2.0 * f[3]) / (6.0 * h);
}
double slope_right(const std::vector<double>& f, double h) {
  const std::size_t n = f.size();
  return (11.0 * f[n - 1] - 18.0 * f[n - 2] + 9.0 * f[n - 3] - 2.0 * f[n - 4]) / (6.0 * h);
}

Spline make_spline(const std::vector<double>& f, double t0, double h) {
  return Spline(f.data(), f.size(), t0, h, slope_left(f, h), slope_right(f, h));
}

// derivative at node k of samples on a nonuniform grid, exact for quadratics
double d3(const Eigen::VectorXd& f, const std::vector<double>& y, int k) {
  const int n = static_cast<int>(y.size());
  int a, b, c;
  if (k == 0) {
    a = 0, b = 1, c = 2;
  } else if (k == n - 1) {
    a = n - 3, b = n - 2, c = n - 1;
  } else {
    a = k - 1, b = k, c = k + 1;
  }
  const double x = y[k];
  const double la = ((x - y[b]) + (x - y[c])) / ((y[a] - y[b]) * (y[a] - y[c]));
  const double lb = ((x - y[a]) + (x - y[c])) / ((y[b] - y[a]) * (y[b] - y[c]));
  const double lc = ((x - y[a]) + (x - y[b])) / ((y[c] - y[a]) * (y[c] - y[b]));
  return la * f[a] + lb * f[b] + lc * f[c];
}

}  // namespace

struct HeightInterpolant::Columns {
  std::vector<Spline> u, uq;
};

HeightInterpolant::HeightInterpolant(const BranchProblem& prob, const Eigen::VectorXd& u,
                                     double lambda)
    : flow_(&prob.flow()), nq_(prob.nq()), lambda_(lambda), p0_(prob.p(0)),
      d_(prob.params().d), cols_(std::make_unique<Columns>()) {
  const Eigen::MatrixXd U = prob.unfold(u);
  const Eigen::MatrixXd UQ = U * spectral::diff_matrix(nq_).transpose();
  const int np = prob.np();
  std::vector<double> a(np + 1), b(np + 1);
  for (int i = 0; i < nq_; ++i) {
    for (int j = 0; j <= np; ++j) {
      a[j] = U(j, i);
      b[j] = UQ(j, i);
    }
    cols_->u.push_back(make_spline(a, p0_, prob.dp()));
    cols_->uq.push_back(make_spline(b, p0_, prob.dp()));
  }
}

HeightInterpolant::~HeightInterpolant() = default;
HeightInterpolant::HeightInterpolant(HeightInterpolant&&) noexcept = default;

double HeightInterpolant::h(int i, double p) const { return flow_->H_at(p) + cols_->u[i](p); }
double HeightInterpolant::h_p(int i, double p) const {
  return flow_->Hp_at(p) + cols_->u[i].prime(p);
}
double HeightInterpolant::h_q(int i, double p) const { return cols_->uq[i](p); }

double HeightInterpolant::p_of_y(int i, double y) const {
  const double target = y + d_;
  const double top = h(i, 0.0);
  if (target < -1e-13 || target > top + 1e-13) throw ConfigError("y outside the fluid column");
  if (target <= 0.0) return p0_;
  if (target >= top) return 0.0;
  auto f = [&](double p) { return h(i, p) - target; };
  std::uintmax_t it = 200;
  auto tol = [](double a, double b) { return std::abs(b - a) <= 1e-13; };
  auto r = boost::math::tools::toms748_solve(f, p0_, 0.0, -target, top - target, tol, it);
  return 0.5 * (r.first + r.second);
}

double bernoulli_constant(const HeightInterpolant& hi) {
  const double l = hi.lambda();
  Eigen::VectorXd g(hi.columns());
  for (int i = 0; i < hi.columns(); ++i) {
    const double hq = hi.h_q(i, 0.0), hp = hi.h_p(i, 0.0);
    g[i] = (l * l + hq * hq) / (l * l * hp * hp);
  }
  return spectral::periodic_mean(g);
}

Eigen::MatrixXd stream_from_height(const HeightInterpolant& hi, const Eigen::MatrixXd& y) {
  Eigen::MatrixXd psi(y.rows(), y.cols());
  for (int i = 0; i < y.rows(); ++i)
    for (int k = 0; k < y.cols(); ++k) psi(i, k) = -hi.p_of_y(i, y(i, k));
  return psi;
}

FlowField reconstruct(const HeightInterpolant& hi, const FieldOptions& opt) {
  const auto& prm = hi.flow().params;
  const auto& prof = prm.profile;
  FlowField f;
  f.lambda = hi.lambda();
  f.d = prm.d;
  f.nx = hi.columns();
  f.ny = opt.ny;
  f.Q = bernoulli_constant(hi);

  f.s.resize(f.ny);
  for (int k = 0; k < f.ny; ++k) {
    const double z = double(k) / (f.ny - 1);
    f.s[k] = z - opt.stretch * std::sin(kTwoPi * z) / kTwoPi;
  }
  f.s.front() = 0.0;
  f.s.back() = 1.0;

  Eigen::VectorXd eta(f.nx);
  for (int i = 0; i < f.nx; ++i) {
    f.x.push_back(hi.x(i));
    eta[i] = hi.eta(i);
  }
  const Eigen::VectorXd ex = spectral::derivative(eta) / f.lambda;
  const Eigen::VectorXd exx = spectral::derivative(eta, 2) / (f.lambda * f.lambda);
  f.eta.assign(eta.data(), eta.data() + f.nx);
  f.eta_x.assign(ex.data(), ex.data() + f.nx);
  f.eta_xx.assign(exx.data(), exx.data() + f.nx);

  f.y.resize(f.nx, f.ny);
  for (int i = 0; i < f.nx; ++i)
    for (int k = 0; k < f.ny; ++k) f.y(i, k) = -f.d + (eta[i] + f.d) * f.s[k];
  f.psi = stream_from_height(hi, f.y);

  f.u_rel.resize(f.nx, f.ny);
  f.v.resize(f.nx, f.ny);
  f.P.resize(f.nx, f.ny);
  f.rho.resize(f.nx, f.ny);
  const double B0 = prof.B(0.0);
  for (int i = 0; i < f.nx; ++i)
    for (int k = 0; k < f.ny; ++k) {
      const double p = -f.psi(i, k);
      const double r = prof.rho(p), sr = std::sqrt(r);
      const double hp = hi.h_p(i, p), hq = hi.h_q(i, p);
      const double u = -1.0 / (hp * sr);
      const double v = -hq / (f.lambda * hp * sr);
      f.rho(i, k) = r;
      f.u_rel(i, k) = u;
      f.v(i, k) = v;
      f.P(i, k) = -0.5 * r * (u * u + v * v) - prm.g * r * f.y(i, k) - (prof.B(p) - B0) + 0.5 * f.Q;
    }
  return f;
}

double EulerResiduals::max_interior() const {
  return std::max({momentum_x, momentum_y, density, incompressibility});
}

EulerResiduals euler_residuals(const FlowField& f, const PhysicalParameters& params) {
  EulerResiduals r;
  const int nx = f.nx, ny = f.ny;
  const double dx = f.lambda / nx, g = params.g;

  // derivatives at fixed y through (x, s): f_y = f_s/(eta+d), f_x = f_x|s - f_s s eta'/(eta+d)
  auto derivs = [&](const Eigen::MatrixXd& F, int i, int k, double& fx, double& fy) {
    const int ip = (i + 1) % nx, im = (i + nx - 1) % nx;
    const double depth = f.eta[i] + f.d;
    const double fs = d3(F.row(i).transpose(), f.s, k);
    fy = fs / depth;
    fx = (F(ip, k) - F(im, k)) / (2.0 * dx) - fs * f.s[k] * f.eta_x[i] / depth;
  };

  for (int i = 0; i < nx; ++i) {
    for (int k = 1; k + 1 < ny; ++k) {
      double ux, uy, vx, vy, Px, Py, rx, ry;
      derivs(f.u_rel, i, k, ux, uy);
      derivs(f.v, i, k, vx, vy);
      derivs(f.P, i, k, Px, Py);
      derivs(f.rho, i, k, rx, ry);
      const double rho = f.rho(i, k), u = f.u_rel(i, k), v = f.v(i, k);
      r.momentum_x = std::max(r.momentum_x, std::abs(rho * u * ux + rho * v * uy + Px));
      r.momentum_y = std::max(r.momentum_y, std::abs(rho * u * vx + rho * v * vy + Py + g * rho));
      r.density = std::max(r.density, std::abs(u * rx + v * ry));
      r.incompressibility = std::max(r.incompressibility, std::abs(ux + vy));
    }
    const int t = ny - 1;
    const double ex = f.eta_x[i], exx = f.eta_xx[i];
    const double curv = -params.sigma * exx / std::pow(1.0 + ex * ex, 1.5);
    r.dynamic = std::max(r.dynamic, std::abs(f.P(i, t) - curv));
    r.kinematic = std::max(r.kinematic, std::abs(f.v(i, t) - f.u_rel(i, t) * ex));
    r.bottom = std::max(r.bottom, std::abs(f.v(i, 0)));
  }
  double mean = 0.0;
  for (double e : f.eta) mean += e;
  r.mean_zero = std::abs(mean / nx);
  return r;
}

StreamlineCheck streamline_constancy(const FlowField& f, const HeightInterpolant& hi,
                                     const PhysicalParameters& params, int stride) {
  StreamlineCheck out;
  const double g = params.g;
  Eigen::MatrixXd E(f.nx, f.ny);
  for (int i = 0; i < f.nx; ++i)
    for (int k = 0; k < f.ny; ++k) {
      const double u = f.u_rel(i, k), v = f.v(i, k), r = f.rho(i, k);
      E(i, k) = f.P(i, k) + 0.5 * r * (u * u + v * v) + g * r * f.y(i, k);
    }
  const int levels = 64;
  for (int l = 1; l < levels; l += std::max(1, stride)) {
    const double p = hi.p0() * (1.0 - double(l) / levels);
    double rmin = 1e300, rmax = -1e300, emin = 1e300, emax = -1e300;
    for (int i = 0; i < f.nx; ++i) {
      const double y = hi.h(i, p) - f.d;
      const double sv = (y + f.d) / (f.eta[i] + f.d);
      const auto it = std::upper_bound(f.s.begin(), f.s.end(), sv);
      // three nearest nodes, quadratic Lagrange
      const int k = std::clamp(int(it - f.s.begin()) - 1, 1, f.ny - 2);
      const double a = f.s[k - 1], b = f.s[k], c = f.s[k + 1];
      const double la = (sv - b) * (sv - c) / ((a - b) * (a - c));
      const double lb = (sv - a) * (sv - c) / ((b - a) * (b - c));
      const double lc = (sv - a) * (sv - b) / ((c - a) * (c - b));
      const double r = la * f.rho(i, k - 1) + lb * f.rho(i, k) + lc * f.rho(i, k + 1);
      const double e = la * E(i, k - 1) + lb * E(i, k) + lc * E(i, k + 1);
      rmin = std::min(rmin, r), rmax = std::max(rmax, r);
      emin = std::min(emin, e), emax = std::max(emax, e);
    }
    out.rho_variation = std::max(out.rho_variation, rmax - rmin);
    out.head_variation = std::max(out.head_variation, emax - emin);
  }
  return out;
}

double round_trip_error(const FlowField& f, const HeightInterpolant& hi, int stride) {
  double err = 0.0;
  const int levels = 64;
  for (int i = 0; i < f.nx; ++i) {
    for (int l = 1; l < levels; l += std::max(1, stride)) {
      const double p = hi.p0() * (1.0 - double(l) / levels);
      const double target = -p;  // psi value of the streamline
      int k = 0;
      while (k + 1 < f.ny && f.psi(i, k + 1) > target) ++k;
      if (k + 1 >= f.ny) k = f.ny - 2;
      const double w = (f.psi(i, k) - target) / (f.psi(i, k) - f.psi(i, k + 1));
      const double y = (1 - w) * f.y(i, k) + w * f.y(i, k + 1);
      err = std::max(err, std::abs(y + f.d - hi.h(i, p)));
    }
  }
  return err;
}

ConvergenceReport convergence_study(const LaminarFlow& flow, const DispersionResult& disp,
                                    const KernelMode& wstar, double s, int nq, int np) {
  require_bifurcation_data(disp);
  ConvergenceReport rep;
  rep.s = s;
  for (int r = 0; r < 2; ++r) {
    BranchProblem bp(flow, nq << r, np << r);
    const Eigen::VectorXd w = bp.sample(wstar);
    auto nr = newton_correct(bp, s * w, disp.lambda_star, Constraint::amplitude(w, s));
    if (!nr.converged) throw NumericalError("fixed-amplitude solve failed: " + nr.status);
    HeightInterpolant hi(bp, nr.u, nr.lambda);
    FieldOptions fo;
    fo.ny = (np << r) / 2 + 1;
    const FlowField f = reconstruct(hi, fo);
    (r == 0 ? rep.coarse : rep.fine) = euler_residuals(f, flow.params);
    (r == 0 ? rep.stream_coarse : rep.stream_fine) = streamline_constancy(f, hi, flow.params);
    (r == 0 ? rep.lambda_coarse : rep.lambda_fine) = nr.lambda;
  }
  auto order = [](double a, double b) { return std::log2(a / b); };
  rep.order_momentum = order(std::max(rep.coarse.momentum_x, rep.coarse.momentum_y),
                             std::max(rep.fine.momentum_x, rep.fine.momentum_y));
  rep.order_dynamic = order(rep.coarse.dynamic, rep.fine.dynamic);
  rep.order_incompressibility = order(rep.coarse.incompressibility, rep.fine.incompressibility);
  rep.order_rho = order(rep.stream_coarse.rho_variation, rep.stream_fine.rho_variation);
  rep.order_head = order(rep.stream_coarse.head_variation, rep.stream_fine.head_variation);
  return rep;
}

}  // namespace stratwave
