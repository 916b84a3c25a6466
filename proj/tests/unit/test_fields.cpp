#include <cmath>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "stratwave/error.hpp"
#include "stratwave/fields.hpp"
#include "stratwave/spectral.hpp"

using namespace stratwave;
using Eigen::VectorXd;

namespace {

struct Setup {
  LaminarFlow flow;
  DispersionResult disp;
  KernelMode km;
};

Setup make(const PhysicalParameters& prm) {
  auto f = shoot_depth(prm).flow;
  auto d = dispersion_constant(f);
  auto k = kernel_mode(f, d.lambda_star);
  return Setup{std::move(f), std::move(d), std::move(k)};
}

const Setup& base() {
  static Setup s = make(fixtures::constant_density(-3.2, 3.0));
  return s;
}

const Setup& strat() {
  static Setup s = make(fixtures::linear_strat(-5.0, 3.0));
  return s;
}

struct Point {
  BranchProblem bp;
  NewtonResult nr;
};

Point branch_point(const Setup& s, double amp, int nq = 32, int np = 64) {
  BranchProblem bp(s.flow, nq, np);
  VectorXd w = bp.sample(s.km);
  auto nr = newton_correct(bp, amp * w, s.disp.lambda_star, Constraint::amplitude(w, amp));
  REQUIRE(nr.converged);
  return {std::move(bp), std::move(nr)};
}

}  // namespace

TEST_CASE("laminar constant density: closed-form fields") {
  const auto& s = base();
  BranchProblem bp(s.flow, 16, 32);
  HeightInterpolant hi(bp, VectorXd::Zero(bp.size()), 2.0);
  auto f = reconstruct(hi);
  const double mu = 3.2 * 3.2;
  CHECK(f.Q == doctest::Approx(mu).epsilon(1e-10));
  for (int i = 0; i < f.nx; ++i)
    for (int k = 0; k < f.ny; ++k) {
      CHECK(f.psi(i, k) == doctest::Approx(3.2 - 3.2 * (f.y(i, k) + 1.0)).epsilon(1e-10));
      CHECK(f.u_rel(i, k) == doctest::Approx(-std::sqrt(mu)).epsilon(1e-9));
      CHECK(f.v(i, k) == 0.0);
      CHECK(std::abs(f.P(i, k) + 9.81 * f.y(i, k)) <= 1e-9);
    }
  auto r = euler_residuals(f, s.flow.params);
  for (double v : {r.momentum_x, r.momentum_y, r.density, r.incompressibility, r.dynamic,
                   r.kinematic, r.bottom, r.mean_zero})
    CHECK(v <= 1e-9);
}

TEST_CASE("laminar stratified: Q from the surface velocity") {
  const auto& s = strat();
  BranchProblem bp(s.flow, 16, 32);
  HeightInterpolant hi(bp, VectorXd::Zero(bp.size()), 1.0);
  const double Hp0 = s.flow.Hp.back();
  CHECK(bernoulli_constant(hi) == doctest::Approx(1.0 / (Hp0 * Hp0)).epsilon(1e-9));
  auto f = reconstruct(hi);
  // x independence
  for (int i = 1; i < f.nx; ++i)
    CHECK((f.psi.row(i) - f.psi.row(0)).lpNorm<Eigen::Infinity>() <= 1e-12);
}

TEST_CASE("stream function inverts the height") {
  auto pt = branch_point(base(), 0.005);
  HeightInterpolant hi(pt.bp, pt.nr.u, pt.nr.lambda);
  auto f = reconstruct(hi);
  double err = 0.0;
  for (int i = 0; i < f.nx; ++i)
    for (int k = 0; k < f.ny; ++k) err = std::max(err, std::abs(hi.h(i, -f.psi(i, k)) - (f.y(i, k) + 1.0)));
  CHECK(err <= 1e-10);
  for (int i = 0; i < f.nx; ++i) {
    CHECK(f.psi(i, 0) == doctest::Approx(3.2).epsilon(1e-13));
    CHECK(std::abs(f.psi(i, f.ny - 1)) <= 1e-13);
  }
  CHECK_THROWS_AS(hi.p_of_y(0, f.eta[0] + 0.1), ConfigError);
  CHECK_THROWS_AS(hi.p_of_y(0, -1.1), ConfigError);
}

TEST_CASE("branch point: boundary conditions and flow direction") {
  for (const Setup* s : {&base(), &strat()}) {
    auto pt = branch_point(*s, s == &base() ? 0.005 : 1e-5);
    HeightInterpolant hi(pt.bp, pt.nr.u, pt.nr.lambda);
    auto f = reconstruct(hi);
    CHECK((f.u_rel.array() * f.rho.array().sqrt()).maxCoeff() < 0.0);
    CHECK((f.psi.array() >= -1e-13).all());
    CHECK(f.rho.minCoeff() >= s->flow.params.profile.rho_min() - 1e-14);
    auto r = euler_residuals(f, s->flow.params);
    CHECK(r.kinematic <= 1e-8);
    CHECK(r.bottom <= 1e-8);
    CHECK(r.mean_zero <= 1e-8);
  }
}

TEST_CASE("Q agrees with the discrete top row") {
  auto pt = branch_point(base(), 0.005, 64, 128);
  HeightInterpolant hi(pt.bp, pt.nr.u, pt.nr.lambda);
  const auto U = pt.bp.unfold(pt.nr.u);
  const int N = pt.bp.np();
  const double l = pt.nr.lambda, Hp0 = base().flow.Hp_at(0.0);
  VectorXd uq = U.row(N) * spectral::diff_matrix(pt.bp.nq()).transpose();
  double M = 0.0;
  for (int m = 0; m < pt.bp.nq(); ++m) {
    const double hp = Hp0 + (3 * U(N, m) - 4 * U(N - 1, m) + U(N - 2, m)) / (2 * pt.bp.dp());
    M += (l * l + uq[m] * uq[m]) / (hp * hp);
  }
  M /= pt.bp.nq();
  CHECK(bernoulli_constant(hi) == doctest::Approx(M / (l * l)).epsilon(1e-4));
}

TEST_CASE("residuals converge under grid doubling") {
  const auto& s = base();
  auto rep = convergence_study(s.flow, s.disp, s.km, 0.005);
  CHECK(rep.order_momentum >= 1.8);
  CHECK(rep.order_dynamic >= 1.8);
  CHECK(rep.order_incompressibility >= 1.8);
  CHECK(rep.fine.kinematic <= 1e-8);
  CHECK(rep.fine.bottom <= 1e-8);
  CHECK(rep.fine.mean_zero <= 1e-8);
  // constant density and beta = 0: rho and E are exactly constant
  CHECK(rep.stream_fine.rho_variation <= 1e-12);
  CHECK(rep.stream_fine.head_variation <= 1e-10);
}

TEST_CASE("stratified streamline constancy and round trip") {
  const auto& s = strat();
  auto rep = convergence_study(s.flow, s.disp, s.km, 1e-5);
  CHECK(rep.order_rho >= 1.8);
  CHECK(rep.stream_fine.head_variation <= 1e-10);
  double rt[2];
  for (int r = 0; r < 2; ++r) {
    auto pt = branch_point(s, 1e-5, 32 << r, 64 << r);
    HeightInterpolant hi(pt.bp, pt.nr.u, pt.nr.lambda);
    FieldOptions fo;
    fo.ny = 33 << r;
    rt[r] = round_trip_error(reconstruct(hi, fo), hi);
  }
  CHECK(rt[0] / rt[1] >= 3.0);
}

TEST_CASE("hydraulic head is constant along streamlines with vorticity") {
  // rho = 1, beta = 0.2: E varies across streamlines but not along them
  const double p0 = -5.0, beta = 0.2;
  StratificationProfile pr(p0, [](double) { return 1.0; },
                           [=](double p) { return beta * (p - p0); });
  pr.set_constant_density(true);
  static Setup s = make(PhysicalParameters{9.81, 1.0, 3.0, pr});
  auto rep = convergence_study(s.flow, s.disp, s.km, 1e-5);
  CHECK(rep.stream_coarse.head_variation > 1e-8);
  CHECK(rep.order_head >= 1.8);
  CHECK(rep.stream_fine.rho_variation <= 1e-12);
}

TEST_CASE("corrupted pressure is detected") {
  auto pt = branch_point(base(), 0.005);
  HeightInterpolant hi(pt.bp, pt.nr.u, pt.nr.lambda);
  auto f = reconstruct(hi);
  const double clean = euler_residuals(f, base().flow.params).momentum_x;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (int i = 0; i < f.nx; ++i)
    for (int k = 0; k < f.ny; ++k) f.P(i, k) *= 1.0 + 0.01 * uni(rng);
  auto r = euler_residuals(f, base().flow.params);
  CHECK(std::max(r.momentum_x, r.momentum_y) > 1e-3);
  CHECK(r.momentum_x > 10.0 * clean);
}
