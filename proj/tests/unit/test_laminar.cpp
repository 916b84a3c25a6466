#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "stratwave/error.hpp"
#include "stratwave/laminar.hpp"

using namespace stratwave;

TEST_CASE("constant density Picard is the closed form") {
  const auto prm = fixtures::constant_density(-3.2);
  for (int n : {16, 64, 512}) {
    LaminarOptions o;
    o.n_p = n;
    for (double mu : {0.3, 2.0, 10.24}) {
      auto f = picard_solve(prm, mu, o);
      double err = 0.0;
      for (int i = 0; i <= n; ++i)
        err = std::max(err, std::abs(f.H[i] - (f.grid.p[i] + 3.2) / std::sqrt(mu)));
      CHECK(err <= 1e-12);
    }
  }
}

TEST_CASE("constant density shooting") {
  for (double p0 : {-3.2, -1.5}) {
    for (double d : {1.0, 0.7}) {
      auto prm = fixtures::constant_density(p0, 0.3, 1.0, 9.81, d);
      auto s = shoot_depth(prm);
      const auto& f = s.flow;
      CHECK(std::abs(f.mu - p0 * p0 / (d * d)) <= 1e-10 * p0 * p0 / (d * d));
      double err = 0.0, aerr = 0.0;
      for (int i = 0; i <= f.grid.n; ++i) {
        err = std::max(err, std::abs(f.H[i] - d * (f.grid.p[i] - p0) / std::abs(p0)));
        aerr = std::max(aerr, std::abs(f.a[i] - std::abs(p0) / d));
      }
      CHECK(err <= 1e-10);
      CHECK(aerr <= 1e-9);
      CHECK(f.A.back() == doctest::Approx(9.81 * d * d * d / (p0 * p0)).epsilon(1e-10));
      CHECK(s.brackets.size() == 1);
      CHECK(laminar_residual(f) <= 1e-12);
    }
  }
}

TEST_CASE("singular Bernoulli function: Picard against the explicit integral") {
  const double p0 = -2.0, C = 0.3, mu = 2.5;
  auto prm = fixtures::sqrt_singular(p0, C);
  auto f = picard_solve(prm, mu);
  CHECK(f.grid.graded);
  double err = 0.0;
  const int m = 10 * f.grid.n;
  for (int i = 0; i <= m; ++i) {
    const double p = p0 - p0 * double(i) / m;
    err = std::max(err, std::abs(f.H_at(p) - oracle::example_sqrt_height(p, p0, mu, C)));
  }
  CHECK(err <= 1e-7);
}

TEST_CASE("singular Bernoulli function: shooting") {
  const double p0 = -2.0, C = 0.3, d = 1.0;
  auto prm = fixtures::sqrt_singular(p0, C, d);
  const double ms = mu_star(prm);
  CHECK(ms == doctest::Approx(4 * C * std::sqrt(2.0)));
  CHECK(oracle::example_sqrt_height(0.0, p0, ms * (1 + 1e-12), C) > d);
  auto s = shoot_depth(prm);
  CHECK(std::abs(s.flow.H.back() - d) <= 1e-10);
  const double mu_ref = oracle::bisect(
      [&](double mu) { return oracle::example_sqrt_height(0.0, p0, mu, C) - d; },
      ms * (1 + 1e-9), ms + p0 * p0 + 1.0);
  CHECK(s.flow.mu == doctest::Approx(mu_ref).epsilon(1e-8));
}

TEST_CASE("stratified Picard against an IVP oracle") {
  auto prm = fixtures::linear_strat(-1.0);
  const double mu = 2.0;
  CHECK(mu > mu_star(prm));
  auto f = picard_solve(prm, mu);
  std::vector<double> pts(f.grid.p.begin(), f.grid.p.end());
  auto ref = oracle::laminar_ivp(-1.0, mu, 9.81, 1.0, [](double) { return -0.05; },
                                 [](double) { return 0.0; }, pts);
  double err = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) err = std::max(err, std::abs(f.H[i] - ref[i]));
  CHECK(err <= 1e-9);

  LaminarOptions o;
  o.force_marching = true;
  auto g = picard_solve(prm, mu, o);
  CHECK(g.marched);
  double dm = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) dm = std::max(dm, std::abs(f.H[i] - g.H[i]));
  CHECK(dm <= 1e-10);
}

TEST_CASE("stratified shooting") {
  auto prm = fixtures::linear_strat(-3.2);
  auto s = shoot_depth(prm);
  const auto& f = s.flow;
  CHECK(std::abs(f.H.back() - 1.0) <= 1e-10);
  CHECK(laminar_residual(f) <= 1e-9);
  CHECK(f.mu > mu_star(prm));
  CHECK_FALSE(s.brackets.empty());

  std::vector<double> pts(f.grid.p.begin(), f.grid.p.end());
  auto ref = oracle::laminar_ivp(-3.2, f.mu, 9.81, 1.0, [](double) { return -0.05; },
                                 [](double) { return 0.0; }, pts);
  double err = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) err = std::max(err, std::abs(f.H[i] - ref[i]));
  CHECK(err <= 1e-9);

  const double bound = 3.2 / std::sqrt(f.mu - mu_star(prm));
  for (int i = 0; i <= f.grid.n; ++i) {
    CHECK(f.H[i] >= 0.0);
    CHECK(f.H[i] <= bound);
    CHECK(f.Hp[i] > 0.0);
    CHECK(std::abs(f.a[i] * f.a[i] - f.radicand_at(f.grid.p[i])) <= 1e-10 * f.a[i] * f.a[i]);
    if (i > 0) CHECK(f.A[i] >= f.A[i - 1]);
  }
  CHECK(f.A.front() == 0.0);
  CHECK(f.H.front() == 0.0);
}

TEST_CASE("RES2 and RES3 imply C:the0 on the shot flow") {
  for (double p0 : {-3.2, -4.0, -5.0, -6.0}) {
    auto prm = fixtures::linear_strat(p0);
    if (!check_res2(prm).holds || !check_res3(prm).holds) continue;
    auto f = shoot_depth(prm).flow;
    auto c = check_cthe0(f);
    CHECK(c.holds);
    CHECK(c.a0 <= check_res3(prm).lhs);
  }
  for (double p0 : {-3.2, -4.0}) {
    auto prm = fixtures::constant_density(p0);
    auto f = shoot_depth(prm).flow;
    CHECK(check_cthe0(f).holds);
    CHECK(check_cthe0(f).a0 <= check_res3(prm).lhs * (1 + 1e-12));
  }
}

TEST_CASE("H(0; mu) is continuous in mu") {
  auto prm = fixtures::linear_strat(-3.2);
  const double ms = mu_star(prm);
  double prev = picard_solve(prm, ms + 1.0).H.back();
  for (int k = 1; k <= 40; ++k) {
    const double mu = ms + 1.0 + 0.01 * k;
    const double h = picard_solve(prm, mu).H.back();
    CHECK(std::abs(h - prev) <= 0.01 * 3.2 / std::pow(mu - 0.01 - ms, 1.5));
    CHECK(h < prev);
    prev = h;
  }
}

TEST_CASE("laminar residual detects corruption") {
  auto f = shoot_depth(fixtures::constant_density(-3.2)).flow;
  CHECK(laminar_residual(f) <= 1e-12);
  for (int i = 0; i <= f.grid.n; ++i) f.H[i] += 0.01 * std::sin(3.0 * f.grid.p[i]);
  CHECK(laminar_residual(f) >= 1e-3);
}

TEST_CASE("mu at or below mu_star is rejected") {
  auto prm = fixtures::linear_strat(-3.2);
  CHECK_THROWS_AS(picard_solve(prm, mu_star(prm)), NumericalError);
  CHECK_THROWS_AS(picard_solve(prm, mu_star(prm) * 0.5), NumericalError);
}
