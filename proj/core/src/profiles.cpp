#include "stratwave/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <memory>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/roots.hpp>

#include "stratwave/error.hpp"

namespace stratwave {

StratificationProfile::StratificationProfile(double p0, ScalarFn rho_fn, ScalarFn B_fn,
                                             ProfileOptions opt)
    : p0_(p0), rho_(std::move(rho_fn)), B_(std::move(B_fn)),
      singular_beta_(opt.singular_beta), r_exponent_(opt.r_exponent) {
  if (!(p0_ < 0.0)) throw ConfigError("p0 must be negative");
  if (!rho_ || !B_) throw ConfigError("profile needs rho and B");
  if (opt.samples < 2) throw ConfigError("profile sample grid too small");

  B_at_p0_ = B_(p0_);
  const int n = opt.samples;
  rho_min_ = rho_max_ = rho_(p0_);
  B_min_ = B_max_ = 0.0;
  bool monotone_dec = true, monotone_inc = true;
  double prev = rho_(p0_);
  for (int i = 1; i <= n; ++i) {
    const double p = (i == n) ? 0.0 : p0_ + (-p0_) * double(i) / n;
    const double r = rho_(p);
    const double b = this->B(p);
    if (!std::isfinite(r) || !std::isfinite(b))
      throw ConfigError("profile not finite at p=" + std::to_string(p));
    rho_min_ = std::min(rho_min_, r);
    rho_max_ = std::max(rho_max_, r);
    B_min_ = std::min(B_min_, b);
    B_max_ = std::max(B_max_, b);
    if (r > prev) monotone_dec = false;
    if (r < prev) monotone_inc = false;
    prev = r;
  }

  rho_floor_ = opt.rho_floor.value_or(rho_min_);
  if (!(rho_floor_ > 0.0)) throw ConfigError("rho floor must be positive");
  if (rho_min_ < rho_floor_)
    throw ConfigError("rho drops below the declared floor");

  if (opt.assert_decreasing && !monotone_dec)
    throw ConfigError("rho declared decreasing but increases on the sample grid");
  decreasing_ = monotone_dec;

  if (opt.rho_prime_l1) {
    if (*opt.rho_prime_l1 < 0.0) throw ConfigError("rho_prime_l1 must be nonnegative");
    rho_prime_l1_ = *opt.rho_prime_l1;
  } else if (monotone_dec || monotone_inc) {
    rho_prime_l1_ = std::abs(rho_(p0_) - rho_(0.0));
  } else {
    throw ConfigError("non-monotone rho: rho_prime_l1 must be supplied");
  }

  constant_density_ = (rho_max_ == rho_min_);
  irrotational_ = (B_max_ == 0.0 && B_min_ == 0.0);
}

StratificationProfile StratificationProfile::from_beta(double p0, ScalarFn rho,
                                                       ScalarFn beta,
                                                       ProfileOptions opt) {
  if (!beta) throw ConfigError("profile must supply primitive");
  // p = p0 + s^2 absorbs (p - p0)^{-1/2} singularities; uniform cells in s
  constexpr int K = 256;
  const double smax = std::sqrt(-p0);
  auto g = [p0, beta](double s) {
    const double p = p0 + s * s;
    return p == p0 ? 0.0 : 2.0 * s * beta(p);  // s^2 below resolution of p0
  };
  auto cum = std::make_shared<std::vector<double>>(K + 1, 0.0);
  auto ts = std::make_shared<boost::math::quadrature::tanh_sinh<double>>();
  for (int k = 0; k < K; ++k) {
    double err = 0.0, l1 = 0.0, v = 0.0;
    try {
      v = ts->integrate(g, smax * k / K, smax * (k + 1) / K, 1e-13, &err, &l1);
    } catch (const std::exception&) {
      throw ConfigError("profile must supply primitive");
    }
    if (!std::isfinite(v) || err > 1e-7 * std::max(1.0, l1))
      throw ConfigError("profile must supply primitive");
    (*cum)[k + 1] = (*cum)[k] + v;
  }
  auto B = [p0, smax, g, cum](double p) -> double {
    if (p <= p0) return 0.0;
    const double s = std::sqrt(std::min(p - p0, -p0));
    const int k = std::min(int(s / smax * K), K - 1);
    const double a = smax * k / K;
    if (s <= a) return (*cum)[k];
    return (*cum)[k] +
           boost::math::quadrature::gauss_kronrod<double, 21>::integrate(g, a, s, 0, 1e-14);
  };
  return StratificationProfile(p0, std::move(rho), B, opt);
}

double StratificationProfile::alpha_exponent() const {
  if (std::isinf(r_exponent_)) return 1.0;
  return (r_exponent_ - 1.0) / r_exponent_;
}

void validate(const PhysicalParameters& params) {
  if (!(params.g > 0.0)) throw ConfigError("g must be positive");
  if (!(params.d > 0.0)) throw ConfigError("d must be positive");
  if (!(params.sigma > 0.0)) throw ConfigError("sigma must be positive");
  if (!(params.profile.p0() < 0.0)) throw ConfigError("p0 must be negative");
}

double mu_star(const PhysicalParameters& params) {
  const auto& pr = params.profile;
  return 2.0 * (params.g * params.d * pr.rho_prime_l1() + pr.B_max());
}

double x_star() {
  auto f = [](double x) { return std::exp(x) - x - 5.0; };
  std::uintmax_t it = 100;
  auto [lo, hi] = boost::math::tools::toms748_solve(
      f, 1.0, 3.0, boost::math::tools::eps_tolerance<double>(52), it);
  return 0.5 * (lo + hi);
}

Res2Result check_res2(const PhysicalParameters& params) {
  const double rad = mu_star(params) - 2.0 * params.profile.B_min();
  if (rad < 0.0) throw ConfigError("inconsistent profile data: mu_star - 2 min B < 0");
  if (rad == 0.0) return {true, -std::numeric_limits<double>::infinity()};
  const double margin = params.d + params.profile.p0() / std::sqrt(rad);
  return {margin < 0.0, margin};
}

Res3Result check_res3(const PhysicalParameters& params) {
  const auto& pr = params.profile;
  const double d = params.d, p0 = pr.p0();
  const double den = p0 * p0 - (mu_star(params) - 2.0 * pr.B_min()) * d * d;
  if (!(den > 0.0)) throw ConditionError("RES2 violated: RES3 denominator not positive");
  const double lhs = params.g * d * d * d * pr.rho(p0) * std::abs(p0) / std::pow(den, 1.5);
  return {lhs <= 0.5 * x_star(), lhs};
}

Cthe0Result check_cthe0(double a0) {
  return {std::exp(2.0 * a0) - 2.0 * a0 <= 5.0, a0};
}

}  // namespace stratwave
