#include "stratwave/profile_json.hpp"

#include <cmath>
#include <memory>
#include <string>
#include <vector>

// boost 1.74 pchip calls isnan unqualified
#include <math.h>
#include <boost/math/interpolators/pchip.hpp>

#include "stratwave/error.hpp"

namespace stratwave {

namespace {

double num(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("missing key '") + key + "'");
  const auto& v = j.at(key);
  if (!v.is_number()) throw ConfigError(std::string("key '") + key + "' must be a number");
  return v.get<double>();
}

std::vector<double> vec(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array())
    throw ConfigError(std::string("missing array '") + key + "'");
  std::vector<double> out;
  for (const auto& x : j.at(key)) {
    if (!x.is_number()) throw ConfigError(std::string("array '") + key + "' must hold numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

// monotone cubic through tabulated (p, v); the table must cover [p0, 0]
ScalarFn table_fn(std::vector<double> p, std::vector<double> v, double p0) {
  if (p.size() != v.size()) throw ConfigError("table: p and value lengths differ");
  if (p.size() < 4) throw ConfigError("table: need at least 4 points");
  for (std::size_t i = 1; i < p.size(); ++i)
    if (!(p[i] > p[i - 1])) throw ConfigError("table: p must be strictly increasing");
  if (p.front() > p0 || p.back() < 0.0) throw ConfigError("table must cover [p0, 0]");
  const double lo = p.front(), hi = p.back();
  using boost::math::interpolators::pchip;
  auto f = std::make_shared<pchip<std::vector<double>>>(std::move(p), std::move(v));
  return [f, lo, hi](double x) { return (*f)(std::min(hi, std::max(lo, x))); };
}

}  // namespace

StratificationProfile parse_profile(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("profile descriptor must be an object");
  const double p0 = num(j, "p0");
  if (!(p0 < 0.0)) throw ConfigError("p0 must be negative");

  ProfileOptions opt;
  if (j.contains("samples")) opt.samples = j.at("samples").get<int>();
  if (j.contains("rho_prime_l1")) opt.rho_prime_l1 = num(j, "rho_prime_l1");
  if (j.contains("rho_floor")) opt.rho_floor = num(j, "rho_floor");
  if (j.contains("decreasing")) opt.assert_decreasing = j.at("decreasing").get<bool>();
  if (j.contains("r_exponent")) opt.r_exponent = num(j, "r_exponent");

  if (!j.contains("rho") || !j.at("rho").is_object()) throw ConfigError("missing 'rho' object");
  const auto& jr = j.at("rho");
  const std::string rk = jr.value("kind", "");
  ScalarFn rho;
  if (rk == "constant") {
    const double c = num(jr, "value");
    rho = [c](double) { return c; };
  } else if (rk == "linear") {
    const double r0 = num(jr, "rho0"), s = num(jr, "slope");
    rho = [r0, s](double p) { return r0 + s * p; };
  } else if (rk == "exp") {
    const double r0 = num(jr, "rho0"), k = num(jr, "rate");
    rho = [r0, k](double p) { return r0 * std::exp(-k * p); };
  } else if (rk == "table") {
    rho = table_fn(vec(jr, "p"), vec(jr, "value"), p0);
  } else {
    throw ConfigError("unknown rho kind '" + rk + "'");
  }

  const nlohmann::json jb = j.value("bernoulli", nlohmann::json{{"kind", "zero"}});
  const std::string bk = jb.value("kind", "");
  ScalarFn B;
  if (bk == "zero") {
    B = [](double) { return 0.0; };
  } else if (bk == "constant") {
    const double c = num(jb, "value");
    B = [c, p0](double p) { return c * (p - p0); };
  } else if (bk == "sqrt_singular") {
    const double C = num(jb, "C");
    B = [C, p0](double p) { return 2.0 * C * std::sqrt(std::max(0.0, p - p0)); };
    opt.singular_beta = true;
    if (!j.contains("r_exponent")) opt.r_exponent = 1.5;  // beta in L_r only for r < 2
  } else if (bk == "table_B") {
    B = table_fn(vec(jb, "p"), vec(jb, "B"), p0);
  } else {
    throw ConfigError("unknown bernoulli kind '" + bk + "'");
  }

  StratificationProfile prof(p0, rho, B, opt);
  if (rk == "constant") prof.set_constant_density(true);
  return prof;
}

PhysicalParameters parse_parameters(const nlohmann::json& j) {
  PhysicalParameters params{num(j, "g"), num(j, "d"), num(j, "sigma"), parse_profile(j)};
  validate(params);
  return params;
}

}  // namespace stratwave
