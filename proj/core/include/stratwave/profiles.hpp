#pragma once

#include <functional>
#include <limits>
#include <optional>

namespace stratwave {

using ScalarFn = std::function<double(double)>;

struct ProfileOptions {
  int samples = 2048;            // uniform sample grid for max/min of B and rho
  bool singular_beta = false;    // beta ~ (p-p0)^(-1/2): graded grids downstream
  bool assert_decreasing = false;
  std::optional<double> rho_prime_l1;  // required when rho is not monotone
  std::optional<double> rho_floor;
  // metadata only: regularity exponent r of rho' and beta in L_r
  double r_exponent = std::numeric_limits<double>::infinity();
};

// Streamline density rho(p) and Bernoulli primitive B(p) on [p0, 0]. Immutable.
class StratificationProfile {
 public:
  StratificationProfile(double p0, ScalarFn rho, ScalarFn B, ProfileOptions opt = {});

  // B(p) = int_{p0}^p beta, by adaptive quadrature. Throws ConfigError
  // ("profile must supply primitive") if the integral does not converge.
  static StratificationProfile from_beta(double p0, ScalarFn rho, ScalarFn beta,
                                         ProfileOptions opt = {});

  double p0() const { return p0_; }
  double rho(double p) const { return rho_(p); }
  double B(double p) const { return B_(p) - B_at_p0_; }

  double rho_floor() const { return rho_floor_; }
  bool rho_decreasing() const { return decreasing_; }
  double rho_prime_l1() const { return rho_prime_l1_; }
  bool singular_beta() const { return singular_beta_; }
  double B_max() const { return B_max_; }
  double B_min() const { return B_min_; }
  double rho_max() const { return rho_max_; }
  double rho_min() const { return rho_min_; }
  bool constant_density() const { return constant_density_; }
  bool irrotational() const { return irrotational_; }
  double r_exponent() const { return r_exponent_; }
  // Hoelder exponent alpha = (r-1)/r, metadata only
  double alpha_exponent() const;

  // Marks data that enables closed-form cross checks.
  void set_constant_density(bool v) { constant_density_ = v; }

 private:
  double p0_;
  ScalarFn rho_;
  ScalarFn B_;
  double B_at_p0_ = 0.0;
  double rho_floor_ = 0.0;
  bool decreasing_ = false;
  double rho_prime_l1_ = 0.0;
  bool singular_beta_ = false;
  double B_max_ = 0.0, B_min_ = 0.0, rho_max_ = 0.0, rho_min_ = 0.0;
  bool constant_density_ = false;
  bool irrotational_ = false;
  double r_exponent_;
};

struct PhysicalParameters {
  double g = 9.81;
  double d = 1.0;
  double sigma = 1.0;
  StratificationProfile profile;
};

// Throws ConfigError on g<=0, d<=0, sigma<=0, p0>=0.
void validate(const PhysicalParameters& params);

double mu_star(const PhysicalParameters& params);
double x_star();

struct Res2Result {
  bool holds;
  double margin;  // -inf when the radicand vanishes
};
struct Res3Result {
  bool holds;
  double lhs;
};
struct Cthe0Result {
  bool holds;
  double a0;
};

Res2Result check_res2(const PhysicalParameters& params);
Res3Result check_res3(const PhysicalParameters& params);
// e^{2 a0} - 2 a0 <= 5 for a0 = A(0)
Cthe0Result check_cthe0(double A_at_top);

}  // namespace stratwave
