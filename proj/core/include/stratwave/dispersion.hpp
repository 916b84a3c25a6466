#pragma once

#include <string>
#include <vector>

#include "stratwave/laminar.hpp"
#include "stratwave/pgrid.hpp"

namespace stratwave {

struct DispersionOptions {
  double atol = 1e-11;
  double rtol = 1e-10;
  int scan_points = 512;
  double chopin_factor = 100.0;  // multiple of g^2 rho(p0)^2 / min a^4
  double safety = 4.0;           // floor theta_hi >= 16 pi^2 safety (times lambda^2)
  int max_doublings = 6;
  int root_bits = 50;
  double lambda_hat = 1.0;
  double fd_step = 1e-5;  // relative, for W_lambda and W_theta
  int k_max = 8;          // higher modes checked at lambda*
  double collision_tol = 1e-8;
  double scaling_warn = 1e-5;
};

// Solution of  w' = A'w + z/a^3,  z' = (theta a/lambda^2 - g rho A')w - A'z
// on the laminar grid; z = a^3 w' - g rho w.
struct SLTrajectory {
  enum class Direction { forward_from_p0, backward_from_top };
  Direction direction = Direction::forward_from_p0;
  double lambda = 0.0, theta = 0.0;
  std::vector<double> p, w, z, wp;  // wp = w'
};

SLTrajectory integrate_w1(const LaminarFlow& flow, double lambda, double theta,
                          const DispersionOptions& opt = {});
SLTrajectory integrate_w2(const LaminarFlow& flow, double lambda, double theta,
                          const DispersionOptions& opt = {});

struct WronskianInfo {
  double scale = 0.0;   // |sigma theta w1(0)| + |lambda^2 z1(0)|
  double w1_top = 0.0;
  double rel = 0.0;     // W / scale, finite even when W overflows
};

// sigma theta w1(0) - lambda^2 z1(0), from integrate_w1 data only
double wronskian_at_top(const LaminarFlow& flow, double lambda, double theta,
                        const DispersionOptions& opt = {}, WronskianInfo* info = nullptr);

struct RootScan {
  double theta = 0.0;               // largest root
  std::vector<double> roots;        // all roots found, increasing
  double theta_hi = 0.0;
  int doublings = 0;
};
RootScan largest_root_theta(const LaminarFlow& flow, double lambda,
                            const DispersionOptions& opt = {});

struct ModeCheck {
  int k;
  double W;
  double scale;
  bool collides;
};

struct DispersionResult {
  std::vector<double> lambda_samples, theta_of_lambda;
  std::vector<double> secondary_constants;  // theta_i / lambda_hat^2 for every root
  double C_D = 0.0;
  double lambda_star = 0.0;
  SLTrajectory w1_profile;
  double transversality = 0.0;
  double transversality_fd = 0.0;
  double scaling_deviation = 0.0;
  int root_count = 0;
  std::vector<ModeCheck> higher_modes;
  bool kernel_collision = false;
  std::vector<std::string> warnings;
};

DispersionResult dispersion_constant(const LaminarFlow& flow, const DispersionOptions& opt = {});

// Constant density, beta = 0: x^2 for the positive root of
// (g rho + sigma x^2) tanh(d x)/x - p0^2/d^2.
double analytic_dispersion(const PhysicalParameters& params);

struct W0Check {
  bool holds;
  double w0_at_top;
  double w0_sup;
  double min_z0;
};
W0Check check_w0_nondegenerate(const LaminarFlow& flow, const DispersionOptions& opt = {});

struct IdentityCheck {
  double W_lambda = 0.0, W_theta = 0.0;
  double ratio = 0.0, expected = 0.0, rel_err = 0.0;
  double w1_top = 0.0;
  bool indeterminate = false;
  bool sign_ok = false;  // w1(0) W_lambda < 0
};
IdentityCheck wronskian_identity_check(const LaminarFlow& flow, double lambda, double theta_root,
                                       const DispersionOptions& opt = {});

// 1/2 int [ a^3 w'^2 - g rho (w^2)' ] with the density term as a Stieltjes sum.
double transversality_value(const LaminarFlow& flow, double lambda_star, const SLTrajectory& w1);
// -(w1(0) / 4 lambda*) W_lambda(lambda*, 4 pi^2) by central differences
double transversality_fd(const LaminarFlow& flow, double lambda_star,
                         const DispersionOptions& opt = {});

// max relative variation of z1 w2 - w1 z2 = a^3 (w1' w2 - w1 w2') along p
double wronskian_constancy(const LaminarFlow& flow, double lambda, double theta,
                           const DispersionOptions& opt = {});

// w*(q, p) = w1(p) cos(2 pi q), w1' (p0) = 1
class KernelMode {
 public:
  KernelMode() = default;
  KernelMode(const PGrid& grid, const SLTrajectory& w1);
  double profile(double p) const;
  double profile_prime(double p) const;
  double operator()(double q, double p) const;

 private:
  PGrid grid_;
  Hermite w_;
};
KernelMode kernel_mode(const LaminarFlow& flow, double lambda_star,
                       const DispersionOptions& opt = {});

}  // namespace stratwave
