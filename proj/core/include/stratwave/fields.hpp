#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "stratwave/branch.hpp"

namespace stratwave {

// Total height h = H + u on the columns q_i = i/nq, cubic splines in p.
class HeightInterpolant {
 public:
  HeightInterpolant(const BranchProblem& prob, const Eigen::VectorXd& u, double lambda);
  ~HeightInterpolant();
  HeightInterpolant(HeightInterpolant&&) noexcept;

  int columns() const { return nq_; }
  double lambda() const { return lambda_; }
  double p0() const { return p0_; }
  double x(int i) const { return lambda_ * i / nq_; }
  double h(int i, double p) const;
  double h_p(int i, double p) const;
  double h_q(int i, double p) const;
  // p in [p0, 0] with h(i, p) = y + d; throws ConfigError outside [-d, eta]
  double p_of_y(int i, double y) const;
  double eta(int i) const { return h(i, 0.0) - d_; }
  const LaminarFlow& flow() const { return *flow_; }

 private:
  struct Columns;
  const LaminarFlow* flow_;
  int nq_;
  double lambda_, p0_, d_;
  std::unique_ptr<Columns> cols_;
};

struct FieldOptions {
  int ny = 64;
  double stretch = 0.5;  // s = z - stretch sin(2 pi z)/(2 pi), clusters at both ends
};

// Physical fields on x_i = lambda i/nq and y_ik = -d + (eta_i + d) s_k.
struct FlowField {
  double lambda = 0.0, d = 0.0, Q = 0.0;
  int nx = 0, ny = 0;
  std::vector<double> x, eta, eta_x, eta_xx, s;
  Eigen::MatrixXd y, psi, u_rel, v, P, rho;  // nx by ny
};

// (1/lambda) int |grad psi|^2 at the surface, periodic trapezoid
double bernoulli_constant(const HeightInterpolant& hi);
Eigen::MatrixXd stream_from_height(const HeightInterpolant& hi, const Eigen::MatrixXd& y);
FlowField reconstruct(const HeightInterpolant& hi, const FieldOptions& opt = {});

struct EulerResiduals {
  double momentum_x = 0.0, momentum_y = 0.0;
  double density = 0.0, incompressibility = 0.0;
  double dynamic = 0.0, kinematic = 0.0, bottom = 0.0, mean_zero = 0.0;
  double max_interior() const;
};
EulerResiduals euler_residuals(const FlowField& f, const PhysicalParameters& params);

struct StreamlineCheck {
  double rho_variation = 0.0;   // max over levels of (max - min) along the streamline
  double head_variation = 0.0;  // same for E = P + rho |u|^2/2 + g rho y
};
StreamlineCheck streamline_constancy(const FlowField& f, const HeightInterpolant& hi,
                                     const PhysicalParameters& params, int stride = 4);

// max |y(psi = -p_j) + d - h(q_i, p_j)| with y read off the sampled psi columns
double round_trip_error(const FlowField& f, const HeightInterpolant& hi, int stride = 1);

struct ConvergenceReport {
  double s = 0.0;
  EulerResiduals coarse, fine;
  StreamlineCheck stream_coarse, stream_fine;
  double order_momentum = 0.0, order_dynamic = 0.0, order_incompressibility = 0.0;
  double order_rho = 0.0, order_head = 0.0;
  double lambda_coarse = 0.0, lambda_fine = 0.0;
};
// Fixed-amplitude branch points on (nq, np) and (2nq, 2np), fields with ny = np/2, np.
ConvergenceReport convergence_study(const LaminarFlow& flow, const DispersionResult& disp,
                                    const KernelMode& wstar, double s, int nq = 32, int np = 64);

}  // namespace stratwave
