#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "stratwave/dispersion.hpp"
#include "stratwave/laminar.hpp"

namespace stratwave {

// Perturbation h(q, p) of the laminar heights on q_m = m/nq, p_j = p0 + j dp.
// Stored on the half period m = 0..nq/2 (even in q), rows j = 1..np
// (h = 0 at p0 is eliminated).
struct HeightField {
  int nq = 0, np = 0;
  Eigen::VectorXd h;
  double lambda = 0.0;
  double s = 0.0;
};

struct FdCheck {
  double max_rel_err = 0.0;
  int directions = 0;
};

struct ProfileDiagnostics {
  double eta_mean = 0.0;
  double even_defect = 0.0;
  int crest_count = 0;
  bool monotone_ok = false;
  double min_hp_total = 0.0;
  double eta_max = 0.0;  // sup |eta|
};

class BranchProblem {
 public:
  BranchProblem(const LaminarFlow& flow, int nq = 64, int np = 128);

  int nq() const { return nq_; }
  int np() const { return np_; }
  int nh() const { return nq_ / 2 + 1; }
  int size() const { return np_ * nh(); }
  double dp() const { return dp_; }
  double p(int j) const { return p0_ + j * dp_; }
  double q(int m) const { return double(m) / nq_; }
  int index(int j, int m) const;  // j = 1..np, m = 0..nq-1 (folded)

  const LaminarFlow& flow() const { return *flow_; }
  const PhysicalParameters& params() const { return flow_->params; }

  // Full grid (np+1) x nq, row 0 is the bottom.
  Eigen::MatrixXd unfold(const Eigen::VectorXd& u) const;
  Eigen::VectorXd fold(const Eigen::MatrixXd& full) const;

  // Interior rows j < np and the top row j = np, folded like the unknowns.
  Eigen::VectorXd residual(const Eigen::VectorXd& u, double lambda) const;
  Eigen::MatrixXd residual_full(const Eigen::MatrixXd& U, double lambda) const;

  // d residual / du; dlambda receives d residual / d lambda when non-null.
  Eigen::SparseMatrix<double> jacobian(const Eigen::VectorXd& u, double lambda,
                                       Eigen::VectorXd* dlambda = nullptr) const;
  FdCheck fd_check(const Eigen::VectorXd& u, double lambda, int directions = 10,
                   std::uint64_t seed = 1) const;

  // Discrete L2 pairing on Omega (periodic trapezoid in q, trapezoid in p).
  double pair(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;
  double norm(const Eigen::VectorXd& a) const;
  const Eigen::VectorXd& weights() const { return weights_; }

  Eigen::VectorXd sample(const KernelMode& w) const;
  double min_hp_total(const Eigen::VectorXd& u) const;
  ProfileDiagnostics profile_diagnostics(const Eigen::VectorXd& u) const;

 private:
  const LaminarFlow* flow_;
  int nq_, np_;
  double p0_, dp_;
  double g_, sigma_;
  std::vector<double> Hp_, rho_, Hph_, rhoh_;
  Eigen::MatrixXd D1_, Minv_;
  Eigen::VectorXd weights_;
  std::vector<int> fold_;
};

struct NewtonOptions {
  double tol = 1e-10;
  int max_iter = 25;
  int max_halvings = 8;
};

struct Constraint {
  enum class Kind { fixed_lambda, pseudo_arclength, fixed_amplitude };
  Kind kind = Kind::fixed_lambda;
  double lambda = 0.0;                 // fixed_lambda
  Eigen::VectorXd u_prev, t_u;         // pseudo_arclength
  double lambda_prev = 0.0, t_lambda = 0.0, ds = 0.0;
  Eigen::VectorXd wstar;               // fixed_amplitude
  double s = 0.0;

  static Constraint fixed(double lambda);
  static Constraint arclength(Eigen::VectorXd u_prev, double lambda_prev, Eigen::VectorXd t_u,
                              double t_lambda, double ds);
  static Constraint amplitude(Eigen::VectorXd wstar, double s);
};

struct NewtonResult {
  Eigen::VectorXd u;
  double lambda = 0.0;
  int iterations = 0;
  double residual = 0.0;  // sup norm of residual and constraint
  bool converged = false;
  std::string status;
};

NewtonResult newton_correct(const BranchProblem& prob, Eigen::VectorXd u, double lambda,
                            const Constraint& c, const NewtonOptions& opt = {});

struct ContinuationPoint {
  double lambda = 0.0, s = 0.0;
  double residual_norm = 0.0;
  double min_hp_total = 0.0;
  double eta_mean = 0.0;
  int crest_count = 0;
  int iterations = 0;
  double ds = 0.0;
  ProfileDiagnostics diag;
  Eigen::VectorXd h;
};

struct ContinuationOptions {
  int n_steps = 6;
  double ds = 0.02;
  double ds_min_factor = 1.0 / 1024.0;
  int fast_iterations = 3;  // grow ds after a corrector this quick
  double grow = 1.3;
  NewtonOptions newton;
};

struct BranchDirection {
  std::vector<ContinuationPoint> points;  // points[0] is the laminar point
  std::string status;
};

struct BranchRun {
  double lambda_star = 0.0;
  Eigen::VectorXd wstar;
  BranchDirection plus, minus;
};

// Refuses (ConditionError) unless transversality > 0 and no kernel collision.
void require_bifurcation_data(const DispersionResult& disp);

BranchRun continue_branch(const BranchProblem& prob, const DispersionResult& disp,
                          const KernelMode& wstar, const ContinuationOptions& opt = {});

struct BranchFit {
  double C_lambda = 0.0;   // max |lambda - lambda*| / |s|
  double C_quad = 0.0;     // least squares C in |h - s w*| = C s^2
  double slope = 0.0;      // log-log slope of |h - s w*| against |s|
  int used = 0;
};
BranchFit fit_branch(const BranchProblem& prob, const BranchRun& run, int first = 3);

struct SingularInfo {
  double sigma_min = 0.0, sigma_2 = 0.0, norm = 0.0;
  Eigen::VectorXd v_min;
  double angle = 0.0;  // between v_min and w* in the L2 pairing
  int iterations = 0;
};
SingularInfo jacobian_singular_values(const BranchProblem& prob, const Eigen::VectorXd& u,
                                      double lambda, const Eigen::VectorXd& wstar);

}  // namespace stratwave
