#pragma once

#include <utility>
#include <vector>

#include "stratwave/pgrid.hpp"
#include "stratwave/profiles.hpp"

namespace stratwave {

struct LaminarOptions {
  int n_p = 512;
  double picard_tol = 1e-12;
  double shoot_tol = 1e-10;
  int max_iter = 400;
  int max_scan = 60;
  bool force_marching = false;  // skip the full-interval iteration
};

// Background flow H(p) with H(p0) = 0. Node data plus smooth evaluation
// at arbitrary p (Hermite in the grid parameter t).
struct LaminarFlow {
  LaminarFlow(PhysicalParameters prm, PGrid g) : params(std::move(prm)), grid(std::move(g)) {}

  PhysicalParameters params;
  PGrid grid;
  double mu = 0.0;
  std::vector<double> H, Hp, a, A, S;  // S = int_{p0}^p rho H'
  int iterations = 0;
  bool marched = false;

  double radicand(double p, double Hv, double Sv) const;
  double H_at(double p) const { return Ht_(grid.t_of_p(p)); }
  double S_at(double p) const { return St_(grid.t_of_p(p)); }
  double A_at(double p) const { return At_(grid.t_of_p(p)); }
  double radicand_at(double p) const;
  double Hp_at(double p) const;
  double a_at(double p) const;
  void build_interpolants();

 private:
  Hermite Ht_, St_, At_;
};

// Fixed point of H = int (radicand)^(-1/2) for given mu; no depth condition.
LaminarFlow picard_solve(const PhysicalParameters& params, double mu,
                         const LaminarOptions& opt = {});

struct ShootResult {
  LaminarFlow flow;
  std::vector<std::pair<double, double>> brackets;  // every sign change found
  double H0_error = 0.0;
};

// mu with H(0; mu) = d; the largest-mu bracket is refined.
ShootResult shoot_depth(const PhysicalParameters& params, const LaminarOptions& opt = {});

// sup_p |H(p) - int_{p0}^p radicand^(-1/2)| recomputed on a grid twice as fine.
double laminar_residual(const LaminarFlow& flow);

Cthe0Result check_cthe0(const LaminarFlow& flow);

}  // namespace stratwave
