#pragma once

#include <memory>
#include <vector>

namespace stratwave {

// Streamline grid on [p0, 0] parameterised by t in [0, 1], t uniform.
// p = p0 + |p0| t, or p = p0 + |p0| t^2 when graded toward p0.
struct PGrid {
  double p0 = -1.0;
  int n = 0;
  bool graded = false;
  std::vector<double> t, p, dpdt;

  static PGrid make(double p0, int n, bool graded);
  double dt() const { return 1.0 / n; }
  double p_of_t(double tt) const;
  double t_of_p(double pp) const;
  double dpdt_of_t(double tt) const;
};

// Cumulative integral of samples f on a uniform grid of spacing h,
// fourth order (cubic through 4 neighbours per cell). Needs f.size() >= 4.
std::vector<double> cumulative_integral(const std::vector<double>& f, double h);

// Cubic Hermite interpolant on the uniform grid x0 + i h (values + slopes).
class Hermite {
 public:
  Hermite() = default;
  Hermite(std::vector<double> y, std::vector<double> dy, double x0, double h);
  double operator()(double x) const;
  double prime(double x) const;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
  double lo_ = 0.0, hi_ = 0.0;
};

}  // namespace stratwave
