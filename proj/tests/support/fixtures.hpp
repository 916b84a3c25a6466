#pragma once

#include <cmath>

#include "stratwave/profiles.hpp"

namespace fixtures {

inline stratwave::PhysicalParameters constant_density(double p0, double sigma = 0.3,
                                                      double rho = 1.0, double g = 9.81,
                                                      double d = 1.0) {
  stratwave::StratificationProfile pr(p0, [rho](double) { return rho; },
                                      [](double) { return 0.0; });
  return {g, d, sigma, pr};
}

// rho(p) = 1 - 0.05 p, decreasing in depth-up direction
inline stratwave::PhysicalParameters linear_strat(double p0, double sigma = 1.0,
                                                  double d = 1.0, double g = 9.81) {
  stratwave::ProfileOptions opt;
  opt.assert_decreasing = true;
  stratwave::StratificationProfile pr(p0, [](double p) { return 1.0 - 0.05 * p; },
                                      [](double) { return 0.0; }, opt);
  return {g, d, sigma, pr};
}

// beta = C (p - p0)^{-1/2}, B = 2 C (p - p0)^{1/2}, unit density
inline stratwave::PhysicalParameters sqrt_singular(double p0, double C, double d = 1.0,
                                                   double g = 9.81, double sigma = 1.0) {
  stratwave::ProfileOptions opt;
  opt.singular_beta = true;
  stratwave::StratificationProfile pr(
      p0, [](double) { return 1.0; },
      [C, p0](double p) { return 2.0 * C * std::sqrt(std::max(0.0, p - p0)); }, opt);
  return {g, d, sigma, pr};
}

}  // namespace fixtures
