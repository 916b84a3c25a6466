#include "stratwave/pgrid.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/interpolators/cubic_hermite.hpp>

#include "stratwave/error.hpp"

namespace stratwave {

PGrid PGrid::make(double p0, int n, bool graded) {
  if (n < 4) throw ConfigError("p grid needs at least 4 intervals");
  PGrid g;
  g.p0 = p0;
  g.n = n;
  g.graded = graded;
  g.t.resize(n + 1);
  g.p.resize(n + 1);
  g.dpdt.resize(n + 1);
  for (int i = 0; i <= n; ++i) {
    g.t[i] = double(i) / n;
    g.p[i] = (i == n) ? 0.0 : g.p_of_t(g.t[i]);
    g.dpdt[i] = g.dpdt_of_t(g.t[i]);
  }
  return g;
}

double PGrid::p_of_t(double tt) const {
  return graded ? p0 - p0 * tt * tt : p0 - p0 * tt;
}

double PGrid::t_of_p(double pp) const {
  const double s = std::clamp((pp - p0) / (-p0), 0.0, 1.0);
  return graded ? std::sqrt(s) : s;
}

double PGrid::dpdt_of_t(double tt) const {
  return graded ? -2.0 * p0 * tt : -p0;
}

std::vector<double> cumulative_integral(const std::vector<double>& f, double h) {
  const std::size_t n = f.size();
  if (n < 4) throw NumericalError("cumulative_integral: need 4 samples");
  std::vector<double> out(n, 0.0);
  const double c = h / 24.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    double cell;
    if (i == 0)
      cell = c * (9 * f[0] + 19 * f[1] - 5 * f[2] + f[3]);
    else if (i + 2 == n)
      cell = c * (f[i - 2] - 5 * f[i - 1] + 19 * f[i] + 9 * f[i + 1]);
    else
      cell = c * (-f[i - 1] + 13 * f[i] + 13 * f[i + 1] - f[i + 2]);
    out[i + 1] = out[i] + cell;
  }
  return out;
}

struct Hermite::Impl {
  boost::math::interpolators::cardinal_cubic_hermite<std::vector<double>> f;
};

Hermite::Hermite(std::vector<double> y, std::vector<double> dy, double x0, double h)
    : lo_(x0), hi_(x0 + double(y.size() - 1) / (1.0 / h)) {
  impl_ = std::make_shared<const Impl>(
      Impl{{std::move(y), std::move(dy), x0, h}});
}

double Hermite::operator()(double x) const { return impl_->f(std::clamp(x, lo_, hi_)); }
double Hermite::prime(double x) const { return impl_->f.prime(std::clamp(x, lo_, hi_)); }

}  // namespace stratwave
