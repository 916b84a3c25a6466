#include "stratwave/spectral.hpp"

#include <cmath>
#include <numbers>

namespace stratwave::spectral {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

int wavenumber(int j, int n) { return j <= n / 2 ? j : j - n; }

Eigen::VectorXd derivative(const Eigen::VectorXd& row, int order) {
  const int n = static_cast<int>(row.size());
  return apply_multiplier(row, [&](int k, int) -> std::complex<double> {
    if (n % 2 == 0 && 2 * k == n) return 0.0;
    return std::pow(std::complex<double>(0.0, kTwoPi * k), order);
  });
}

Eigen::VectorXd inverse_helmholtz_top(const Eigen::VectorXd& row) {
  return apply_multiplier(row, [](int k, int) -> std::complex<double> {
    return 1.0 / (1.0 + kTwoPi * kTwoPi * double(k) * double(k));
  });
}

Eigen::VectorXd helmholtz(const Eigen::VectorXd& row) {
  return apply_multiplier(row, [](int k, int) -> std::complex<double> {
    return 1.0 + kTwoPi * kTwoPi * double(k) * double(k);
  });
}

Eigen::MatrixXd diff_matrix(int n, int order) {
  Eigen::MatrixXd D(n, n);
  for (int j = 0; j < n; ++j) D.col(j) = derivative(Eigen::VectorXd::Unit(n, j), order);
  return D;
}

Eigen::MatrixXd inverse_helmholtz_matrix(int n) {
  Eigen::MatrixXd M(n, n);
  for (int j = 0; j < n; ++j) M.col(j) = inverse_helmholtz_top(Eigen::VectorXd::Unit(n, j));
  return M;
}

double periodic_mean(const Eigen::VectorXd& row) { return row.mean(); }

}  // namespace stratwave::spectral
