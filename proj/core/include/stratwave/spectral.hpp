#pragma once

#include <Eigen/Dense>

namespace stratwave::spectral {

// All routines act on samples q_m = m/n of a 1-periodic function.

// Integer wavenumber of FFT bin j (|k| <= n/2).
int wavenumber(int j, int n);

// Multiplies Fourier mode k by m(k). The Nyquist bin is kept as is.
template <class F>
Eigen::VectorXd apply_multiplier(const Eigen::VectorXd& row, F m);

Eigen::VectorXd derivative(const Eigen::VectorXd& row, int order = 1);  // Nyquist zeroed
Eigen::VectorXd inverse_helmholtz_top(const Eigen::VectorXd& row);      // 1/(1+(2 pi k)^2)
Eigen::VectorXd helmholtz(const Eigen::VectorXd& row);                  // 1+(2 pi k)^2

// Dense matrices of the linear maps above.
Eigen::MatrixXd diff_matrix(int n, int order = 1);
Eigen::MatrixXd inverse_helmholtz_matrix(int n);

// Periodic trapezoid rule on [0,1).
double periodic_mean(const Eigen::VectorXd& row);

}  // namespace stratwave::spectral

#include "stratwave/spectral_impl.hpp"
