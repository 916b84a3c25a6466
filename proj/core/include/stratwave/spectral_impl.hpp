#pragma once

#include <complex>
#include <vector>

#include <unsupported/Eigen/FFT>

namespace stratwave::spectral {

template <class F>
Eigen::VectorXd apply_multiplier(const Eigen::VectorXd& row, F m) {
  const int n = static_cast<int>(row.size());
  Eigen::FFT<double> fft;
  std::vector<double> in(row.data(), row.data() + n);
  std::vector<std::complex<double>> spec;
  fft.fwd(spec, in);
  for (int j = 0; j < n; ++j) spec[j] *= m(wavenumber(j, n), j);
  std::vector<double> out;
  fft.inv(out, spec);
  return Eigen::Map<Eigen::VectorXd>(out.data(), n);
}

}  // namespace stratwave::spectral
