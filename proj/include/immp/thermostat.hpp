#ifndef IMMP_THERMOSTAT_HPP
#define IMMP_THERMOSTAT_HPP

#include "immp/linalg.hpp"

namespace immp {

/// Inverse temperature and dissipation matrices of the Langevin part.
/// The fluctuation matrices satisfy sigma sigma^T = 2 gamma / beta.
struct ThermostatSpec {
  double beta = 1.0;
  Mat gamma;
  Mat gamma_z;

  static ThermostatSpec isotropic(double beta, double gamma, int d, double gamma_z, int n) {
    return {beta, gamma * Mat::Identity(d, d), gamma_z * Mat::Identity(n, n)};
  }

  Mat sigma() const { return sqrt_psd(2.0 / beta * gamma); }
  Mat sigma_z() const { return sqrt_psd(2.0 / beta * gamma_z); }
};

}  // namespace immp

#endif  // IMMP_THERMOSTAT_HPP
