#include "wqed/scattering.hpp"

#include <cmath>

#include "wqed/errors.hpp"

namespace wqed {

ScatterResult ScatterResult::from_reflection(std::complex<double> r) {
  return ScatterResult{1.0 + r, r};
}

ScatterResult ScatterResult::from_transmission(std::complex<double> t) {
  return ScatterResult{t, t - 1.0};
}

double max_reflection_amplitude(const DeviceParams& params) {
  params.validate();
  return 1.0 / (1.0 + 2.0 * params.gamma_phi_mhz / params.gamma10_mhz);
}

ScatterResult reflection_two_level(const DeviceParams& params, double probe_rabi_mhz) {
  if (!(probe_rabi_mhz >= 0.0)) throw DomainError("probe Rabi amplitude must be >= 0");
  const double r0 = max_reflection_amplitude(params);
  const double saturation =
      probe_rabi_mhz * probe_rabi_mhz / (params.gamma10_mhz * params.gamma01_decoherence_mhz());
  return ScatterResult::from_reflection(-r0 / (1.0 + saturation));
}

ScatterResult eit_transmission(const DeviceParams& params, double control_rabi_mhz) {
  params.validate();
  if (!(control_rabi_mhz >= 0.0)) throw DomainError("control Rabi amplitude must be >= 0");
  const double dressing = control_rabi_mhz * control_rabi_mhz / (2.0 * params.gamma20_mhz);
  const double t = 1.0 - params.gamma10_mhz / (2.0 * params.gamma01_decoherence_mhz() + dressing);
  return ScatterResult::from_transmission(t);
}

double control_rabi_for_transmission(const DeviceParams& params, double t_target) {
  const double t_off = eit_transmission(params, 0.0).t.real();
  if (!(t_target >= t_off) || !(t_target < 1.0)) {
    throw DomainError("target transmission amplitude must lie in [t(0), 1)");
  }
  const double dressing =
      params.gamma10_mhz / (1.0 - t_target) - 2.0 * params.gamma01_decoherence_mhz();
  return std::sqrt(2.0 * params.gamma20_mhz * std::max(dressing, 0.0));
}

OnOffRatios on_off_ratios(const DeviceParams& params, double control_rabi_mhz,
                          double r_background) {
  if (!(r_background >= 0.0) || !(r_background < 1.0)) {
    throw DomainError("background reflection must lie in [0, 1)");
  }
  const ScatterResult on = eit_transmission(params, control_rabi_mhz);
  const ScatterResult off = eit_transmission(params, 0.0);
  return {(on.reflectance() + r_background) / (off.reflectance() + r_background),
          on.transmittance()};
}

MaxReflectance max_reflectance(const DeviceParams& params) {
  params.validate();
  const double amplitude = params.gamma10_mhz / (2.0 * params.gamma01_decoherence_mhz());
  return {amplitude * amplitude, 1.0 - 4.0 * params.gamma_phi_mhz / params.gamma10_mhz};
}

}  // namespace wqed
