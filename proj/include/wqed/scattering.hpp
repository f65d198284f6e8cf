#pragma once

#include <complex>

#include "wqed/device.hpp"

namespace wqed {

/// Coherent scattering amplitudes of the probe.
///
/// t is the forward (transmitted) amplitude and r the backward one; they
/// always satisfy t = 1 + r. `incoherent` is the power not accounted for by
/// the coherent amplitudes.
struct ScatterResult {
  std::complex<double> t{1.0, 0.0};
  std::complex<double> r{0.0, 0.0};

  static ScatterResult from_reflection(std::complex<double> r);
  static ScatterResult from_transmission(std::complex<double> t);

  double transmittance() const { return std::norm(t); }
  double reflectance() const { return std::norm(r); }
  double incoherent() const { return 1.0 - transmittance() - reflectance(); }
};

/// Maximum reflection amplitude r₀ = 1/(1 + 2Γ_φ/Γ₁₀).
double max_reflection_amplitude(const DeviceParams& params);

/// Resonant two-level reflection r = −r₀/(1 + Ω_p²/(Γ₁₀γ₁₀)).
ScatterResult reflection_two_level(const DeviceParams& params, double probe_rabi_mhz);

/// Resonant weak-probe transmission under a resonant 1-2 control:
/// t = 1 − Γ₁₀/(2γ₁₀ + Ω_c²/(2γ₂₀)). `control_rabi_mhz` may be +∞.
ScatterResult eit_transmission(const DeviceParams& params, double control_rabi_mhz);

/// Inverse of eit_transmission for a real target amplitude t.
/// Throws DomainError if t is below the control-off value or ≥ 1.
double control_rabi_for_transmission(const DeviceParams& params, double t_target);

struct OnOffRatios {
  double r_on_off;
  double t_on_off_over_t0;
};

/// Normalised on/off ratios with background reflection R_b ∈ [0, 1).
OnOffRatios on_off_ratios(const DeviceParams& params, double control_rabi_mhz,
                          double r_background);

struct MaxReflectance {
  double exact;         // (Γ₁₀/2γ₁₀)²
  double first_order;   // 1 − 4Γ_φ/Γ₁₀
};

MaxReflectance max_reflectance(const DeviceParams& params);

}  // namespace wqed
