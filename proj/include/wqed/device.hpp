#pragma once

#include <optional>
#include <variant>

#include "wqed/pulse.hpp"
#include "wqed/units.hpp"

namespace wqed {

/// Ω/2π = k·√P with k in MHz/√W.
struct DirectCoupling {
  double k_mhz_per_sqrt_w;
};

/// Circuit calibration through the capacitance ratio C_c/C_Σ.
struct CircuitCoupling {
  double cc_over_csigma;
};

using Coupling = std::variant<std::monostate, DirectCoupling, CircuitCoupling>;

/// Physical parameters of one transmon on an open line.
///
/// Energies are E/h in GHz, rates are Γ/2π in MHz. The derived rates
/// (γ₁₀, Γ₂₁, Γ_φ2) are always recomputed, never stored.
struct DeviceParams {
  double ej_max_ghz = 12.7;
  double ec_ghz = 0.59;
  double flux = 0.0;  // Φ/Φ₀
  double gamma10_mhz = 73.0;
  double gamma_phi_mhz = 18.0;
  double gamma20_mhz = 145.0;
  double z0_ohm = 50.0;
  Coupling coupling{};
  std::optional<double> alpha_override_ghz{};

  /// Throws ParameterError on any violated invariant.
  void validate() const;

  /// 0-1 decoherence rate γ₁₀ = Γ₁₀/2 + Γ_φ.
  double gamma01_decoherence_mhz() const { return 0.5 * gamma10_mhz + gamma_phi_mhz; }
  /// Γ₂₁ = 2Γ₁₀ (relaxation scales with the squared dipole).
  double gamma21_mhz() const { return 2.0 * gamma10_mhz; }
  /// Pure dephasing of |2⟩ chosen so the 0-2 coherence decays at γ₂₀.
  double gamma_phi2_mhz() const { return gamma20_mhz - 0.5 * gamma21_mhz(); }
};

/// Reference device: E_J/h = 12.7 GHz, E_c/h = 590 MHz, Γ₁₀/2π = 73 MHz,
/// Γ_φ/2π = 18 MHz, γ₂₀/2π = 145 MHz, measured α = 720 MHz, with the flux
/// set so that ω₀₁/2π = 7.10 GHz.
DeviceParams reference_device();

struct TransitionFrequencies {
  double omega01_ghz;
  double omega12_ghz;
};

/// E_J(Φ) = E_J,max·|cos(πΦ/Φ₀)| for a symmetric SQUID.
double josephson_energy_ghz(const DeviceParams& params);

/// Throws DegenerateSpectrumError when E_J(Φ) vanishes.
TransitionFrequencies transition_frequencies(const DeviceParams& params);

/// Smallest non-negative flux giving the requested ω₀₁/2π.
double flux_for_omega01(const DeviceParams& params, double omega01_ghz);

enum class Transition { kLower, kUpper };  // 0-1, 1-2

struct PowerWatts {
  double watts;
};
struct RabiMhz {
  double mhz;
};

/// One coherent tone. Exactly one of power or Rabi amplitude is carried.
struct DriveTone {
  double frequency_ghz = 0.0;
  std::variant<PowerWatts, RabiMhz> strength{RabiMhz{0.0}};
  std::optional<PulseEnvelope> envelope{};
  Transition target = Transition::kLower;

  static DriveTone probe_power(double frequency_ghz, double watts);
  static DriveTone probe_rabi(double frequency_ghz, double rabi_mhz);
  static DriveTone control_power(double frequency_ghz, double watts);
  static DriveTone control_rabi(double frequency_ghz, double rabi_mhz);

  void validate() const;
};

/// Rabi frequency Ω/2π in MHz driven by `watts` on the given transition.
/// The 1-2 transition carries a √2 larger dipole.
double rabi_from_power(const DeviceParams& params, double watts,
                       Transition target = Transition::kLower);

/// Resolves a tone to its Rabi amplitude (passes an explicit amplitude through).
double rabi_from_power(const DeviceParams& params, const DriveTone& tone);

/// Inverse of rabi_from_power.
double power_for_rabi(const DeviceParams& params, double rabi_mhz,
                      Transition target = Transition::kLower);

/// N = P / (h·f_p·Γ₁₀/2π): photons per interaction time.
double photon_number(double watts, double probe_freq_ghz, double gamma10_mhz);
double power_for_photon_number(double n, double probe_freq_ghz, double gamma10_mhz);

inline double dbm_to_watts(double dbm) { return units::dbm_to_watts(dbm); }
inline double watts_to_dbm(double watts) { return units::watts_to_dbm(watts); }

/// Control Rabi amplitude for a control `db_above` dB stronger than the probe,
/// at equal line coupling: Ω_c = √2·10^(dB/20)·Ω_p.
double control_rabi_for_relative_power(double probe_rabi_mhz, double db_above = 30.0);

}  // namespace wqed
