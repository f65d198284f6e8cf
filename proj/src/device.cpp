#include "wqed/device.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "wqed/errors.hpp"

namespace wqed {
namespace {

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw ParameterError(std::string(name) + " must be a finite value > 0");
  }
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

}  // namespace

void DeviceParams::validate() const {
  require_positive(ej_max_ghz, "ej_max_ghz");
  require_positive(ec_ghz, "ec_ghz");
  require_positive(gamma10_mhz, "gamma10_mhz");
  require_positive(gamma20_mhz, "gamma20_mhz");
  require_positive(z0_ohm, "z0_ohm");
  if (!std::isfinite(flux)) throw ParameterError("flux must be finite");
  // Γ_φ = 0 is the ideal, dephasing-free atom.
  if (!(gamma_phi_mhz >= 0.0) || !std::isfinite(gamma_phi_mhz)) {
    throw ParameterError("gamma_phi_mhz must be a finite value >= 0");
  }
  if (gamma_phi2_mhz() < 0.0) {
    throw ParameterError("gamma20_mhz must be >= gamma10_mhz (implied |2> dephasing is negative)");
  }
  if (alpha_override_ghz) require_positive(*alpha_override_ghz, "alpha_override_ghz");
  std::visit(Overloaded{[](std::monostate) {},
                        [](const DirectCoupling& c) { require_positive(c.k_mhz_per_sqrt_w, "coupling_k"); },
                        [](const CircuitCoupling& c) { require_positive(c.cc_over_csigma, "cc_over_csigma"); }},
             coupling);
}

DeviceParams reference_device() {
  DeviceParams p;
  p.alpha_override_ghz = 0.72;
  p.flux = flux_for_omega01(p, 7.10);
  return p;
}

double josephson_energy_ghz(const DeviceParams& params) {
  return params.ej_max_ghz * std::abs(std::cos(std::numbers::pi * params.flux));
}

TransitionFrequencies transition_frequencies(const DeviceParams& params) {
  params.validate();
  const double ej = josephson_energy_ghz(params);
  // |cos| at half a flux quantum is ~1e-17, not exactly zero.
  if (ej <= 1e-12 * params.ej_max_ghz) {
    throw DegenerateSpectrumError("E_J(flux) vanishes; transmon spectrum is degenerate");
  }
  const double omega01 = std::sqrt(8.0 * ej * params.ec_ghz) - params.ec_ghz;
  const double alpha = params.alpha_override_ghz.value_or(params.ec_ghz);
  return {omega01, omega01 - alpha};
}

double flux_for_omega01(const DeviceParams& params, double omega01_ghz) {
  const double plasma = omega01_ghz + params.ec_ghz;
  const double ej = plasma * plasma / (8.0 * params.ec_ghz);
  const double ratio = ej / params.ej_max_ghz;
  if (!(ratio > 0.0) || ratio > 1.0) {
    throw DomainError("requested omega01 is outside the flux-tunable range");
  }
  return std::acos(ratio) / std::numbers::pi;
}

DriveTone DriveTone::probe_power(double frequency_ghz, double watts) {
  return DriveTone{frequency_ghz, PowerWatts{watts}, std::nullopt, Transition::kLower};
}

DriveTone DriveTone::probe_rabi(double frequency_ghz, double rabi_mhz) {
  return DriveTone{frequency_ghz, RabiMhz{rabi_mhz}, std::nullopt, Transition::kLower};
}

DriveTone DriveTone::control_power(double frequency_ghz, double watts) {
  return DriveTone{frequency_ghz, PowerWatts{watts}, std::nullopt, Transition::kUpper};
}

DriveTone DriveTone::control_rabi(double frequency_ghz, double rabi_mhz) {
  return DriveTone{frequency_ghz, RabiMhz{rabi_mhz}, std::nullopt, Transition::kUpper};
}

void DriveTone::validate() const {
  if (!std::isfinite(frequency_ghz)) throw ParameterError("tone frequency must be finite");
  if (const auto* p = std::get_if<PowerWatts>(&strength)) {
    if (!(p->watts >= 0.0) || !std::isfinite(p->watts)) throw DomainError("tone power must be >= 0");
  } else if (const auto* a = std::get_if<RabiMhz>(&strength)) {
    if (!(a->mhz >= 0.0) || !std::isfinite(a->mhz)) throw DomainError("tone amplitude must be >= 0");
  }
}

double rabi_from_power(const DeviceParams& params, double watts, Transition target) {
  if (!(watts >= 0.0) || !std::isfinite(watts)) {
    throw DomainError("power must be a finite value >= 0");
  }
  const double dipole = target == Transition::kUpper ? std::numbers::sqrt2 : 1.0;
  return std::visit(
      Overloaded{
          [](std::monostate) -> double {
            throw ConfigError("no power calibration: set coupling_k or cc_over_csigma");
          },
          [&](const DirectCoupling& c) { return dipole * c.k_mhz_per_sqrt_w * std::sqrt(watts); },
          [&](const CircuitCoupling& c) {
            const double ej = josephson_energy_ghz(params);
            const double angular = 2.0 * units::kElementaryCharge / units::kHbar * c.cc_over_csigma *
                                   std::pow(ej / (8.0 * params.ec_ghz), 0.25) *
                                   std::sqrt(watts * params.z0_ohm);
            return dipole * angular / (2.0 * std::numbers::pi) * 1e-6;
          }},
      params.coupling);
}

double rabi_from_power(const DeviceParams& params, const DriveTone& tone) {
  tone.validate();
  if (const auto* a = std::get_if<RabiMhz>(&tone.strength)) return a->mhz;
  return rabi_from_power(params, std::get<PowerWatts>(tone.strength).watts, tone.target);
}

double power_for_rabi(const DeviceParams& params, double rabi_mhz, Transition target) {
  if (!(rabi_mhz >= 0.0)) throw DomainError("Rabi amplitude must be >= 0");
  const double per_sqrt_watt = rabi_from_power(params, 1.0, target);
  const double root = rabi_mhz / per_sqrt_watt;
  return root * root;
}

double photon_number(double watts, double probe_freq_ghz, double gamma10_mhz) {
  if (!(watts >= 0.0)) throw DomainError("power must be >= 0");
  if (!(probe_freq_ghz > 0.0) || !(gamma10_mhz > 0.0)) {
    throw DomainError("probe frequency and gamma10 must be > 0");
  }
  return watts / (units::kPlanck * probe_freq_ghz * 1e9 * gamma10_mhz * 1e6);
}

double power_for_photon_number(double n, double probe_freq_ghz, double gamma10_mhz) {
  if (!(n >= 0.0)) throw DomainError("photon number must be >= 0");
  if (!(probe_freq_ghz > 0.0) || !(gamma10_mhz > 0.0)) {
    throw DomainError("probe frequency and gamma10 must be > 0");
  }
  return n * units::kPlanck * probe_freq_ghz * 1e9 * gamma10_mhz * 1e6;
}

double control_rabi_for_relative_power(double probe_rabi_mhz, double db_above) {
  return std::numbers::sqrt2 * std::pow(10.0, db_above / 20.0) * probe_rabi_mhz;
}

}  // namespace wqed
