#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "wqed/device.hpp"
#include "wqed/errors.hpp"

using namespace wqed;

namespace {

DeviceParams direct(double k) {
  DeviceParams p = reference_device();
  p.coupling = DirectCoupling{k};
  return p;
}

}  // namespace

TEST(TransitionFrequencies, SweetSpotValue) {
  DeviceParams p;
  EXPECT_NEAR(transition_frequencies(p).omega01_ghz, 7.152351, 1e-6);
  EXPECT_NEAR(transition_frequencies(p).omega12_ghz, 7.152351 - 0.59, 1e-6);
}

TEST(TransitionFrequencies, MeasuredAnharmonicityOverride) {
  const DeviceParams p = reference_device();
  const auto f = transition_frequencies(p);
  EXPECT_NEAR(f.omega01_ghz, 7.10, 1e-9);
  EXPECT_NEAR(f.omega12_ghz, 6.38, 1e-9);
  EXPECT_NEAR(p.flux, 0.0523191, 1e-6);
}

TEST(TransitionFrequencies, HalfFluxQuantumIsDegenerate) {
  DeviceParams p;
  p.flux = 0.5;
  EXPECT_THROW(transition_frequencies(p), DegenerateSpectrumError);
}

TEST(TransitionFrequencies, FluxInverse) {
  DeviceParams p;
  p.flux = flux_for_omega01(p, 6.5);
  EXPECT_NEAR(transition_frequencies(p).omega01_ghz, 6.5, 1e-10);
}

TEST(DeviceParams, DerivedRates) {
  const DeviceParams p;
  EXPECT_DOUBLE_EQ(p.gamma01_decoherence_mhz(), 54.5);
  EXPECT_DOUBLE_EQ(p.gamma21_mhz(), 146.0);
  EXPECT_DOUBLE_EQ(p.gamma_phi2_mhz(), 72.0);
}

TEST(DeviceParams, RejectsInvalid) {
  DeviceParams p;
  p.gamma10_mhz = 0.0;
  EXPECT_THROW(p.validate(), ParameterError);
  p = DeviceParams{};
  p.gamma20_mhz = 60.0;  // below Γ₁₀: negative |2⟩ dephasing
  EXPECT_THROW(p.validate(), ParameterError);
  p = DeviceParams{};
  p.ec_ghz = -1.0;
  EXPECT_THROW(p.validate(), ParameterError);
  p = DeviceParams{};
  p.flux = 17.3;
  EXPECT_NO_THROW(p.validate());
}

TEST(RabiFromPower, CircuitModeMatchesHandEvaluation) {
  DeviceParams p;
  p.coupling = CircuitCoupling{0.1};
  EXPECT_NEAR(rabi_from_power(p, 1e-15), 13.84952, 1e-4);
}

TEST(RabiFromPower, FourTimesPowerDoublesRabi) {
  const DeviceParams p = direct(3.15e9);
  const double w = dbm_to_watts(-124.0);
  EXPECT_NEAR(rabi_from_power(p, 4.0 * w) / rabi_from_power(p, w), 2.0, 1e-12);
  const double plus6 = rabi_from_power(p, dbm_to_watts(-118.0)) / rabi_from_power(p, w);
  EXPECT_NEAR(plus6, 2.0, 0.01);
}

TEST(RabiFromPower, ControlCarriesSqrtTwo) {
  const DeviceParams p = direct(1e9);
  EXPECT_NEAR(rabi_from_power(p, 1e-16, Transition::kUpper) / rabi_from_power(p, 1e-16), std::numbers::sqrt2,
              1e-14);
}

TEST(RabiFromPower, Errors) {
  DeviceParams none;
  EXPECT_THROW(rabi_from_power(none, 1e-16), ConfigError);
  EXPECT_THROW(rabi_from_power(direct(1e9), -1.0), DomainError);
}

TEST(RabiFromPower, ToneResolution) {
  const DeviceParams p = direct(2e9);
  EXPECT_DOUBLE_EQ(rabi_from_power(p, DriveTone::probe_rabi(7.1, 12.5)), 12.5);
  EXPECT_DOUBLE_EQ(rabi_from_power(p, DriveTone::control_power(6.38, 1e-16)),
                   rabi_from_power(p, 1e-16, Transition::kUpper));
  EXPECT_NEAR(power_for_rabi(p, rabi_from_power(p, 3e-17)), 3e-17, 1e-29);
}

TEST(PhotonNumber, OnePhotonPerInteractionTime) {
  const double w = power_for_photon_number(1.0, 7.1, 73.0);
  EXPECT_NEAR(w, 3.434292e-16, 1e-21);
  EXPECT_NEAR(watts_to_dbm(w), -124.6416, 1e-4);
  EXPECT_NEAR(photon_number(dbm_to_watts(-124.6), 7.1, 73.0), 1.00, 0.01);
  EXPECT_EQ(photon_number(0.0, 7.1, 73.0), 0.0);
  EXPECT_NEAR(photon_number(power_for_photon_number(0.37, 7.1, 73.0), 7.1, 73.0), 0.37, 1e-12);
  EXPECT_THROW(photon_number(-1.0, 7.1, 73.0), DomainError);
}

TEST(Dbm, Conversions) {
  EXPECT_DOUBLE_EQ(dbm_to_watts(0.0), 1e-3);
  EXPECT_NEAR(dbm_to_watts(-124.0) / 3.98107e-16, 1.0, 1e-5);
  for (double x : {-150.0, -124.6, -3.0, 0.0, 27.5}) EXPECT_NEAR(watts_to_dbm(dbm_to_watts(x)), x, 1e-12);
}

TEST(DriveTone, Validation) {
  EXPECT_THROW(DriveTone::probe_power(7.1, -1.0).validate(), DomainError);
  EXPECT_NO_THROW(DriveTone::probe_power(7.1, 0.0).validate());
  EXPECT_EQ(DriveTone::control_rabi(6.38, 10).target, Transition::kUpper);
  EXPECT_EQ(DriveTone::probe_rabi(7.1, 10).target, Transition::kLower);
}

TEST(DriveTone, ThirtyDbControlDefault) {
  EXPECT_NEAR(control_rabi_for_relative_power(1.0), std::numbers::sqrt2 * std::sqrt(1000.0), 1e-12);
}
