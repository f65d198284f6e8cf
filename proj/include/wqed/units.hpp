#pragma once

#include <cmath>
#include <numbers>

// Unit conventions used throughout the toolkit:
//   frequencies   cyclic GHz  (ω/2π)
//   rates, Rabi   cyclic MHz  (Γ/2π, Ω/2π)
//   time          ns
//   power         W (dBm at the edges)
// Angular quantities appear only inside the master-equation engine.
namespace wqed::units {

inline constexpr double kPlanck = 6.62607015e-34;          // J·s
inline constexpr double kHbar = kPlanck / (2.0 * std::numbers::pi);
inline constexpr double kElementaryCharge = 1.602176634e-19;  // C

/// Cyclic MHz -> angular rad/ns.
constexpr double mhz_to_rad_per_ns(double mhz) {
  return 2.0 * std::numbers::pi * mhz * 1e-3;
}

constexpr double rad_per_ns_to_mhz(double w) {
  return w / (2.0 * std::numbers::pi) * 1e3;
}

constexpr double ghz_to_mhz(double ghz) { return ghz * 1e3; }

inline double dbm_to_watts(double dbm) { return 1e-3 * std::pow(10.0, dbm / 10.0); }

inline double watts_to_dbm(double watts) { return 10.0 * std::log10(watts / 1e-3); }

}  // namespace wqed::units
