#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wqed/device.hpp"
#include "wqed/pulse.hpp"

namespace wqed {

/// Ideal circulator apart from a scalar power leakage R_b ∈ [0, 1).
struct CirculatorModel {
  double leakage = 0.0;
  void validate() const;
};

enum class ControlPort { kOpposite, kSame };

struct RoutingOptions {
  /// Which side the control enters from. The single-mode model has no
  /// propagation direction, so both choices give identical traces.
  ControlPort control_port = ControlPort::kOpposite;
};

/// Time series of one routing run. Fractions are relative to the incident
/// probe power; port1 + port2 + lost = 1 at every sample. `lost` is
/// incoherent emission and turns negative while the atom releases stored
/// excitation after a sharp control edge.
struct RoutingTrace {
  std::vector<double> t_ns;
  std::vector<double> control_rabi_mhz;
  std::vector<double> transmittance;
  std::vector<double> reflectance;
  std::vector<double> port1_frac;
  std::vector<double> port2_frac;
  std::vector<double> lost_frac;
  std::vector<double> r_on_off;
  std::vector<double> t_on_off;

  std::optional<double> input_power_w;
  double probe_rabi_mhz = 0.0;
  double off_transmittance = 0.0;
  double off_reflectance = 0.0;
  double peak_transmittance = 0.0;
  /// Square pulses: T at the last sample before the falling edge.
  std::optional<double> plateau_transmittance;
  /// 10–90 % transition times of T(t) (square pulses only).
  std::optional<double> rise_ns;
  std::optional<double> fall_ns;
};

/// Drives the ladder with a weak probe and a time-dependent resonant control
/// on 1-2, starting from the control-off steady state. Needs at least eight
/// grid points inside the pulse window.
RoutingTrace simulate_routing(const DeviceParams& params, const DriveTone& probe,
                              const PulseEnvelope& control, const CirculatorModel& circulator,
                              std::span<const double> t_grid, const RoutingOptions& options = {});

/// 10–90 % rise and fall of a sampled step response around [on, off).
struct EdgeTimes {
  std::optional<double> rise_ns;
  std::optional<double> fall_ns;
};
EdgeTimes transition_times(std::span<const double> t_ns, std::span<const double> y, double low,
                           double high, double on_ns, double off_ns);

struct RouterStage {
  std::string label;
  DeviceParams params;
  CirculatorModel circulator;
  /// Control Rabi amplitude on 1-2 when the stage's tone is on; nullopt is
  /// the saturating limit Ω_c → ∞.
  std::optional<double> control_rabi_mhz;

  double omega01_ghz() const;
  double omega12_ghz() const;
};

/// Atoms in series, each followed by a circulator. Stage k reflects into
/// port k; whatever passes all stages leaves through port N + 1.
class RouterNetwork {
 public:
  explicit RouterNetwork(std::vector<RouterStage> stages, double omega01_tolerance_ghz = 1e-3,
                         double control_match_tolerance_ghz = 1e-3);

  const std::vector<RouterStage>& stages() const { return stages_; }
  std::size_t port_count() const { return stages_.size() + 1; }

  /// Index of the stage whose ω₁₂ matches `frequency_ghz`.
  std::size_t stage_for_control(double frequency_ghz) const;

 private:
  std::vector<RouterStage> stages_;
  double control_match_tolerance_ghz_;
};

struct NetworkOutcome {
  std::vector<double> port_fractions;  // ports 1..N+1
  double lost_fraction = 0.0;
  std::vector<double> port_powers_w;
};

/// Incoherent power cascade. Each stage's reflected power is split between
/// its own port (1 − R_b) and the forward path (R_b).
NetworkOutcome route_network(const RouterNetwork& net, double probe_power_w,
                             std::span<const double> control_freqs_ghz);

inline constexpr double kContrastCap = 1e12;

struct RoutingTableRow {
  std::vector<std::string> controls;
  std::vector<double> port_fractions;
  std::size_t dominant_port = 0;  // 1-based
  double contrast = 0.0;          // capped at kContrastCap
  bool contrast_capped = false;
  std::optional<std::size_t> intended_port;  // set for scored rows
  bool pass = false;
};

struct RoutingTableReport {
  std::vector<RoutingTableRow> rows;
  double contrast_min = 0.0;
  bool all_pass = false;
};

/// Evaluates every control subset. The rows {}, {A}, {A,B}, ... are scored
/// against ports 1, 2, 3, ...; other subsets are reported only.
RoutingTableReport routing_table_verify(const RouterNetwork& net, double contrast_min);

/// Weak-probe transmittance of one atom when a control tone is detuned from
/// its ω₁₂ by `control_detuning_mhz` (cross-talk from a neighbouring stage's
/// tone). Evaluated with the master-equation engine.
double crosstalk_transmittance(const DeviceParams& params, double control_rabi_mhz,
                               double control_detuning_mhz, double probe_rabi_mhz = 0.1);

}  // namespace wqed
