#include "wqed/router.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <string>

#include "wqed/errors.hpp"
#include "wqed/lindblad.hpp"
#include "wqed/scattering.hpp"

namespace wqed {

void CirculatorModel::validate() const {
  if (!(leakage >= 0.0) || !(leakage < 1.0)) {
    throw ParameterError("circulator leakage must lie in [0, 1)");
  }
}

namespace {

// First time after `from` where y crosses `level` in the given direction,
// linearly interpolated between samples.
std::optional<double> crossing(std::span<const double> t, std::span<const double> y, double level,
                               double from, bool upward) {
  const auto reached = [&](double v) { return upward ? v >= level : v <= level; };
  std::size_t i = 0;
  while (i < t.size() && t[i] < from) ++i;
  for (const std::size_t first = i; i < t.size(); ++i) {
    if (!reached(y[i])) continue;
    if (i == first) return t[i];
    return t[i - 1] + (level - y[i - 1]) * (t[i] - t[i - 1]) / (y[i] - y[i - 1]);
  }
  return std::nullopt;
}

}  // namespace

EdgeTimes transition_times(std::span<const double> t_ns, std::span<const double> y, double low,
                           double high, double on_ns, double off_ns) {
  EdgeTimes edges;
  const double span = high - low;
  if (!(std::abs(span) > 0.0)) return edges;
  const bool up = span > 0.0;
  const double l10 = low + 0.1 * span;
  const double l90 = low + 0.9 * span;
  if (auto a = crossing(t_ns, y, l10, on_ns, up)) {
    if (auto b = crossing(t_ns, y, l90, *a, up)) edges.rise_ns = *b - *a;
  }
  if (auto a = crossing(t_ns, y, l90, off_ns, !up)) {
    if (auto b = crossing(t_ns, y, l10, *a, !up)) edges.fall_ns = *b - *a;
  }
  return edges;
}

RoutingTrace simulate_routing(const DeviceParams& params, const DriveTone& probe,
                              const PulseEnvelope& control, const CirculatorModel& circulator,
                              std::span<const double> t_grid, const RoutingOptions& /*options*/) {
  params.validate();
  circulator.validate();
  std::size_t inside = 0;
  for (double t : t_grid) {
    if (t >= control.window_begin() && t <= control.window_end()) ++inside;
  }
  if (inside < 8) {
    throw ResolutionError("time grid resolves the control pulse with " + std::to_string(inside) +
                          " points; at least 8 are required");
  }

  const TransitionFrequencies f = transition_frequencies(params);
  RoutingTrace trace;
  trace.probe_rabi_mhz = rabi_from_power(params, probe);
  if (!(trace.probe_rabi_mhz > 0.0)) throw UndefinedScatteringError("probe amplitude is zero");
  if (const auto* p = std::get_if<PowerWatts>(&probe.strength)) {
    trace.input_power_w = p->watts;
  } else if (!std::holds_alternative<std::monostate>(params.coupling)) {
    trace.input_power_w = power_for_rabi(params, trace.probe_rabi_mhz);
  }

  const LadderSystem sys = LadderSystem::from_device(
      params, trace.probe_rabi_mhz, 0.0, units::ghz_to_mhz(probe.frequency_ghz - f.omega01_ghz));
  TimeDependentGenerator gen{build_generator(sys),
                             {{Transition::kUpper, [control](double t) { return control(t); }}},
                             control.breakpoints()};

  const double t0 = t_grid.empty() ? 0.0 : t_grid.front();
  LadderSystem start = sys;
  start.control_rabi_mhz = control(t0);
  const DensityMatrix3 rho0 = steady_state(build_generator(start));
  const std::vector<DensityMatrix3> states = evolve(gen, rho0, t_grid);

  const ScatterResult off = scattering_from_state(sys, steady_state(build_generator(sys)));
  trace.off_transmittance = off.transmittance();
  trace.off_reflectance = off.reflectance();
  const double rb = circulator.leakage;

  const std::size_t n = t_grid.size();
  trace.t_ns.assign(t_grid.begin(), t_grid.end());
  for (auto* v : {&trace.control_rabi_mhz, &trace.transmittance, &trace.reflectance, &trace.port1_frac,
                  &trace.port2_frac, &trace.lost_frac, &trace.r_on_off, &trace.t_on_off}) {
    v->resize(n);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const ScatterResult s = scattering_from_state(sys, states[i]);
    const double tr = s.transmittance();
    const double rf = s.reflectance();
    trace.control_rabi_mhz[i] = control(t_grid[i]);
    trace.transmittance[i] = tr;
    trace.reflectance[i] = rf;
    trace.port1_frac[i] = rb + (1.0 - rb) * rf;
    trace.port2_frac[i] = (1.0 - rb) * tr;
    trace.lost_frac[i] = 1.0 - trace.port1_frac[i] - trace.port2_frac[i];
    trace.r_on_off[i] = (rf + rb) / (trace.off_reflectance + rb);
    trace.t_on_off[i] = tr;
  }
  trace.peak_transmittance =
      n == 0 ? 0.0 : *std::max_element(trace.transmittance.begin(), trace.transmittance.end());

  if (control.shape() == PulseShape::kSquare) {
    const double off_edge = control.window_end();
    for (std::size_t i = 0; i < n; ++i) {
      if (t_grid[i] < off_edge && t_grid[i] >= control.window_begin()) {
        trace.plateau_transmittance = trace.transmittance[i];
      }
    }
    if (trace.plateau_transmittance) {
      const EdgeTimes e = transition_times(trace.t_ns, trace.transmittance, trace.off_transmittance,
                                           *trace.plateau_transmittance, control.window_begin(), off_edge);
      trace.rise_ns = e.rise_ns;
      trace.fall_ns = e.fall_ns;
    }
  }
  return trace;
}

// ---------------------------------------------------------------------------
// Network

double RouterStage::omega01_ghz() const { return transition_frequencies(params).omega01_ghz; }
double RouterStage::omega12_ghz() const { return transition_frequencies(params).omega12_ghz; }

RouterNetwork::RouterNetwork(std::vector<RouterStage> stages, double omega01_tolerance_ghz,
                             double control_match_tolerance_ghz)
    : stages_(std::move(stages)), control_match_tolerance_ghz_(control_match_tolerance_ghz) {
  if (stages_.empty()) throw ParameterError("router network needs at least one stage");
  for (const auto& s : stages_) {
    s.params.validate();
    s.circulator.validate();
    if (s.control_rabi_mhz && !(*s.control_rabi_mhz >= 0.0)) {
      throw ParameterError("stage " + s.label + ": control amplitude must be >= 0");
    }
  }
  const double w01 = stages_.front().omega01_ghz();
  for (std::size_t i = 0; i < stages_.size(); ++i) {
    if (std::abs(stages_[i].omega01_ghz() - w01) > omega01_tolerance_ghz) {
      throw ParameterError("stage " + stages_[i].label + ": omega01 differs from stage " +
                           stages_.front().label);
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (std::abs(stages_[i].omega12_ghz() - stages_[j].omega12_ghz()) <= control_match_tolerance_ghz_) {
        throw ParameterError("stages " + stages_[j].label + " and " + stages_[i].label +
                             " share the same omega12");
      }
    }
  }
}

std::size_t RouterNetwork::stage_for_control(double frequency_ghz) const {
  for (std::size_t i = 0; i < stages_.size(); ++i) {
    if (std::abs(stages_[i].omega12_ghz() - frequency_ghz) <= control_match_tolerance_ghz_) return i;
  }
  throw UnknownControlError("control tone at " + std::to_string(frequency_ghz) +
                            " GHz matches no stage omega12");
}

NetworkOutcome route_network(const RouterNetwork& net, double probe_power_w,
                             std::span<const double> control_freqs_ghz) {
  if (!(probe_power_w >= 0.0)) throw DomainError("probe power must be >= 0");
  const auto& stages = net.stages();
  std::vector<bool> on(stages.size(), false);
  for (double f : control_freqs_ghz) on[net.stage_for_control(f)] = true;

  NetworkOutcome out;
  out.port_fractions.assign(net.port_count(), 0.0);
  double incoming = 1.0;
  for (std::size_t k = 0; k < stages.size(); ++k) {
    const RouterStage& stage = stages[k];
    const double rabi = on[k] ? stage.control_rabi_mhz.value_or(std::numeric_limits<double>::infinity())
                              : 0.0;
    const ScatterResult s = eit_transmission(stage.params, rabi);
    const double rb = stage.circulator.leakage;
    out.port_fractions[k] = incoming * (1.0 - rb) * s.reflectance();
    out.lost_fraction += incoming * s.incoherent();
    incoming *= s.transmittance() + rb * s.reflectance();
  }
  out.port_fractions.back() = incoming;
  for (double frac : out.port_fractions) out.port_powers_w.push_back(frac * probe_power_w);
  return out;
}

RoutingTableReport routing_table_verify(const RouterNetwork& net, double contrast_min) {
  const auto& stages = net.stages();
  const std::size_t n = stages.size();
  RoutingTableReport report;
  report.contrast_min = contrast_min;
  report.all_pass = true;
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    RoutingTableRow row;
    std::vector<double> freqs;
    for (std::size_t k = 0; k < n; ++k) {
      if (mask & (std::size_t{1} << k)) {
        row.controls.push_back(stages[k].label);
        freqs.push_back(stages[k].omega12_ghz());
      }
    }
    const NetworkOutcome outcome = route_network(net, 1.0, freqs);
    row.port_fractions = outcome.port_fractions;
    const auto best = std::max_element(row.port_fractions.begin(), row.port_fractions.end());
    row.dominant_port = static_cast<std::size_t>(best - row.port_fractions.begin()) + 1;
    double runner_up = 0.0;
    for (std::size_t p = 0; p < row.port_fractions.size(); ++p) {
      if (p + 1 != row.dominant_port) runner_up = std::max(runner_up, row.port_fractions[p]);
    }
    const double raw = runner_up > 0.0 ? *best / runner_up : std::numeric_limits<double>::infinity();
    row.contrast_capped = !(raw < kContrastCap);
    row.contrast = std::min(raw, kContrastCap);

    // Prefix subsets {}, {A}, {A,B}, ... are the table rows.
    const bool prefix = (mask & (mask + 1)) == 0;
    if (prefix) {
      row.intended_port = static_cast<std::size_t>(std::popcount(mask)) + 1;
      row.pass = row.dominant_port == *row.intended_port && row.contrast >= contrast_min;
      report.all_pass = report.all_pass && row.pass;
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

double crosstalk_transmittance(const DeviceParams& params, double control_rabi_mhz,
                               double control_detuning_mhz, double probe_rabi_mhz) {
  const LadderSystem sys =
      LadderSystem::from_device(params, probe_rabi_mhz, control_rabi_mhz, 0.0, control_detuning_mhz);
  return scattering_from_state(sys, steady_state(build_generator(sys))).transmittance();
}

}  // namespace wqed
