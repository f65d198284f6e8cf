// Acceptance checks. One PASS/FAIL line per criterion; nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "wqed/device.hpp"
#include "wqed/fitting.hpp"
#include "wqed/lindblad.hpp"
#include "wqed/pulse.hpp"
#include "wqed/router.hpp"
#include "wqed/scattering.hpp"

using namespace wqed;

namespace {

constexpr double kCouplingK = 3.15e9;  // MHz/√W
constexpr double kWeakProbe = 0.1;     // MHz

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

DeviceParams coupled_device() {
  DeviceParams p = reference_device();
  p.coupling = DirectCoupling{kCouplingK};
  return p;
}

std::vector<double> logspace(double a, double b, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = a * std::pow(b / a, double(i) / double(n - 1));
  return v;
}

std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = a + (b - a) * double(i) / double(n - 1);
  return v;
}

ScatterResult engine(const DeviceParams& p, double probe_rabi, double control_rabi = 0.0,
                     double probe_detuning = 0.0) {
  const LadderSystem sys = LadderSystem::from_device(p, probe_rabi, control_rabi, probe_detuning);
  return scattering_from_state(sys, steady_state(build_generator(sys)));
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Photon numbers 0.01..100 per interaction time, expressed as probe power.
std::vector<double> power_grid(const DeviceParams& p, std::size_t n) {
  std::vector<double> w;
  for (double N : logspace(1e-2, 1e2, n)) w.push_back(power_for_photon_number(N, 7.10, p.gamma10_mhz));
  return w;
}

Outcome extinction() {
  const DeviceParams p = reference_device();
  const double t_closed = reflection_two_level(p, kWeakProbe).transmittance();
  const double t_engine = engine(p, kWeakProbe).transmittance();
  const bool ok = std::abs(t_closed - 0.109) <= 0.002 && std::abs(t_engine - 0.109) <= 0.002;
  return {ok, fmt("T_closed=%.5f T_engine=%.5f extinction=%.1f%%", t_closed, t_engine,
                  100.0 * (1.0 - t_engine))};
}

Outcome photon_calibration() {
  const double dbm = watts_to_dbm(power_for_photon_number(1.0, 7.10, 73.0));
  return {std::abs(dbm - (-124.6)) <= 0.1, fmt("P(N=1)=%.3f dBm", dbm)};
}

Outcome oracle_equivalence() {
  const DeviceParams p = coupled_device();
  double worst_power = 0.0;
  for (double w : power_grid(p, 30)) {
    const double rabi = rabi_from_power(p, w);
    worst_power = std::max(worst_power, std::abs(engine(p, rabi).t - reflection_two_level(p, rabi).t));
  }
  double worst_control = 0.0;
  for (double oc : linspace(0.0, 600.0, 30)) {
    worst_control =
        std::max(worst_control, std::abs(engine(p, kWeakProbe, oc).t - eit_transmission(p, oc).t));
  }
  return {worst_power < 1e-3 && worst_control < 1e-2,
          fmt("max|dt| power=%.2e control=%.2e", worst_power, worst_control)};
}

// Weak-probe lineshape of the dressed atom; its poles give the dressed-state splitting.
double pole_splitting_mhz(const DeviceParams& p, double oc) {
  const std::complex<double> g1(p.gamma01_decoherence_mhz(), 0.0), g2(p.gamma20_mhz, 0.0);
  // (γ₁₀ − iΔ)(γ₂₀ − iΔ) + Ω²/4 = 0 in Δ.
  return std::sqrt(-(g1 - g2) * (g1 - g2) + oc * oc).real();
}

Outcome autler_townes() {
  const DeviceParams p = reference_device();
  const TransitionFrequencies f = transition_frequencies(p);
  const auto probe_mhz = linspace(-350.0, 350.0, 201);
  std::vector<double> probe_ghz;
  for (double d : probe_mhz) probe_ghz.push_back(f.omega01_ghz + d * 1e-3);
  const auto controls = linspace(0.0, 600.0, 41);

  std::optional<double> split300, split600;
  for (double oc : controls) {
    const DriveTone pump = DriveTone::control_rabi(f.omega12_ghz, oc);
    const auto t = two_tone_map(p, pump, probe_ghz, kWeakProbe).transmittance();
    const auto minima = find_minima(probe_mhz, t);
    if (minima.size() != 2) continue;
    const double split = minima[1] - minima[0];
    if (std::abs(oc - 300.0) < 1e-9) split300 = split;
    if (std::abs(oc - 600.0) < 1e-9) split600 = split;
  }
  if (!split300) return {false, "no doublet at 300 MHz"};
  const double ratio = *split300 / 300.0;
  return {std::abs(ratio - 1.0) <= 0.05,
          fmt("split(300)=%.1f MHz ratio=%.3f; dressed poles %.1f MHz; split(600)/600=%.3f", *split300,
              ratio, pole_splitting_mhz(p, 300.0), split600 ? *split600 / 600.0 : NAN)};
}

Outcome on_off() {
  const DeviceParams p = reference_device();
  std::optional<double> found;
  double best_t = 0.0, best_r = 1.0;
  for (double oc : linspace(1.0, 3000.0, 3000)) {
    const OnOffRatios o = on_off_ratios(p, oc, 0.05);
    if (o.t_on_off_over_t0 >= 0.80 && o.r_on_off <= 0.15) {
      if (!found) {
        found = oc;
        best_t = o.t_on_off_over_t0;
        best_r = o.r_on_off;
      }
    }
  }
  if (!found) return {false, "no control amplitude satisfies both bounds"};
  return {true, fmt("first Oc=%.0f MHz: T_on/off=%.3f R_on/off=%.3f", *found, best_t, best_r)};
}

Outcome switching() {
  const DeviceParams p = reference_device();
  const double w01 = transition_frequencies(p).omega01_ghz;
  const DriveTone probe = DriveTone::probe_rabi(w01, 0.5);
  const auto grid = linspace(0.0, 80.0, 4001);
  const CirculatorModel circ{0.05};
  const RoutingTrace sq = simulate_routing(p, probe, PulseEnvelope::square(424.4, 10.0, 40.0), circ, grid);
  const RoutingTrace ga = simulate_routing(p, probe, PulseEnvelope::gaussian(424.4, 40.0, 10.0), circ, grid);
  if (!sq.rise_ns || !sq.fall_ns || !sq.plateau_transmittance) return {false, "edges not resolved"};
  const auto in_range = [](double x) { return x >= 1.0 && x <= 5.0; };
  const double ratio = ga.peak_transmittance / *sq.plateau_transmittance;
  const bool ok = in_range(*sq.rise_ns) && in_range(*sq.fall_ns) && std::abs(ratio - 1.0) <= 0.05;
  return {ok, fmt("rise=%.3f ns fall=%.3f ns plateau T=%.4f gaussian peak/plateau=%.3f", *sq.rise_ns,
                  *sq.fall_ns, *sq.plateau_transmittance, ratio)};
}

Outcome mollow() {
  const DeviceParams p = reference_device();
  const double omega = 30.0 * p.gamma10_mhz;
  const EmissionSpectrum s = emission_spectrum(LadderSystem::from_device(p, omega));
  const auto peaks = find_maxima(s.detuning_mhz, s.density, 0.05);
  const double df = s.detuning_mhz[1] - s.detuning_mhz[0];
  double total = 0.0, peak = 0.0, low = std::numeric_limits<double>::infinity();
  for (double d : s.density) {
    total += d * df;
    peak = std::max(peak, d);
    low = std::min(low, d);
  }
  if (peaks.size() != 3) return {false, fmt("%zu peaks", peaks.size())};
  const double lo_err = std::abs(peaks[0] + omega) / omega;
  const double hi_err = std::abs(peaks[2] - omega) / omega;
  const bool ok = lo_err <= 0.02 && hi_err <= 0.02 && low >= -1e-9 * peak && std::abs(total - 1.0) <= 1e-6;
  return {ok, fmt("sidebands %.1f/%.1f MHz (Op=%.0f) min/peak=%.1e norm-1=%.1e", peaks[0], peaks[2], omega,
                  low / peak, total - 1.0)};
}

RouterNetwork three_stages(const DeviceParams& base, double leakage) {
  std::vector<RouterStage> stages;
  const double alphas[] = {0.72, 0.80, 0.88};
  for (int k = 0; k < 3; ++k) {
    RouterStage st;
    st.label = std::string(1, static_cast<char>('A' + k));
    st.params = base;
    st.params.alpha_override_ghz = alphas[k];
    st.circulator.leakage = leakage;
    stages.push_back(st);
  }
  return RouterNetwork(stages);
}

Outcome routing_table() {
  const RoutingTableReport real = routing_table_verify(three_stages(reference_device(), 0.05), 2.0);
  DeviceParams ideal = reference_device();
  ideal.gamma_phi_mhz = 0.0;
  ideal.gamma20_mhz = ideal.gamma10_mhz;
  const RoutingTableReport clean = routing_table_verify(three_stages(ideal, 0.0), 2.0);

  std::string detail;
  bool capped = true;
  for (const auto& row : real.rows) {
    if (!row.intended_port) continue;
    detail += row.contrast_capped ? fmt("port%zu:capped ", *row.intended_port)
                                  : fmt("port%zu:%.1f ", *row.intended_port, row.contrast);
  }
  for (const auto& row : clean.rows) {
    if (row.intended_port) capped = capped && row.contrast_capped && row.pass;
  }
  detail += capped ? "ideal=capped" : "ideal=not capped";
  return {real.all_pass && capped, detail};
}

Outcome fit_recovery() {
  const DeviceParams p = coupled_device();
  const std::vector<double> truth{p.gamma10_mhz, p.gamma_phi_mhz, kCouplingK};
  const auto powers = power_grid(p, 30);
  std::vector<double> g10, gphi;
  for (std::uint64_t i = 0; i < 100; ++i) {
    const SweepDataset d = synthesize(FitModel::kPowerSweep, truth, powers, 0.01, trial_seed(2024, i));
    PowerSweepGuess guess{0.8 * truth[0], 1.3 * truth[1], kCouplingK, true};
    const FitReport r = fit_power_sweep(d, guess);
    g10.push_back(r.value("gamma10_mhz"));
    gphi.push_back(r.value("gamma_phi_mhz"));
  }
  const double m10 = median(g10), mphi = median(gphi);

  const OnOffFixed fixed{p.gamma10_mhz, p.gamma01_decoherence_mhz()};
  const std::vector<double> onoff_truth{p.gamma20_mhz, 0.05};
  const auto controls = linspace(20.0, 1200.0, 30);
  std::vector<double> g20, rb;
  for (std::uint64_t i = 0; i < 100; ++i) {
    const SweepDataset d = synthesize(FitModel::kOnOff, onoff_truth, controls, 0.01, trial_seed(7, i), fixed);
    const FitReport r = fit_onoff_curve(d, fixed, OnOffGuess{100.0, 0.1});
    g20.push_back(r.value("gamma20_mhz"));
    rb.push_back(r.value("r_background"));
  }
  const double m20 = median(g20), mrb = median(rb);
  const bool ok = std::abs(m10 / truth[0] - 1) <= 0.05 && std::abs(mphi / truth[1] - 1) <= 0.05 &&
                  std::abs(m20 / onoff_truth[0] - 1) <= 0.10 && std::abs(mrb - onoff_truth[1]) <= 0.02;
  return {ok, fmt("median G10=%.2f Gphi=%.2f g20=%.1f Rb=%.4f", m10, mphi, m20, mrb)};
}

Outcome invariants() {
  const std::string cmd = std::string(WQED_UNIT_TESTS_PATH) + " --gtest_filter=Property* --gtest_brief=1 > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return {rc == 0, fmt("property suite exit status %d", rc)};
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "extinction", 1.0, extinction},
      {2, "photon-number calibration", 1.0, photon_calibration},
      {3, "oracle equivalence", 30.0, oracle_equivalence},
      {4, "autler-townes splitting", 120.0, autler_townes},
      {5, "on/off ratio", 1.0, on_off},
      {6, "switching dynamics", 10.0, switching},
      {7, "mollow triplet", 60.0, mollow},
      {8, "routing table", 1.0, routing_table},
      {9, "fit recovery", 60.0, fit_recovery},
      {10, "invariant suites", 300.0, invariants},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > c.budget_s) {
      o.pass = false;
      o.detail += fmt(" [over %.0f s budget]", c.budget_s);
    }
    failures += o.pass ? 0 : 1;
    std::printf("%-4s %2d %-27s %7.3fs  %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, secs, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", int(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
