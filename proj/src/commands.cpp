#include "wqed/commands.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <ostream>
#include <variant>

#include "wqed/device.hpp"
#include "wqed/errors.hpp"
#include "wqed/fitting.hpp"
#include "wqed/lindblad.hpp"
#include "wqed/parallel.hpp"
#include "wqed/router.hpp"
#include "wqed/scattering.hpp"
#include "wqed/scenario.hpp"
#include "wqed/units.hpp"

namespace wqed {

namespace {

std::string num(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc{} ? std::string(buf, end) : std::string("nan");
}

bool has_coupling(const DeviceParams& p) { return !std::holds_alternative<std::monostate>(p.coupling); }

// A drive amplitude given either directly or through a power calibration.
struct DrivePoint {
  double rabi_mhz = 0.0;
  std::optional<double> power_w;
};

// Resolves `<prefix>rabi_mhz`, `<prefix>power_dbm`, `<prefix>power_w` and,
// for the probe, `photon_number`.
std::optional<DrivePoint> drive_from_variable(const DeviceParams& params, std::string_view name,
                                              double value, std::string_view prefix, Transition line,
                                              double probe_freq_ghz) {
  if (name.substr(0, prefix.size()) != prefix) return std::nullopt;
  const std::string_view rest = name.substr(prefix.size());
  DrivePoint d;
  if (rest == "rabi_mhz") {
    d.rabi_mhz = value;
    if (has_coupling(params)) d.power_w = power_for_rabi(params, value, line);
    return d;
  }
  if (rest == "power_dbm") {
    d.power_w = dbm_to_watts(value);
  } else if (rest == "power_w") {
    d.power_w = value;
  } else if (rest == "photon_number" && line == Transition::kLower) {
    d.power_w = power_for_photon_number(value, probe_freq_ghz, params.gamma10_mhz);
  } else {
    return std::nullopt;
  }
  d.rabi_mhz = rabi_from_power(params, *d.power_w, line);
  return d;
}

// First of the drive keys present in [section], or `fallback_rabi`.
DrivePoint read_drive(const ConfigDocument& doc, const std::string& section, const DeviceParams& params,
                      std::string_view prefix, Transition line, double probe_freq_ghz,
                      std::optional<double> fallback_rabi) {
  for (const char* rest : {"rabi_mhz", "power_dbm", "power_w", "photon_number"}) {
    const std::string key = std::string(prefix) + rest;
    if (auto v = get_double(doc, section, key)) {
      if (auto d = drive_from_variable(params, key, *v, prefix, line, probe_freq_ghz)) return *d;
    }
  }
  if (!fallback_rabi) {
    throw ConfigError("[" + section + "] needs one of " + std::string(prefix) + "rabi_mhz, " +
                      std::string(prefix) + "power_dbm or " + std::string(prefix) + "power_w");
  }
  return DrivePoint{*fallback_rabi, std::nullopt};
}

double probe_frequency(const ConfigDocument& doc, const DeviceParams& params) {
  if (auto f = get_double(doc, "drive", "probe_frequency_ghz")) return *f;
  return transition_frequencies(params).omega01_ghz;
}

[[noreturn]] void bad_variable(const SweepAxis& axis, const std::string& section, std::string_view allowed) {
  throw ConfigError("[" + section + "] variable '" + axis.variable + "' is not one of " + std::string(allowed));
}

constexpr double kWeakProbeMhz = 0.1;

CommandOutput extinction_sweep(const ConfigDocument& doc, const RunContext& ctx) {
  const DeviceParams params = parse_device(doc);
  const SweepAxis axis = parse_axis(doc, "sweep");
  const double freq = probe_frequency(doc, params);
  const std::vector<double> xs = axis.values();
  const auto point = [&](double x) {
    auto d = drive_from_variable(params, axis.variable, x, "", Transition::kLower, freq);
    if (!d) d = drive_from_variable(params, axis.variable, x, "probe_", Transition::kLower, freq);
    if (!d) bad_variable(axis, "sweep", "photon_number, power_dbm, power_w, probe_rabi_mhz");
    if (!d->power_w) throw ConfigError("[device] extinction sweeps need a coupling calibration");
    return *d;
  };
  point(xs.front());  // surface config errors before spawning workers

  struct Row {
    DrivePoint drive;
    ScatterResult analytic, engine;
  };
  const auto rows = parallel_map(xs.size(), ctx.threads, [&](std::size_t i) {
    Row row;
    row.drive = point(xs[i]);
    row.analytic = reflection_two_level(params, row.drive.rabi_mhz);
    const LadderSystem sys = LadderSystem::from_device(params, row.drive.rabi_mhz);
    row.engine = scattering_from_state(sys, steady_state(build_generator(sys)));
    return row;
  });

  CommandOutput out;
  out.table.columns = {"power_dbm", "photon_number", "T_analytic", "T_engine", "R_analytic", "R_engine",
                       "power_w", "probe_rabi_mhz", "t_engine_re", "t_engine_im", "r_engine_re",
                       "r_engine_im"};
  for (const Row& r : rows) {
    const double p = *r.drive.power_w;
    out.table.add_row({watts_to_dbm(p), photon_number(p, freq, params.gamma10_mhz), r.analytic.transmittance(),
                       r.engine.transmittance(), r.analytic.reflectance(), r.engine.reflectance(), p,
                       r.drive.rabi_mhz, r.engine.t.real(), r.engine.t.imag(), r.engine.r.real(),
                       r.engine.r.imag()});
  }
  out.x_column = axis.variable == "photon_number" ? "photon_number" : "power_dbm";
  out.log_x = axis.variable == "photon_number";
  out.plot_columns = {"T_analytic", "T_engine", "R_analytic", "R_engine"};
  out.summary = {{"probe_frequency_ghz", num(freq)}, {"points", std::to_string(xs.size())}};
  return out;
}

CommandOutput two_tone(const ConfigDocument& doc, const RunContext& ctx) {
  const DeviceParams params = parse_device(doc);
  const TransitionFrequencies f = transition_frequencies(params);
  const std::string line_name = get_string(doc, "drive", "pump_line").value_or("upper");
  if (line_name != "upper" && line_name != "lower") throw ConfigError("[drive] pump_line must be upper or lower");
  const bool pump_upper = line_name == "upper";
  const double pump_base = pump_upper ? f.omega12_ghz : f.omega01_ghz;
  const double probe_base = pump_upper ? f.omega01_ghz : f.omega12_ghz;
  const Transition pump_line = pump_upper ? Transition::kUpper : Transition::kLower;
  const double probe_rabi = get_double(doc, "drive", "probe_rabi_mhz").value_or(kWeakProbeMhz);

  double pump_freq = get_double(doc, "drive", "pump_frequency_ghz")
                         .value_or(pump_base + get_double(doc, "drive", "pump_detuning_mhz").value_or(0.0) * 1e-3);
  std::optional<SweepAxis> outer;
  if (doc.has_section("sweep2")) outer = parse_axis(doc, "sweep2");
  const bool outer_strength =
      outer && outer->variable != "pump_frequency_ghz" && outer->variable != "pump_detuning_mhz";
  std::optional<DrivePoint> pump_drive;
  if (!outer_strength) pump_drive = read_drive(doc, "drive", params, "pump_", pump_line, f.omega01_ghz, std::nullopt);

  const SweepAxis axis = parse_axis(doc, "sweep");
  std::vector<double> probe_freqs = axis.values();
  if (axis.variable == "probe_detuning_mhz") {
    for (double& x : probe_freqs) x = probe_base + x * 1e-3;
  } else if (axis.variable != "probe_frequency_ghz") {
    bad_variable(axis, "sweep", "probe_frequency_ghz, probe_detuning_mhz");
  }

  const std::vector<double> outer_values = outer ? outer->values() : std::vector<double>{0.0};

  CommandOutput out;
  if (outer) out.table.columns.push_back(outer->variable);
  for (const char* c : {"probe_frequency_ghz", "probe_detuning_mhz", "pump_frequency_ghz", "pump_rabi_mhz", "T",
                        "R", "t_re", "t_im"}) {
    out.table.columns.emplace_back(c);
  }
  for (double v : outer_values) {
    if (outer) {
      if (outer->variable == "pump_frequency_ghz") {
        pump_freq = v;
      } else if (outer->variable == "pump_detuning_mhz") {
        pump_freq = pump_base + v * 1e-3;
      } else if (auto d = drive_from_variable(params, outer->variable, v, "pump_", pump_line, f.omega01_ghz)) {
        pump_drive = *d;
      } else {
        bad_variable(*outer, "sweep2", "pump_frequency_ghz, pump_detuning_mhz, pump_rabi_mhz, pump_power_dbm, pump_power_w");
      }
    }
    DriveTone pump = DriveTone::control_rabi(pump_freq, pump_drive->rabi_mhz);
    pump.target = pump_line;
    const TwoToneMap map = two_tone_map(params, pump, probe_freqs, probe_rabi, ctx.threads);
    for (std::size_t i = 0; i < probe_freqs.size(); ++i) {
      std::vector<Cell> row;
      if (outer) row.emplace_back(v);
      const ScatterResult& s = map.probe[i];
      for (double c : {probe_freqs[i], (probe_freqs[i] - probe_base) * 1e3, pump_freq, pump_drive->rabi_mhz,
                       s.transmittance(), s.reflectance(), s.t.real(), s.t.imag()}) {
        row.emplace_back(c);
      }
      out.table.add_row(std::move(row));
    }
  }
  out.x_column = "probe_detuning_mhz";
  out.plot_columns = {"T"};
  out.summary = {{"omega01_ghz", num(f.omega01_ghz)}, {"omega12_ghz", num(f.omega12_ghz)}};
  return out;
}

DrivePoint control_point(const DeviceParams& params, const SweepAxis& axis, double x, double probe_rabi) {
  if (axis.variable == "control_relative_db") {
    return DrivePoint{control_rabi_for_relative_power(probe_rabi, x), std::nullopt};
  }
  auto d = drive_from_variable(params, axis.variable, x, "control_", Transition::kUpper, 0.0);
  if (!d) bad_variable(axis, "sweep", "control_rabi_mhz, control_power_dbm, control_power_w, control_relative_db");
  return *d;
}

void add_power_columns(Table& t, bool enabled) {
  if (enabled) {
    t.columns.emplace_back("control_power_w");
    t.columns.emplace_back("control_power_dbm");
  }
}

void append_power(std::vector<Cell>& row, const DeviceParams& params, double rabi, bool enabled) {
  if (!enabled) return;
  const double p = power_for_rabi(params, rabi, Transition::kUpper);
  row.emplace_back(p);
  row.emplace_back(p > 0.0 ? watts_to_dbm(p) : -400.0);
}

CommandOutput eit_sweep(const ConfigDocument& doc, const RunContext& ctx) {
  const DeviceParams params = parse_device(doc);
  const SweepAxis axis = parse_axis(doc, "sweep");
  const double freq = probe_frequency(doc, params);
  const DrivePoint probe = read_drive(doc, "drive", params, "probe_", Transition::kLower, freq, kWeakProbeMhz);
  const std::vector<double> xs = axis.values();
  control_point(params, axis, xs.front(), probe.rabi_mhz);

  struct Row {
    double rabi;
    ScatterResult analytic, engine;
  };
  const auto rows = parallel_map(xs.size(), ctx.threads, [&](std::size_t i) {
    Row row;
    row.rabi = control_point(params, axis, xs[i], probe.rabi_mhz).rabi_mhz;
    row.analytic = eit_transmission(params, row.rabi);
    const LadderSystem sys = LadderSystem::from_device(params, probe.rabi_mhz, row.rabi);
    row.engine = scattering_from_state(sys, steady_state(build_generator(sys)));
    return row;
  });

  CommandOutput out;
  out.table.columns = {"control_rabi_mhz", "T_analytic", "T_engine", "R_analytic", "R_engine",
                       "t_analytic_re", "t_analytic_im", "t_engine_re", "t_engine_im"};
  const bool powers = has_coupling(params);
  add_power_columns(out.table, powers);
  for (const Row& r : rows) {
    std::vector<Cell> row{r.rabi,
                          r.analytic.transmittance(),
                          r.engine.transmittance(),
                          r.analytic.reflectance(),
                          r.engine.reflectance(),
                          r.analytic.t.real(),
                          r.analytic.t.imag(),
                          r.engine.t.real(),
                          r.engine.t.imag()};
    append_power(row, params, r.rabi, powers);
    out.table.add_row(std::move(row));
  }
  out.x_column = "control_rabi_mhz";
  out.plot_columns = {"T_analytic", "T_engine"};
  out.summary = {{"probe_rabi_mhz", num(probe.rabi_mhz)}};
  return out;
}

double background(const ConfigDocument& doc) {
  const double rb = get_double(doc, "circulator", "r_background").value_or(0.0);
  if (!(rb >= 0.0 && rb < 1.0)) throw ConfigError("[circulator] r_background must lie in [0, 1)");
  return rb;
}

CommandOutput onoff_sweep(const ConfigDocument& doc, const RunContext& ctx) {
  const DeviceParams params = parse_device(doc);
  const SweepAxis axis = parse_axis(doc, "sweep");
  const double rb = background(doc);
  const std::vector<double> xs = axis.values();
  const double probe_rabi = get_double(doc, "drive", "probe_rabi_mhz").value_or(kWeakProbeMhz);
  control_point(params, axis, xs.front(), probe_rabi);
  const auto rabis = parallel_map(xs.size(), ctx.threads, [&](std::size_t i) {
    return control_point(params, axis, xs[i], probe_rabi).rabi_mhz;
  });

  CommandOutput out;
  out.table.columns = {"control_rabi_mhz", "R_on_off", "T_on_off", "T_on", "R_on"};
  const bool powers = has_coupling(params);
  add_power_columns(out.table, powers);
  for (double rabi : rabis) {
    const OnOffRatios ratios = on_off_ratios(params, rabi, rb);
    const ScatterResult s = eit_transmission(params, rabi);
    std::vector<Cell> row{rabi, ratios.r_on_off, ratios.t_on_off_over_t0, s.transmittance(), s.reflectance()};
    append_power(row, params, rabi, powers);
    out.table.add_row(std::move(row));
  }
  out.x_column = powers ? "control_power_dbm" : "control_rabi_mhz";
  out.plot_columns = {"R_on_off", "T_on_off"};
  out.summary = {{"r_background", num(rb)}};
  return out;
}

CommandOutput route_pulse(const ConfigDocument& doc, const RunContext&) {
  const DeviceParams params = parse_device(doc);
  const double freq = probe_frequency(doc, params);
  const DrivePoint probe = read_drive(doc, "drive", params, "probe_", Transition::kLower, freq, kWeakProbeMhz);
  const DriveTone probe_tone =
      probe.power_w && !get_double(doc, "drive", "probe_rabi_mhz") ? DriveTone::probe_power(freq, *probe.power_w)
                                                                  : DriveTone::probe_rabi(freq, probe.rabi_mhz);

  if (!doc.has_section("control")) throw ConfigError("missing section [control]");
  double amp = 0.0;
  if (auto a = get_double(doc, "control", "amplitude_mhz")) {
    amp = *a;
  } else if (auto db = get_double(doc, "control", "relative_db")) {
    amp = control_rabi_for_relative_power(probe.rabi_mhz, *db);
  } else {
    amp = read_drive(doc, "control", params, "", Transition::kUpper, freq, std::nullopt).rabi_mhz;
  }
  const std::string shape = get_string(doc, "control", "shape").value_or("square");
  std::optional<PulseEnvelope> env;
  try {
    if (shape == "square") {
      env = PulseEnvelope::square(amp, require_double(doc, "control", "start_ns"),
                                  require_double(doc, "control", "duration_ns"));
    } else if (shape == "gaussian") {
      env = PulseEnvelope::gaussian(amp, require_double(doc, "control", "center_ns"),
                                    require_double(doc, "control", "fwhm_ns"));
    } else {
      throw ConfigError("[control] shape must be square or gaussian");
    }
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("[control] ") + e.what());
  }
  RoutingOptions opts;
  const std::string port = get_string(doc, "control", "port").value_or("opposite");
  if (port == "same") {
    opts.control_port = ControlPort::kSame;
  } else if (port != "opposite") {
    throw ConfigError("[control] port must be opposite or same");
  }

  const SweepAxis time = parse_axis(doc, "time");
  if (time.variable != "t_ns" || time.log_scale) throw ConfigError("[time] must be a linear t_ns axis");
  const std::vector<double> grid = time.values();
  const RoutingTrace tr = simulate_routing(params, probe_tone, *env, CirculatorModel{background(doc)}, grid, opts);

  CommandOutput out;
  out.table.columns = {"t_ns", "control_rabi_mhz", "T", "R", "port1_frac", "port2_frac", "lost_frac", "R_on_off",
                       "T_on_off"};
  for (std::size_t i = 0; i < tr.t_ns.size(); ++i) {
    out.table.add_row({tr.t_ns[i], tr.control_rabi_mhz[i], tr.transmittance[i], tr.reflectance[i],
                       tr.port1_frac[i], tr.port2_frac[i], tr.lost_frac[i], tr.r_on_off[i], tr.t_on_off[i]});
  }
  out.x_column = "t_ns";
  out.plot_columns = {"T", "R", "port1_frac", "port2_frac"};
  out.summary = {{"probe_rabi_mhz", num(tr.probe_rabi_mhz)},
                 {"control_rabi_mhz", num(amp)},
                 {"off_T", num(tr.off_transmittance)},
                 {"off_R", num(tr.off_reflectance)},
                 {"peak_T", num(tr.peak_transmittance)}};
  if (tr.input_power_w) out.summary.emplace_back("input_power_w", num(*tr.input_power_w));
  if (tr.plateau_transmittance) out.summary.emplace_back("plateau_T", num(*tr.plateau_transmittance));
  if (tr.rise_ns) out.summary.emplace_back("rise_ns", num(*tr.rise_ns));
  if (tr.fall_ns) out.summary.emplace_back("fall_ns", num(*tr.fall_ns));
  return out;
}

CommandOutput network(const ConfigDocument& doc, const RunContext&) {
  const RouterNetwork net = parse_network(doc);
  const double contrast_min = get_double(doc, "network", "contrast_min").value_or(2.0);
  const RoutingTableReport report = routing_table_verify(net, contrast_min);

  CommandOutput out;
  out.table.columns = {"controls"};
  for (std::size_t p = 1; p <= net.port_count(); ++p) out.table.columns.push_back("port" + std::to_string(p) + "_frac");
  for (const char* c : {"lost_frac", "dominant_port", "intended_port", "contrast", "contrast_capped", "status"}) {
    out.table.columns.emplace_back(c);
  }
  for (const RoutingTableRow& r : report.rows) {
    std::string label;
    for (const auto& c : r.controls) label += (label.empty() ? "" : "+") + c;
    if (label.empty()) label = "none";
    std::vector<Cell> row{label};
    double sum = 0.0;
    for (double f : r.port_fractions) {
      row.emplace_back(f);
      sum += f;
    }
    row.emplace_back(1.0 - sum);
    row.emplace_back(static_cast<double>(r.dominant_port));
    row.emplace_back(r.intended_port ? std::to_string(*r.intended_port) : std::string("-"));
    row.emplace_back(r.contrast);
    row.emplace_back(r.contrast_capped ? std::string("yes") : std::string("no"));
    row.emplace_back(!r.intended_port ? std::string("INFO") : r.pass ? std::string("PASS") : std::string("FAIL"));
    out.table.add_row(std::move(row));
  }
  out.summary = {{"contrast_min", num(contrast_min)}, {"all_pass", report.all_pass ? "true" : "false"}};
  return out;
}

Parameterization parse_parameterization(const ConfigDocument& doc) {
  const std::string p = get_string(doc, "fit", "parameterization").value_or("log");
  if (p == "log") return Parameterization::kLog;
  if (p == "linear") return Parameterization::kLinear;
  throw ConfigError("[fit] parameterization must be log or linear");
}

int read_count(const ConfigDocument& doc, const char* key, int fallback) {
  const double v = get_double(doc, "fit", key).value_or(fallback);
  if (!(v >= 0.0) || v != std::floor(v) || v > 1e6) throw ConfigError(std::string("[fit] ") + key + " must be a non-negative integer");
  return static_cast<int>(v);
}

CommandOutput fit(const ConfigDocument& doc, const RunContext& ctx) {
  FitModel model;
  try {
    model = parse_fit_model(require_string(doc, "fit", "model"));
  } catch (const DomainError& e) {
    throw ConfigError(std::string("[fit] ") + e.what());
  }
  std::filesystem::path data_path = require_string(doc, "fit", "data");
  if (data_path.is_relative()) data_path = ctx.base_dir / data_path;
  SweepDataset data = [&] {
    try {
      return SweepDataset::read_csv(data_path);
    } catch (const DomainError& e) {
      throw ConfigError(data_path.string() + ": " + e.what());
    }
  }();

  FitOptions opts;
  opts.parameterization = parse_parameterization(doc);
  opts.max_iterations = read_count(doc, "max_iterations", opts.max_iterations);
  opts.bootstrap_samples = read_count(doc, "bootstrap_samples", 0);
  opts.seed = ctx.seed;

  FitReport report;
  if (model == FitModel::kPowerSweep) {
    PowerSweepGuess g;
    g.gamma10_mhz = get_double(doc, "fit", "guess_gamma10_mhz").value_or(g.gamma10_mhz);
    g.gamma_phi_mhz = get_double(doc, "fit", "guess_gamma_phi_mhz").value_or(g.gamma_phi_mhz);
    g.k_mhz_per_sqrt_w = get_double(doc, "fit", "guess_coupling_k").value_or(g.k_mhz_per_sqrt_w);
    g.fix_k = get_bool(doc, "fit", "fix_k").value_or(!data.has_detuning());
    report = fit_power_sweep(data, g, opts);
  } else {
    OnOffFixed fixed;
    if (doc.has_section("device")) {
      const DeviceParams p = parse_device(doc);
      fixed.gamma10_mhz = p.gamma10_mhz;
      fixed.gamma01_decoherence_mhz = p.gamma01_decoherence_mhz();
    }
    OnOffGuess g;
    g.gamma20_mhz = get_double(doc, "fit", "guess_gamma20_mhz").value_or(g.gamma20_mhz);
    g.r_background = get_double(doc, "fit", "guess_r_background").value_or(g.r_background);
    report = fit_onoff_curve(data, fixed, g, opts);
  }

  CommandOutput out;
  out.table.columns = {"parameter", "value", "sigma", "fixed"};
  const bool boot = opts.bootstrap_samples > 0;
  if (boot) out.table.columns.emplace_back("bootstrap_sigma");
  for (const FitParameter& p : report.parameters) {
    std::vector<Cell> row{p.name, p.value, p.sigma, p.fixed ? std::string("yes") : std::string("no")};
    if (boot) row.emplace_back(p.bootstrap_sigma.value_or(0.0));
    out.table.add_row(std::move(row));
  }
  out.summary = {{"model", report.model},
                 {"converged", report.converged ? "true" : "false"},
                 {"stop_reason", report.stop_reason},
                 {"iterations", std::to_string(report.iterations)},
                 {"initial_residual_norm", num(report.initial_residual_norm)},
                 {"residual_norm", num(report.residual_norm)}};
  return out;
}

CommandOutput spectrum(const ConfigDocument& doc, const RunContext&) {
  const DeviceParams params = parse_device(doc);
  const double freq = probe_frequency(doc, params);
  const DrivePoint probe = read_drive(doc, "drive", params, "probe_", Transition::kLower, freq, std::nullopt);
  const double detuning = get_double(doc, "drive", "probe_detuning_mhz").value_or(0.0);
  SpectrumOptions opts;
  opts.horizon_over_gamma10 = get_double(doc, "spectrum", "horizon_over_gamma10").value_or(opts.horizon_over_gamma10);
  opts.tail_tolerance = get_double(doc, "spectrum", "tail_tolerance").value_or(opts.tail_tolerance);
  const double pts = get_double(doc, "spectrum", "points").value_or(static_cast<double>(opts.points));
  if (!(pts >= 16.0) || pts != std::floor(pts) || pts > 1e7) throw ConfigError("[spectrum] points must be an integer >= 16");
  opts.points = static_cast<std::size_t>(pts);

  const LadderSystem sys = LadderSystem::from_device(params, probe.rabi_mhz, 0.0, detuning);
  const EmissionSpectrum s = emission_spectrum(sys, opts);

  CommandOutput out;
  out.table.columns = {"detuning_mhz", "density"};
  for (std::size_t i = 0; i < s.detuning_mhz.size(); ++i) out.table.add_row({s.detuning_mhz[i], s.density[i]});
  out.x_column = "detuning_mhz";
  out.plot_columns = {"density"};
  std::string peaks;
  for (double p : find_maxima(s.detuning_mhz, s.density, 0.05)) peaks += (peaks.empty() ? "" : " ") + num(p);
  out.summary = {{"probe_rabi_mhz", num(probe.rabi_mhz)},
                 {"coherent_power", num(s.coherent_power)},
                 {"incoherent_power", num(s.incoherent_power)},
                 {"peaks_mhz", peaks}};
  return out;
}

std::uint64_t read_seed(const ConfigDocument& doc) {
  const auto text = get_string(doc, "scenario", "seed");
  if (!text) return 1;
  std::uint64_t v = 0;
  auto [end, ec] = std::from_chars(text->data(), text->data() + text->size(), v);
  if (ec != std::errc{} || end != text->data() + text->size()) {
    throw ConfigError("[scenario] seed must be a non-negative integer");
  }
  return v;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"extinction-sweep", "two-tone", "eit-sweep", "onoff-sweep",
                                              "route-pulse",      "network",  "fit",       "spectrum"};
  return names;
}

CommandOutput execute(std::string_view command, const ConfigDocument& doc, const RunContext& ctx) {
  if (command == "run") {
    const std::string kind = scenario_kind(doc);
    if (kind == "run") throw ConfigError("[scenario] kind must name a subcommand");
    return execute(kind, doc, ctx);
  }
  if (command == "extinction-sweep") return extinction_sweep(doc, ctx);
  if (command == "two-tone") return two_tone(doc, ctx);
  if (command == "eit-sweep") return eit_sweep(doc, ctx);
  if (command == "onoff-sweep") return onoff_sweep(doc, ctx);
  if (command == "route-pulse") return route_pulse(doc, ctx);
  if (command == "network") return network(doc, ctx);
  if (command == "fit") return fit(doc, ctx);
  if (command == "spectrum") return spectrum(doc, ctx);
  throw ConfigError("unknown scenario kind '" + std::string(command) + "'");
}

unsigned resolve_threads(std::optional<unsigned> flag) {
  if (flag) return std::max(1u, *flag);
  if (const char* env = std::getenv("WQED_THREADS")) {
    unsigned v = 0;
    const std::string_view s(env);
    auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec == std::errc{} && end == s.data() + s.size() && v > 0) return v;
    throw ConfigError("WQED_THREADS must be a positive integer");
  }
  return 1;
}

int run_command(std::string_view command, const CommandOptions& options, std::ostream& out, std::ostream& err) {
  try {
    const ConfigDocument doc = ConfigDocument::load(options.config);
    RunContext ctx;
    ctx.base_dir = options.config.parent_path();
    ctx.threads = resolve_threads(options.threads);
    ctx.seed = options.seed ? *options.seed : read_seed(doc);

    const OutputSpec spec = parse_output(doc);
    const OutputFormat format = options.format.value_or(spec.format);
    std::optional<std::filesystem::path> path = options.out;
    if (!path && spec.path) path = spec.path->is_relative() ? ctx.base_dir / *spec.path : *spec.path;

    const CommandOutput result = execute(command, doc, ctx);
    const std::string text = render(result.table, format);
    std::ostream& report = path ? out : err;
    if (path) {
      write_atomic(*path, text);
      if (format == OutputFormat::kCsv && !result.x_column.empty()) {
        auto gp = *path;
        gp += ".gp";
        write_atomic(gp, gnuplot_script(result.table, *path, result.x_column, result.plot_columns, result.log_x));
      }
    } else {
      out << text;
    }
    for (const auto& [k, v] : result.summary) report << k << '=' << v << '\n';
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ParameterError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  }
}

}  // namespace wqed
