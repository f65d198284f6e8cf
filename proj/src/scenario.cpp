#include "wqed/scenario.hpp"

#include <cmath>
#include <sstream>

#include "wqed/errors.hpp"
#include "wqed/scattering.hpp"

namespace wqed {

std::vector<double> SweepAxis::values() const {
  std::vector<double> out(points);
  if (points == 1) {
    out[0] = from;
    return out;
  }
  for (std::size_t i = 0; i < points; ++i) {
    const double u = static_cast<double>(i) / static_cast<double>(points - 1);
    out[i] = log_scale ? from * std::pow(to / from, u) : from + u * (to - from);
  }
  out.back() = to;
  return out;
}

namespace {

std::string format_real(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

}  // namespace

DeviceParams parse_device(const ConfigDocument& doc, const std::string& section, const DeviceParams* base) {
  DeviceParams p = base ? *base : DeviceParams{};
  const auto assign = [&](const char* key, double& field) {
    if (auto v = get_double(doc, section, key)) {
      field = *v;
    } else if (!base) {
      field = require_double(doc, section, key);
    }
  };
  assign("ej_max_ghz", p.ej_max_ghz);
  assign("ec_ghz", p.ec_ghz);
  assign("gamma10_mhz", p.gamma10_mhz);
  assign("gamma_phi_mhz", p.gamma_phi_mhz);
  assign("gamma20_mhz", p.gamma20_mhz);
  if (!base) {
    p.flux = 0.0;
    p.z0_ohm = 50.0;
    p.coupling = std::monostate{};
    p.alpha_override_ghz.reset();
  }
  if (auto v = get_double(doc, section, "flux")) p.flux = *v;
  if (auto v = get_double(doc, section, "z0_ohm")) p.z0_ohm = *v;
  if (auto v = get_double(doc, section, "alpha_override_ghz")) p.alpha_override_ghz = *v;

  std::string mode = "none";
  if (auto m = get_string(doc, section, "coupling_mode")) {
    mode = *m;
  } else if (doc.get(section, "coupling_k")) {
    mode = "direct";
  } else if (doc.get(section, "cc_over_csigma")) {
    mode = "circuit";
  } else if (base) {
    mode.clear();  // inherit
  }
  if (mode == "direct") {
    p.coupling = DirectCoupling{require_double(doc, section, "coupling_k")};
  } else if (mode == "circuit") {
    p.coupling = CircuitCoupling{require_double(doc, section, "cc_over_csigma")};
  } else if (mode == "none") {
    p.coupling = std::monostate{};
  } else if (!mode.empty()) {
    throw ConfigError("[" + section + "] coupling_mode must be none, direct or circuit");
  }
  try {
    p.validate();
  } catch (const ParameterError& e) {
    throw ConfigError("[" + section + "] " + e.what());
  }
  return p;
}

void write_device(ConfigDocument& doc, const DeviceParams& p, const std::string& section) {
  doc.set(section, "ej_max_ghz", format_real(p.ej_max_ghz));
  doc.set(section, "ec_ghz", format_real(p.ec_ghz));
  doc.set(section, "flux", format_real(p.flux));
  doc.set(section, "gamma10_mhz", format_real(p.gamma10_mhz));
  doc.set(section, "gamma_phi_mhz", format_real(p.gamma_phi_mhz));
  doc.set(section, "gamma20_mhz", format_real(p.gamma20_mhz));
  doc.set(section, "z0_ohm", format_real(p.z0_ohm));
  if (const auto* d = std::get_if<DirectCoupling>(&p.coupling)) {
    doc.set(section, "coupling_mode", "direct");
    doc.set(section, "coupling_k", format_real(d->k_mhz_per_sqrt_w));
  } else if (const auto* c = std::get_if<CircuitCoupling>(&p.coupling)) {
    doc.set(section, "coupling_mode", "circuit");
    doc.set(section, "cc_over_csigma", format_real(c->cc_over_csigma));
  }
  if (p.alpha_override_ghz) doc.set(section, "alpha_override_ghz", format_real(*p.alpha_override_ghz));
}

SweepAxis parse_axis(const ConfigDocument& doc, const std::string& section) {
  if (!doc.has_section(section)) throw ConfigError("missing section [" + section + "]");
  SweepAxis axis;
  axis.variable = require_string(doc, section, "variable");
  axis.from = require_double(doc, section, "from");
  axis.to = require_double(doc, section, "to");
  const double pts = require_double(doc, section, "points");
  if (!(pts >= 1.0) || pts != std::floor(pts) || pts > 1e7) {
    throw ConfigError("[" + section + "] points must be a positive integer");
  }
  axis.points = static_cast<std::size_t>(pts);
  const std::string scale = get_string(doc, section, "scale").value_or("linear");
  if (scale == "log") {
    axis.log_scale = true;
  } else if (scale != "linear") {
    throw ConfigError("[" + section + "] scale must be linear or log");
  }
  if (!std::isfinite(axis.from) || !std::isfinite(axis.to)) {
    throw ConfigError("[" + section + "] sweep range must be finite");
  }
  if (axis.points > 1 && axis.from == axis.to) {
    throw ConfigError("[" + section + "] sweep range is empty");
  }
  if (axis.log_scale && (axis.from <= 0.0 || axis.to <= 0.0)) {
    throw ConfigError("[" + section + "] log sweeps need positive endpoints");
  }
  return axis;
}

OutputFormat parse_format(const std::string& text) {
  if (text == "csv") return OutputFormat::kCsv;
  if (text == "json") return OutputFormat::kJson;
  throw ConfigError("output format must be csv or json, got '" + text + "'");
}

OutputSpec parse_output(const ConfigDocument& doc) {
  OutputSpec spec;
  if (auto p = get_string(doc, "output", "path")) spec.path = *p;
  if (auto f = get_string(doc, "output", "format")) spec.format = parse_format(*f);
  return spec;
}

RouterNetwork parse_network(const ConfigDocument& doc) {
  if (!doc.has_section("network")) throw ConfigError("missing section [network]");
  const DeviceParams base = parse_device(doc, "device");
  const std::string list = require_string(doc, "network", "stages");
  std::vector<RouterStage> stages;
  std::stringstream ss(list);
  std::string label;
  while (std::getline(ss, label, ',')) {
    const auto b = label.find_first_not_of(" \t");
    const auto e = label.find_last_not_of(" \t");
    if (b == std::string::npos) throw ConfigError("[network] stages contains an empty label");
    label = label.substr(b, e - b + 1);
    const std::string section = "stage." + label;
    RouterStage stage;
    stage.label = label;
    stage.params = parse_device(doc, section, &base);
    stage.circulator.leakage = get_double(doc, section, "r_background")
                                   .value_or(get_double(doc, "network", "r_background").value_or(0.0));
    const auto rabi = get_double(doc, section, "control_rabi_mhz");
    const auto target = get_double(doc, section, "target_t_on");
    if (rabi && target) {
      throw ConfigError("[" + section + "] set either control_rabi_mhz or target_t_on, not both");
    }
    try {
      if (rabi && std::isfinite(*rabi)) stage.control_rabi_mhz = *rabi;
      if (target) stage.control_rabi_mhz = control_rabi_for_transmission(stage.params, *target);
    } catch (const DomainError& e) {
      throw ConfigError("[" + section + "] " + e.what());
    }
    stages.push_back(std::move(stage));
  }
  try {
    return RouterNetwork(std::move(stages));
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("[network] ") + e.what());
  }
}

std::string scenario_kind(const ConfigDocument& doc) { return require_string(doc, "scenario", "kind"); }

std::string normalize_config(const std::string& text) { return ConfigDocument::parse(text).serialize(); }

}  // namespace wqed
