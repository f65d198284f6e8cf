#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "wqed/config.hpp"
#include "wqed/device.hpp"
#include "wqed/router.hpp"

namespace wqed {

/// A swept variable: `variable`, `from`, `to`, `points`, `scale` (linear|log).
struct SweepAxis {
  std::string variable;
  double from = 0.0;
  double to = 0.0;
  std::size_t points = 0;
  bool log_scale = false;

  std::vector<double> values() const;
};

enum class OutputFormat { kCsv, kJson };

struct OutputSpec {
  std::optional<std::filesystem::path> path;
  OutputFormat format = OutputFormat::kCsv;
};

/// Device keys: ej_max_ghz, ec_ghz, flux, gamma10_mhz, gamma_phi_mhz,
/// gamma20_mhz, z0_ohm, coupling_mode (none|direct|circuit), coupling_k,
/// cc_over_csigma, alpha_override_ghz. Keys found in `section` override
/// `base`; without a base the five rate/energy keys are required.
DeviceParams parse_device(const ConfigDocument& doc, const std::string& section = "device",
                          const DeviceParams* base = nullptr);

/// Writes the canonical device keys for `params` into `section`.
void write_device(ConfigDocument& doc, const DeviceParams& params, const std::string& section = "device");

SweepAxis parse_axis(const ConfigDocument& doc, const std::string& section);

OutputSpec parse_output(const ConfigDocument& doc);
OutputFormat parse_format(const std::string& text);

/// Stages listed by `[network] stages = A,B,C`, each overriding the base
/// device with its `[stage.X]` section (plus r_background and
/// control_rabi_mhz or target_t_on).
RouterNetwork parse_network(const ConfigDocument& doc);

/// The scenario kind from `[scenario] kind`.
std::string scenario_kind(const ConfigDocument& doc);

/// parse → serialize → parse → serialize normalisation used for diffable configs.
std::string normalize_config(const std::string& text);

}  // namespace wqed
