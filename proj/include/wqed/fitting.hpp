#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wqed {

/// One measured point. `x` is the probe power in W (eq1_power) or the control
/// Rabi amplitude in MHz (eq4_onoff). `detuning_mhz` is the probe detuning of
/// a frequency-resolved power sweep and is zero otherwise.
struct SweepRow {
  double x = 0.0;
  double y = 0.0;
  double weight = 1.0;
  double detuning_mhz = 0.0;
};

/// At least four rows, (detuning, x) strictly increasing, weights > 0.
class SweepDataset {
 public:
  explicit SweepDataset(std::vector<SweepRow> rows);

  /// Delimited text: header `x,y,weight[,detuning_mhz]`, one row per line.
  static SweepDataset parse_csv(std::istream& in);
  static SweepDataset read_csv(const std::filesystem::path& path);
  void write_csv(std::ostream& out) const;

  const std::vector<SweepRow>& rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }
  bool has_detuning() const;

 private:
  std::vector<SweepRow> rows_;
};

enum class FitModel { kPowerSweep, kOnOff };

/// "eq1_power" or "eq4_onoff"; anything else throws DomainError.
FitModel parse_fit_model(std::string_view id);
std::string_view fit_model_name(FitModel model);

/// Quantities held fixed by the on/off model (taken from the power sweep).
struct OnOffFixed {
  double gamma10_mhz = 73.0;
  double gamma01_decoherence_mhz = 54.5;
};

// Parameter order:
//   eq1_power  (gamma10_mhz, gamma_phi_mhz, k_mhz_per_sqrt_w)
//   eq4_onoff  (gamma20_mhz, r_background)

/// Model prediction for one row.
double model_value(FitModel model, std::span<const double> params, const SweepRow& row,
                   const OnOffFixed& fixed = {});

/// Analytic derivative of model_value with respect to each parameter.
/// Rows with a non-zero detuning have no closed form; this throws for them.
std::vector<double> model_gradient(FitModel model, std::span<const double> params,
                                   const SweepRow& row, const OnOffFixed& fixed = {});

/// r_i = w_i·(model(x_i; params) − y_i).
std::vector<double> residuals(FitModel model, std::span<const double> params,
                              const SweepDataset& data, const OnOffFixed& fixed = {});
std::vector<double> residuals(std::string_view model_id, std::span<const double> params,
                              const SweepDataset& data, const OnOffFixed& fixed = {});

enum class Parameterization { kLog, kLinear };

struct FitOptions {
  int max_iterations = 200;
  /// kLog fits log-rates (and logit R_b); kLinear fits the raw values.
  Parameterization parameterization = Parameterization::kLog;
  /// Case-resampling bootstrap replicas for an extra uncertainty estimate.
  int bootstrap_samples = 0;
  std::uint64_t seed = 1;
};

struct FitParameter {
  std::string name;
  double value = 0.0;
  double sigma = 0.0;  // 1σ from the curvature at the optimum
  std::optional<double> bootstrap_sigma;
  bool fixed = false;
};

struct FitReport {
  std::string model;
  std::vector<FitParameter> parameters;
  double initial_residual_norm = 0.0;
  double residual_norm = 0.0;
  double initial_gradient_norm = 0.0;
  double gradient_norm = 0.0;
  double last_relative_step = 0.0;
  bool converged = false;
  std::string stop_reason;
  int iterations = 0;
  /// Residual norm after every accepted step, starting with the initial one.
  std::vector<double> accepted_norms;

  const FitParameter& parameter(std::string_view name) const;
  double value(std::string_view name) const { return parameter(name).value; }

  /// `key=value` lines, one per field and parameter.
  std::string to_key_value() const;
};

struct PowerSweepGuess {
  double gamma10_mhz = 73.0;
  double gamma_phi_mhz = 18.0;
  double k_mhz_per_sqrt_w = 3e9;
  /// Resonant-only data cannot separate k from the rates; hold it fixed.
  bool fix_k = false;
};

/// Fits (Γ₁₀, Γ_φ, k) to transmittance-vs-power data. Rows with a detuning
/// are modelled by the master-equation steady state.
FitReport fit_power_sweep(const SweepDataset& data, const PowerSweepGuess& init,
                          const FitOptions& options = {});

struct OnOffGuess {
  double gamma20_mhz = 100.0;
  double r_background = 0.1;
};

/// Fits (γ₂₀, R_b) to R_on_off-vs-control data with Γ₁₀ and γ₁₀ held fixed.
FitReport fit_onoff_curve(const SweepDataset& data, const OnOffFixed& fixed,
                          const OnOffGuess& init, const FitOptions& options = {});

/// Deterministic per-trial seed derived from a master seed.
std::uint64_t trial_seed(std::uint64_t master, std::uint64_t trial);

/// Synthetic data with multiplicative Gaussian noise y·(1 + noise·ξ).
/// Weights are 1 for every row.
SweepDataset synthesize(FitModel model, std::span<const double> truth, std::span<const double> xs,
                        double relative_noise, std::uint64_t seed, const OnOffFixed& fixed = {},
                        std::span<const double> detunings_mhz = {});

}  // namespace wqed
