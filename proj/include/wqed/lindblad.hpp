#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "wqed/device.hpp"
#include "wqed/scattering.hpp"

namespace wqed {

using Matrix3c = Eigen::Matrix3cd;
using Superoperator = Eigen::Matrix<std::complex<double>, 9, 9>;
using Vector9c = Eigen::Matrix<std::complex<double>, 9, 1>;

/// State of the {|0⟩, |1⟩, |2⟩} ladder. Vectorisation is column-major:
/// element (i, j) sits at index i + 3j.
class DensityMatrix3 {
 public:
  /// Ground state |0⟩⟨0|.
  DensityMatrix3();
  explicit DensityMatrix3(const Matrix3c& m) : m_(m) {}

  static DensityMatrix3 basis(int level);
  static DensityMatrix3 from_vector(const Vector9c& v);

  Vector9c vectorized() const;
  const Matrix3c& matrix() const { return m_; }
  std::complex<double> operator()(int i, int j) const { return m_(i, j); }
  double population(int level) const { return m_(level, level).real(); }

  double trace_error() const;
  double hermiticity_error() const;
  double min_eigenvalue() const;
  bool is_physical(double herm_tol = 1e-10, double trace_tol = 1e-10,
                   double eig_tol = 1e-9) const;

  DensityMatrix3 hermitized() const;

 private:
  Matrix3c m_;
};

/// Three-level ladder in the frame rotating with both tones.
///
/// Detunings are Δ_p = ω_p − ω₀₁ and Δ_c = ω_c − ω₁₂; every quantity is in
/// cyclic MHz. Rates may be zero (closed system).
struct LadderSystem {
  double probe_detuning_mhz = 0.0;
  double control_detuning_mhz = 0.0;
  double probe_rabi_mhz = 0.0;
  double control_rabi_mhz = 0.0;
  double gamma10_mhz = 0.0;
  double gamma21_mhz = 0.0;
  double gamma_phi_mhz = 0.0;
  double gamma_phi2_mhz = 0.0;

  static LadderSystem from_device(const DeviceParams& params, double probe_rabi_mhz,
                                  double control_rabi_mhz = 0.0,
                                  double probe_detuning_mhz = 0.0,
                                  double control_detuning_mhz = 0.0);

  void validate() const;
};

/// Linear generator dρ/dt = L ρ acting on vectorised density matrices
/// (time in ns, angular units inside).
class Liouvillian {
 public:
  Liouvillian() : m_(Superoperator::Zero()) {}
  explicit Liouvillian(const Superoperator& m) : m_(m) {}

  const Superoperator& matrix() const { return m_; }
  Matrix3c apply(const Matrix3c& rho) const;

 private:
  Superoperator m_;
};

/// Coherent drive plus relaxation (Γ₁₀, Γ₂₁) and dephasing (Γ_φ, Γ_φ2).
Liouvillian build_generator(const LadderSystem& sys);

/// ∂L/∂Ω: the generator contribution of one cyclic MHz of Rabi drive on a line.
Liouvillian drive_generator(Transition line);

/// L(t) = base + Σ_k Ω_k(t)·∂L/∂Ω_k. `breakpoints` are times where some
/// Ω_k(t) jumps; integration never steps across them.
struct TimeDependentGenerator {
  struct Term {
    Transition line;
    std::function<double(double)> rabi_mhz;
  };

  Liouvillian base;
  std::vector<Term> terms;
  std::vector<double> breakpoints;

  Superoperator at(double t_ns) const;
};

/// Unique stationary state from the generator rows bordered by the trace
/// constraint. Throws NoSteadyStateError if it is not unique.
DensityMatrix3 steady_state(const Liouvillian& gen);

/// Coherent scattering of the tone on `line`, r = i·(Γ/Ω)·ρ_ab with
/// (Γ, Ω, ρ_ab) = (Γ₁₀, Ω_p, ρ₀₁) or (Γ₂₁, Ω_c, ρ₁₂).
ScatterResult scattering_from_state(const LadderSystem& sys, const DensityMatrix3& rho,
                                    Transition line = Transition::kLower);

/// Phase constant c in r = c·(Γ/Ω)·ρ_ab.
inline constexpr std::complex<double> kScatteringPhase{0.0, 1.0};

struct EvolveOptions {
  double abs_tol = 1e-9;
  double rel_tol = 1e-9;
  double initial_step_ns = 1e-3;
};

/// States at every point of `t_grid` (strictly increasing, first point = ρ₀).
std::vector<DensityMatrix3> evolve(const TimeDependentGenerator& gen, const DensityMatrix3& rho0,
                                   std::span<const double> t_grid, const EvolveOptions& opts = {});
std::vector<DensityMatrix3> evolve(const Liouvillian& gen, const DensityMatrix3& rho0,
                                   std::span<const double> t_grid, const EvolveOptions& opts = {});

struct TwoToneMap {
  std::vector<double> probe_freqs_ghz;
  std::vector<ScatterResult> probe;
  Transition probe_line = Transition::kLower;

  std::vector<double> transmittance() const;
};

/// Probe transmission while a pump dresses one transition. The pump is placed
/// on the transition nearest its frequency, each probe frequency on the
/// other. `probe_rabi_mhz` is the 0-1-equivalent amplitude (√2 larger on 1-2).
TwoToneMap two_tone_map(const DeviceParams& params, const DriveTone& pump,
                        std::span<const double> probe_freqs_ghz, double probe_rabi_mhz,
                        unsigned threads = 1);

struct SpectrumOptions {
  double horizon_over_gamma10 = 50.0;  // τ_max·Γ₁₀
  std::size_t points = 4096;
  double tail_tolerance = 1e-6;  // |g(τ_max)| / |g(0)|
};

/// Incoherent resonance-fluorescence spectrum of the 0-1 transition.
///
/// `density` is per cyclic MHz and integrates to one over the grid;
/// `detuning_mhz` is measured from the probe drive frequency.
struct EmissionSpectrum {
  std::vector<double> detuning_mhz;
  std::vector<double> density;
  double coherent_power = 0.0;    // |⟨σ₋⟩|²
  double incoherent_power = 0.0;  // ρ₁₁ − |⟨σ₋⟩|²
};

EmissionSpectrum emission_spectrum(const LadderSystem& sys, const SpectrumOptions& opts = {});

/// Local extrema of sampled data, refined by a parabola through the three
/// points around each discrete extremum. Maxima below `min_fraction` of the
/// global maximum are dropped.
std::vector<double> find_minima(std::span<const double> x, std::span<const double> y);
std::vector<double> find_maxima(std::span<const double> x, std::span<const double> y,
                                double min_fraction = 0.0);

}  // namespace wqed
