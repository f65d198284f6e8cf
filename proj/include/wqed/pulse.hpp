#pragma once

#include <vector>

namespace wqed {

enum class PulseShape { kSquare, kGaussian };

/// Control envelope Ω(t) in cyclic MHz over time in ns.
///
/// Square pulses are on for t ∈ [start, start + duration). Gaussian pulses
/// are parameterised by their centre and full width at half maximum.
class PulseEnvelope {
 public:
  static PulseEnvelope square(double amplitude_mhz, double start_ns, double duration_ns);
  static PulseEnvelope gaussian(double amplitude_mhz, double center_ns, double fwhm_ns);

  PulseShape shape() const { return shape_; }
  double amplitude_mhz() const { return amplitude_; }
  /// Square: pulse start. Gaussian: centre.
  double position_ns() const { return position_; }
  /// Square: duration. Gaussian: FWHM.
  double width_ns() const { return width_; }

  double operator()(double t_ns) const;

  /// Times where the envelope is discontinuous (square edges).
  std::vector<double> breakpoints() const;

  /// Interval that must be resolved by an output grid: [start, end) of a
  /// square pulse, or the FWHM window of a Gaussian.
  double window_begin() const;
  double window_end() const;

 private:
  PulseEnvelope(PulseShape shape, double amplitude, double position, double width);

  PulseShape shape_;
  double amplitude_;
  double position_;
  double width_;
};

}  // namespace wqed
