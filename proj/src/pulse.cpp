#include "wqed/pulse.hpp"

#include <cmath>
#include <numbers>

#include "wqed/errors.hpp"

namespace wqed {

PulseEnvelope::PulseEnvelope(PulseShape shape, double amplitude, double position, double width)
    : shape_(shape), amplitude_(amplitude), position_(position), width_(width) {
  if (!(width > 0.0) || !std::isfinite(width)) {
    throw ParameterError("pulse duration/fwhm must be positive");
  }
  if (!(amplitude >= 0.0) || !std::isfinite(amplitude)) {
    throw ParameterError("pulse amplitude must be a finite value >= 0");
  }
  if (!std::isfinite(position)) {
    throw ParameterError("pulse start/center must be finite");
  }
}

PulseEnvelope PulseEnvelope::square(double amplitude_mhz, double start_ns, double duration_ns) {
  return PulseEnvelope(PulseShape::kSquare, amplitude_mhz, start_ns, duration_ns);
}

PulseEnvelope PulseEnvelope::gaussian(double amplitude_mhz, double center_ns, double fwhm_ns) {
  return PulseEnvelope(PulseShape::kGaussian, amplitude_mhz, center_ns, fwhm_ns);
}

double PulseEnvelope::operator()(double t_ns) const {
  if (shape_ == PulseShape::kSquare) {
    return (t_ns >= position_ && t_ns < position_ + width_) ? amplitude_ : 0.0;
  }
  const double sigma = width_ / (2.0 * std::sqrt(2.0 * std::numbers::ln2));
  const double x = (t_ns - position_) / sigma;
  return amplitude_ * std::exp(-0.5 * x * x);
}

std::vector<double> PulseEnvelope::breakpoints() const {
  if (shape_ == PulseShape::kSquare) return {position_, position_ + width_};
  return {};
}

double PulseEnvelope::window_begin() const {
  return shape_ == PulseShape::kSquare ? position_ : position_ - 0.5 * width_;
}

double PulseEnvelope::window_end() const {
  return shape_ == PulseShape::kSquare ? position_ + width_ : position_ + 0.5 * width_;
}

}  // namespace wqed
