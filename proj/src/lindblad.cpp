#include "wqed/lindblad.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <boost/numeric/odeint.hpp>
#include <fftw3.h>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include "wqed/errors.hpp"
#include "wqed/parallel.hpp"

namespace wqed {
namespace {

using units::mhz_to_rad_per_ns;
constexpr std::complex<double> kI{0.0, 1.0};

Matrix3c projector(int i, int j) {
  Matrix3c m = Matrix3c::Zero();
  m(i, j) = 1.0;
  return m;
}

// −i[H, ·]
Superoperator commutator_part(const Matrix3c& h) {
  const Matrix3c id = Matrix3c::Identity();
  return -kI * (Eigen::kroneckerProduct(id, h) - Eigen::kroneckerProduct(h.transpose(), id)).eval();
}

// D[L]· = L·L† − ½{L†L, ·}
Superoperator dissipator(const Matrix3c& jump) {
  const Matrix3c id = Matrix3c::Identity();
  const Matrix3c number = jump.adjoint() * jump;
  return (Eigen::kroneckerProduct(jump.conjugate(), jump) -
          0.5 * Eigen::kroneckerProduct(id, number) -
          0.5 * Eigen::kroneckerProduct(number.transpose(), id))
      .eval();
}

void require_nonnegative(double v, const char* name) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw ParameterError(std::string(name) + " must be a finite value >= 0");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// DensityMatrix3

DensityMatrix3::DensityMatrix3() : m_(projector(0, 0)) {}

DensityMatrix3 DensityMatrix3::basis(int level) {
  if (level < 0 || level > 2) throw DomainError("ladder level must be 0, 1 or 2");
  return DensityMatrix3(projector(level, level));
}

DensityMatrix3 DensityMatrix3::from_vector(const Vector9c& v) {
  return DensityMatrix3(Eigen::Map<const Matrix3c>(v.data()));
}

Vector9c DensityMatrix3::vectorized() const { return Eigen::Map<const Vector9c>(m_.data()); }

double DensityMatrix3::trace_error() const { return std::abs(m_.trace() - 1.0); }

double DensityMatrix3::hermiticity_error() const { return (m_ - m_.adjoint()).cwiseAbs().maxCoeff(); }

double DensityMatrix3::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Matrix3c> es(0.5 * (m_ + m_.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

bool DensityMatrix3::is_physical(double herm_tol, double trace_tol, double eig_tol) const {
  return hermiticity_error() <= herm_tol && trace_error() <= trace_tol &&
         min_eigenvalue() >= -eig_tol;
}

DensityMatrix3 DensityMatrix3::hermitized() const {
  return DensityMatrix3(0.5 * (m_ + m_.adjoint()));
}

// ---------------------------------------------------------------------------
// Generator

LadderSystem LadderSystem::from_device(const DeviceParams& params, double probe_rabi_mhz,
                                       double control_rabi_mhz, double probe_detuning_mhz,
                                       double control_detuning_mhz) {
  params.validate();
  LadderSystem sys;
  sys.probe_detuning_mhz = probe_detuning_mhz;
  sys.control_detuning_mhz = control_detuning_mhz;
  sys.probe_rabi_mhz = probe_rabi_mhz;
  sys.control_rabi_mhz = control_rabi_mhz;
  sys.gamma10_mhz = params.gamma10_mhz;
  sys.gamma21_mhz = params.gamma21_mhz();
  sys.gamma_phi_mhz = params.gamma_phi_mhz;
  sys.gamma_phi2_mhz = params.gamma_phi2_mhz();
  sys.validate();
  return sys;
}

void LadderSystem::validate() const {
  require_nonnegative(probe_rabi_mhz, "probe_rabi_mhz");
  require_nonnegative(control_rabi_mhz, "control_rabi_mhz");
  require_nonnegative(gamma10_mhz, "gamma10_mhz");
  require_nonnegative(gamma21_mhz, "gamma21_mhz");
  require_nonnegative(gamma_phi_mhz, "gamma_phi_mhz");
  if (gamma_phi2_mhz < 0.0 || !std::isfinite(gamma_phi2_mhz)) {
    throw ParameterError("|2> pure dephasing rate is negative (gamma20 < gamma21/2)");
  }
  if (!std::isfinite(probe_detuning_mhz) || !std::isfinite(control_detuning_mhz)) {
    throw ParameterError("detunings must be finite");
  }
}

Matrix3c Liouvillian::apply(const Matrix3c& rho) const {
  const Vector9c v = m_ * Eigen::Map<const Vector9c>(rho.data());
  return Eigen::Map<const Matrix3c>(v.data());
}

Liouvillian drive_generator(Transition line) {
  const double half = 0.5 * mhz_to_rad_per_ns(1.0);
  const Matrix3c h = line == Transition::kLower ? Matrix3c(half * (projector(0, 1) + projector(1, 0)))
                                                : Matrix3c(half * (projector(1, 2) + projector(2, 1)));
  return Liouvillian(commutator_part(h));
}

Liouvillian build_generator(const LadderSystem& sys) {
  sys.validate();
  const double dp = mhz_to_rad_per_ns(sys.probe_detuning_mhz);
  const double dc = mhz_to_rad_per_ns(sys.control_detuning_mhz);
  const Matrix3c h = -dp * projector(1, 1) - (dp + dc) * projector(2, 2);

  Superoperator l = commutator_part(h);
  l += sys.probe_rabi_mhz * drive_generator(Transition::kLower).matrix();
  l += sys.control_rabi_mhz * drive_generator(Transition::kUpper).matrix();

  const auto add_channel = [&](double rate_mhz, const Matrix3c& op) {
    if (rate_mhz > 0.0) l += dissipator(std::sqrt(mhz_to_rad_per_ns(rate_mhz)) * op);
  };
  add_channel(sys.gamma10_mhz, projector(0, 1));
  add_channel(sys.gamma21_mhz, projector(1, 2));
  add_channel(2.0 * sys.gamma_phi_mhz, projector(1, 1));
  add_channel(2.0 * sys.gamma_phi2_mhz, projector(2, 2));
  return Liouvillian(l);
}

Superoperator TimeDependentGenerator::at(double t_ns) const {
  Superoperator l = base.matrix();
  for (const auto& term : terms) {
    l += term.rabi_mhz(t_ns) * drive_generator(term.line).matrix();
  }
  return l;
}

DensityMatrix3 steady_state(const Liouvillian& gen) {
  Eigen::Matrix<std::complex<double>, 10, 9> bordered;
  bordered.topRows<9>() = gen.matrix();
  bordered.row(9).setZero();
  for (int i = 0; i < 3; ++i) bordered(9, i + 3 * i) = 1.0;
  Eigen::Matrix<std::complex<double>, 10, 1> rhs = Eigen::Matrix<std::complex<double>, 10, 1>::Zero();
  rhs(9) = 1.0;

  Eigen::ColPivHouseholderQR<Eigen::Matrix<std::complex<double>, 10, 9>> qr(bordered);
  if (qr.rank() < 9) {
    throw NoSteadyStateError("generator has no unique stationary state");
  }
  const Vector9c v = qr.solve(rhs);
  const double scale = std::max(1.0, gen.matrix().cwiseAbs().maxCoeff());
  if ((gen.matrix() * v).cwiseAbs().maxCoeff() > 1e-10 * scale ||
      std::abs(v(0) + v(4) + v(8) - 1.0) > 1e-10) {
    throw NoSteadyStateError("stationary-state solve did not converge");
  }
  return DensityMatrix3::from_vector(v).hermitized();
}

ScatterResult scattering_from_state(const LadderSystem& sys, const DensityMatrix3& rho,
                                    Transition line) {
  const bool lower = line == Transition::kLower;
  const double rabi = lower ? sys.probe_rabi_mhz : sys.control_rabi_mhz;
  if (!(rabi > 0.0)) {
    throw UndefinedScatteringError("scattering amplitude undefined for a zero-amplitude tone");
  }
  const double gamma = lower ? sys.gamma10_mhz : sys.gamma21_mhz;
  const std::complex<double> coherence = lower ? rho(0, 1) : rho(1, 2);
  return ScatterResult::from_reflection(kScatteringPhase * (gamma / rabi) * coherence);
}

// ---------------------------------------------------------------------------
// Time evolution

namespace {

using State = std::array<std::complex<double>, 9>;

DensityMatrix3 to_density(const State& s) {
  Vector9c v;
  for (int i = 0; i < 9; ++i) v(i) = s[i];
  return DensityMatrix3::from_vector(v).hermitized();
}

}  // namespace

std::vector<DensityMatrix3> evolve(const TimeDependentGenerator& gen, const DensityMatrix3& rho0,
                                   std::span<const double> t_grid, const EvolveOptions& opts) {
  namespace odeint = boost::numeric::odeint;
  if (t_grid.empty()) return {};
  for (std::size_t i = 1; i < t_grid.size(); ++i) {
    if (!(t_grid[i] > t_grid[i - 1])) throw DomainError("time grid must be strictly increasing");
  }

  std::vector<DensityMatrix3> out;
  out.reserve(t_grid.size());
  out.push_back(rho0.hermitized());
  if (t_grid.size() == 1) return out;

  // Segment boundaries: grid ends plus any discontinuity strictly inside.
  std::vector<double> edges{t_grid.front()};
  for (double b : gen.breakpoints) {
    if (b > t_grid.front() && b < t_grid.back()) edges.push_back(b);
  }
  edges.push_back(t_grid.back());
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  State x{};
  {
    const Vector9c v = rho0.vectorized();
    for (int i = 0; i < 9; ++i) x[i] = v(i);
  }

  std::size_t next = 1;  // next grid index to record
  double last_time = t_grid.front();
  for (std::size_t seg = 0; seg + 1 < edges.size(); ++seg) {
    const double a = edges[seg];
    const double b = edges[seg + 1];
    // Envelopes are right-continuous; sample inside [a, b) only.
    const double b_inside = std::nextafter(b, a);
    const bool time_dependent = !gen.terms.empty();
    const Superoperator constant = gen.at(0.5 * (a + b));
    const auto rhs = [&](const State& s, State& ds, double t) {
      const Superoperator l = time_dependent ? gen.at(std::clamp(t, a, b_inside)) : constant;
      const Eigen::Map<const Vector9c> sv(s.data());
      Eigen::Map<Vector9c> dv(ds.data());
      dv.noalias() = l * sv;
    };

    std::vector<double> times{a};
    std::vector<bool> record{false};
    while (next < t_grid.size() && t_grid[next] <= b) {
      times.push_back(t_grid[next++]);
      record.push_back(true);
    }
    if (times.back() != b) {
      times.push_back(b);
      record.push_back(false);
    }
    const std::size_t recorded_from = out.size();

    std::size_t seen = 0;
    const auto observer = [&](const State& s, double t) {
      last_time = t;
      if (record[seen++]) out.push_back(to_density(s));
    };
    try {
      auto stepper = odeint::make_controlled(opts.abs_tol, opts.rel_tol,
                                             odeint::runge_kutta_dopri5<State>());
      odeint::integrate_times(stepper, rhs, x, times.begin(), times.end(), opts.initial_step_ns,
                              observer, odeint::max_step_checker(1000000));
    } catch (const odeint::step_adjustment_error& e) {
      throw StiffnessError(std::string("integrator step size underflow: ") + e.what(), last_time);
    } catch (const odeint::no_progress_error& e) {
      throw StiffnessError(std::string("integrator made no progress: ") + e.what(), last_time);
    }
    for (std::size_t i = recorded_from; i < out.size(); ++i) {
      if (!std::isfinite(std::abs(out[i].matrix().sum()))) {
        throw StiffnessError("integrator produced a non-finite state", last_time);
      }
    }
  }
  return out;
}

std::vector<DensityMatrix3> evolve(const Liouvillian& gen, const DensityMatrix3& rho0,
                                   std::span<const double> t_grid, const EvolveOptions& opts) {
  return evolve(TimeDependentGenerator{gen, {}, {}}, rho0, t_grid, opts);
}

// ---------------------------------------------------------------------------
// Two-tone spectroscopy

std::vector<double> TwoToneMap::transmittance() const {
  std::vector<double> out;
  out.reserve(probe.size());
  for (const auto& s : probe) out.push_back(s.transmittance());
  return out;
}

TwoToneMap two_tone_map(const DeviceParams& params, const DriveTone& pump,
                        std::span<const double> probe_freqs_ghz, double probe_rabi_mhz,
                        unsigned threads) {
  const TransitionFrequencies f = transition_frequencies(params);
  const auto nearest = [&](double freq) {
    return std::abs(freq - f.omega01_ghz) <= std::abs(freq - f.omega12_ghz) ? Transition::kLower
                                                                           : Transition::kUpper;
  };
  const Transition pump_line = nearest(pump.frequency_ghz);
  const Transition probe_line = pump_line == Transition::kLower ? Transition::kUpper : Transition::kLower;
  for (double fp : probe_freqs_ghz) {
    if (nearest(fp) == pump_line) {
      throw AmbiguousFrameError("probe frequency " + std::to_string(fp) +
                                " GHz falls on the pumped transition; both tones cannot share one frame");
    }
  }
  if (!(probe_rabi_mhz > 0.0)) throw DomainError("probe Rabi amplitude must be > 0");

  DriveTone placed = pump;
  placed.target = pump_line;
  const double pump_rabi = rabi_from_power(params, placed);
  const double probe_rabi =
      probe_line == Transition::kUpper ? std::numbers::sqrt2 * probe_rabi_mhz : probe_rabi_mhz;

  TwoToneMap map;
  map.probe_line = probe_line;
  map.probe_freqs_ghz.assign(probe_freqs_ghz.begin(), probe_freqs_ghz.end());
  map.probe = parallel_map(probe_freqs_ghz.size(), threads, [&](std::size_t i) {
    const double fp = probe_freqs_ghz[i];
    LadderSystem sys;
    if (pump_line == Transition::kLower) {
      sys = LadderSystem::from_device(params, pump_rabi, probe_rabi,
                                      units::ghz_to_mhz(pump.frequency_ghz - f.omega01_ghz),
                                      units::ghz_to_mhz(fp - f.omega12_ghz));
    } else {
      sys = LadderSystem::from_device(params, probe_rabi, pump_rabi,
                                      units::ghz_to_mhz(fp - f.omega01_ghz),
                                      units::ghz_to_mhz(pump.frequency_ghz - f.omega12_ghz));
    }
    return scattering_from_state(sys, steady_state(build_generator(sys)), probe_line);
  });
  return map;
}

// ---------------------------------------------------------------------------
// Emission spectrum

EmissionSpectrum emission_spectrum(const LadderSystem& sys, const SpectrumOptions& opts) {
  if (!(sys.gamma10_mhz > 0.0)) throw DomainError("emission spectrum needs gamma10 > 0");
  if (opts.points < 16 || !(opts.horizon_over_gamma10 > 0.0)) {
    throw DomainError("spectrum grid needs >= 16 points and a positive horizon");
  }
  const Liouvillian gen = build_generator(sys);
  const DensityMatrix3 rho_ss = steady_state(gen);

  const std::size_t n = opts.points;
  const double tau_max = opts.horizon_over_gamma10 / mhz_to_rad_per_ns(sys.gamma10_mhz);
  const double dtau = tau_max / static_cast<double>(n);
  const Superoperator step = (gen.matrix() * dtau).exp();

  const Matrix3c lowering = projector(0, 1);
  const std::complex<double> mean_plus = rho_ss(0, 1);   // tr(σ₊ρ)
  const std::complex<double> mean_minus = rho_ss(1, 0);  // tr(σ₋ρ)
  const std::complex<double> coherent = mean_plus * mean_minus;

  // g(τ) = tr[σ₊ e^{Lτ}(σ₋ρ_ss)] − ⟨σ₊⟩⟨σ₋⟩
  Vector9c x = DensityMatrix3(lowering * rho_ss.matrix()).vectorized();
  std::vector<std::complex<double>> g(n);
  for (std::size_t k = 0; k < n; ++k) {
    g[k] = x(0 + 3 * 1) - coherent;
    x = step * x;
  }
  const double g0 = std::abs(g.front());
  if (!(g0 > 0.0)) throw HorizonError("incoherent emission vanishes; spectrum undefined");
  if (std::abs(g.back()) > opts.tail_tolerance * g0) {
    throw HorizonError("correlation has not decayed at tau_max; increase the horizon");
  }

  fftw_complex* buf = fftw_alloc_complex(n);
  fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
  for (std::size_t k = 0; k < n; ++k) {
    const double w = (k == 0 ? 0.5 : 1.0) * dtau;
    buf[k][0] = w * g[k].real();
    buf[k][1] = w * g[k].imag();
  }
  fftw_execute(plan);

  EmissionSpectrum out;
  out.coherent_power = coherent.real();
  out.incoherent_power = g.front().real();
  out.detuning_mhz.resize(n);
  out.density.resize(n);
  const double dnu_mhz = 1e3 / (static_cast<double>(n) * dtau);
  const std::size_t half = n / 2;
  for (std::size_t j = 0; j < n; ++j) {
    // Shift so the grid runs from −n/2 to n/2 − 1.
    const std::size_t k = (j + n - half) % n;
    const double index = static_cast<double>(j) - static_cast<double>(half);
    out.detuning_mhz[j] = index * dnu_mhz;
    out.density[j] = 2.0 * buf[k][0];
  }
  fftw_destroy_plan(plan);
  fftw_free(buf);

  double total = 0.0;
  for (double s : out.density) total += s * dnu_mhz;
  for (double& s : out.density) s /= total;
  return out;
}

// ---------------------------------------------------------------------------
// Extrema

namespace {

double parabolic_vertex(double x0, double x1, double x2, double y0, double y1, double y2) {
  const double denom = (x0 - x1) * (x0 - x2) * (x1 - x2);
  const double a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom;
  const double b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / denom;
  if (a == 0.0) return x1;
  return std::clamp(-b / (2.0 * a), x0, x2);
}

template <class Better>
std::vector<double> extrema(std::span<const double> x, std::span<const double> y, Better better) {
  if (x.size() != y.size()) throw DomainError("extrema: x and y differ in length");
  std::vector<double> out;
  for (std::size_t i = 1; i + 1 < y.size(); ++i) {
    if (better(y[i], y[i - 1]) && !better(y[i + 1], y[i]) && better(y[i], y[i + 1])) {
      out.push_back(parabolic_vertex(x[i - 1], x[i], x[i + 1], y[i - 1], y[i], y[i + 1]));
    }
  }
  return out;
}

}  // namespace

std::vector<double> find_minima(std::span<const double> x, std::span<const double> y) {
  return extrema(x, y, [](double a, double b) { return a < b; });
}

std::vector<double> find_maxima(std::span<const double> x, std::span<const double> y,
                                double min_fraction) {
  if (y.empty()) return {};
  const double top = *std::max_element(y.begin(), y.end());
  std::vector<double> kept;
  for (std::size_t i = 1; i + 1 < y.size(); ++i) {
    if (y[i] > y[i - 1] && y[i] > y[i + 1] && y[i] >= min_fraction * top) {
      kept.push_back(parabolic_vertex(x[i - 1], x[i], x[i + 1], y[i - 1], y[i], y[i + 1]));
    }
  }
  return kept;
}

}  // namespace wqed
