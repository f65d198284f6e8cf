// Randomised invariant checks. Every suite is prefixed "Property" so the
// whole set runs with --gtest_filter=Property*.
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "wqed/fitting.hpp"
#include "wqed/lindblad.hpp"
#include "wqed/router.hpp"
#include "wqed/scattering.hpp"

using namespace wqed;

namespace {

constexpr int kSamples = 200;

class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : rng_(seed) {}
  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng_); }
  double log_uniform(double a, double b) { return std::exp(uniform(std::log(a), std::log(b))); }

  DeviceParams device() {
    DeviceParams p;
    p.ej_max_ghz = uniform(5.0, 30.0);
    p.ec_ghz = uniform(0.1, 1.0);
    p.flux = uniform(-2.0, 2.0);
    p.gamma10_mhz = log_uniform(1.0, 300.0);
    p.gamma_phi_mhz = log_uniform(0.01, 100.0);
    p.gamma20_mhz = p.gamma10_mhz + log_uniform(0.01, 300.0);
    return p;
  }

  DensityMatrix3 state() {
    Matrix3c a;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) a(i, j) = {uniform(-1, 1), uniform(-1, 1)};
    Matrix3c rho = a * a.adjoint();
    rho /= rho.trace();
    return DensityMatrix3(rho);
  }

 private:
  std::mt19937_64 rng_;
};

void expect_amplitude_relation(const ScatterResult& s) {
  EXPECT_LT(std::abs(s.t - s.r - 1.0), 1e-14);
  EXPECT_GE(s.transmittance(), 0.0);
  EXPECT_LE(s.transmittance(), 1.0 + 1e-12);
  EXPECT_LE(s.reflectance(), 1.0 + 1e-12);
  EXPECT_GE(s.incoherent(), -1e-12);
}

DeviceParams scaled(DeviceParams p, double c) {
  p.gamma10_mhz *= c;
  p.gamma_phi_mhz *= c;
  p.gamma20_mhz *= c;
  return p;
}

}  // namespace

TEST(PropertyDevice, RabiIsHomogeneousInPower) {
  Sampler s(1);
  for (int i = 0; i < kSamples; ++i) {
    DeviceParams p = s.device();
    p.coupling = i % 2 ? Coupling{DirectCoupling{s.log_uniform(1e8, 1e10)}} : Coupling{CircuitCoupling{s.uniform(0.01, 0.3)}};
    const double w = s.log_uniform(1e-20, 1e-12);
    const double c = s.log_uniform(1e-3, 1e3);
    EXPECT_NEAR(rabi_from_power(p, c * w) / rabi_from_power(p, w), std::sqrt(c), 1e-12 * std::sqrt(c));
  }
}

TEST(PropertyDevice, ControlToProbeRatioIsSqrtTwo) {
  Sampler s(2);
  for (int i = 0; i < kSamples; ++i) {
    DeviceParams p = s.device();
    p.coupling = i % 2 ? Coupling{DirectCoupling{s.log_uniform(1e8, 1e10)}} : Coupling{CircuitCoupling{s.uniform(0.01, 0.3)}};
    const double w = s.log_uniform(1e-20, 1e-12);
    EXPECT_NEAR(rabi_from_power(p, w, Transition::kUpper) / rabi_from_power(p, w), std::numbers::sqrt2, 1e-14);
  }
}

TEST(PropertyDevice, SpectrumIsEvenAndPeriodicInFlux) {
  Sampler s(3);
  for (int i = 0; i < kSamples; ++i) {
    DeviceParams p = s.device();
    p.flux = s.uniform(-0.45, 0.45);
    const double f = transition_frequencies(p).omega01_ghz;
    DeviceParams q = p;
    q.flux = -p.flux;
    EXPECT_NEAR(transition_frequencies(q).omega01_ghz, f, 1e-12);
    q.flux = p.flux + static_cast<double>(1 + i % 3);
    EXPECT_NEAR(transition_frequencies(q).omega01_ghz, f, 1e-9);
  }
}

TEST(PropertyDevice, DecoherenceIdentity) {
  Sampler s(4);
  for (int i = 0; i < kSamples; ++i) {
    const DeviceParams p = s.device();
    EXPECT_EQ(p.gamma01_decoherence_mhz(), p.gamma10_mhz / 2 + p.gamma_phi_mhz);
    EXPECT_EQ(p.gamma21_mhz(), 2 * p.gamma10_mhz);
  }
}

TEST(PropertyScattering, AmplitudeRelationEverywhere) {
  Sampler s(5);
  for (int i = 0; i < kSamples; ++i) {
    const DeviceParams p = s.device();
    expect_amplitude_relation(reflection_two_level(p, s.log_uniform(1e-3, 1e3)));
    expect_amplitude_relation(eit_transmission(p, s.log_uniform(1e-3, 1e4)));
    expect_amplitude_relation(eit_transmission(p, std::numeric_limits<double>::infinity()));
  }
}

TEST(PropertyScattering, RateHomogeneity) {
  Sampler s(6);
  for (int i = 0; i < kSamples; ++i) {
    const DeviceParams p = s.device();
    const double c = s.log_uniform(1e-3, 1e3);
    const double wp = s.log_uniform(1e-2, 1e3);
    const double wc = s.log_uniform(1e-2, 1e3);
    EXPECT_NEAR(std::abs(reflection_two_level(scaled(p, c), c * wp).t - reflection_two_level(p, wp).t), 0.0, 1e-13);
    EXPECT_NEAR(std::abs(eit_transmission(scaled(p, c), c * wc).t - eit_transmission(p, wc).t), 0.0, 1e-13);
  }
}

TEST(PropertyScattering, TransmittanceMonotoneInDrive) {
  Sampler s(7);
  for (int i = 0; i < 50; ++i) {
    const DeviceParams p = s.device();
    double prev_p = 0.0, prev_c = 0.0;
    for (double w = 0.0; w < 2000.0; w += 7.3) {
      const double tp = reflection_two_level(p, w).transmittance();
      const double tc = eit_transmission(p, w).transmittance();
      EXPECT_GE(tp, prev_p - 1e-15);
      EXPECT_GE(tc, prev_c - 1e-15);
      prev_p = tp;
      prev_c = tc;
    }
  }
}

TEST(PropertyEngine, EvolutionKeepsStatesPhysical) {
  Sampler s(8);
  std::vector<double> t(41);
  for (std::size_t k = 0; k < t.size(); ++k) t[k] = 0.5 * static_cast<double>(k);
  for (int i = 0; i < 30; ++i) {
    const DeviceParams p = s.device();
    const auto sys = LadderSystem::from_device(p, s.log_uniform(0.1, 300.0), s.log_uniform(0.1, 600.0),
                                               s.uniform(-100, 100), s.uniform(-100, 100));
    const auto rho0 = s.state();
    for (const auto& r : evolve(build_generator(sys), rho0, t)) {
      EXPECT_LT(r.trace_error(), 1e-8);
      EXPECT_LT(r.hermiticity_error(), 1e-10);
      EXPECT_GT(r.min_eigenvalue(), -1e-9);
    }
  }
}

TEST(PropertyEngine, SteadyStatesArePhysicalFixedPoints) {
  Sampler s(9);
  for (int i = 0; i < kSamples; ++i) {
    const DeviceParams p = s.device();
    const auto sys = LadderSystem::from_device(p, s.log_uniform(0.01, 500.0), s.log_uniform(0.01, 800.0),
                                               s.uniform(-200, 200), s.uniform(-200, 200));
    const auto gen = build_generator(sys);
    const auto rho = steady_state(gen);
    EXPECT_TRUE(rho.is_physical());
    EXPECT_LT(gen.apply(rho.matrix()).norm(), 1e-9);
    expect_amplitude_relation(scattering_from_state(sys, rho));
  }
}

TEST(PropertyEngine, WeakProbeMatchesClosedForms) {
  Sampler s(10);
  for (int i = 0; i < kSamples; ++i) {
    const DeviceParams p = s.device();
    const double probe = 1e-4 * p.gamma10_mhz;
    const double control = s.log_uniform(0.1, 5.0) * p.gamma10_mhz;
    auto sys = LadderSystem::from_device(p, probe);
    EXPECT_LT(std::abs(scattering_from_state(sys, steady_state(build_generator(sys))).t -
                       reflection_two_level(p, probe).t),
              1e-6);
    sys = LadderSystem::from_device(p, probe, control);
    EXPECT_LT(std::abs(scattering_from_state(sys, steady_state(build_generator(sys))).t -
                       eit_transmission(p, control).t),
              1e-6);
  }
}

namespace {

RouterNetwork dephased_network(double gphi, double leak, std::optional<double> control) {
  std::vector<RouterStage> stages;
  const double alphas[] = {0.72, 0.80, 0.88};
  for (int k = 0; k < 3; ++k) {
    RouterStage st;
    st.label = std::string(1, static_cast<char>('A' + k));
    st.params = reference_device();
    st.params.gamma_phi_mhz = gphi;
    st.params.alpha_override_ghz = alphas[k];
    st.circulator.leakage = leak;
    st.control_rabi_mhz = control;
    stages.push_back(st);
  }
  return RouterNetwork(stages);
}

// Power at the intended port over the largest other port, per table row.
std::vector<double> intended_contrasts(const RoutingTableReport& report) {
  std::vector<double> c;
  for (const auto& row : report.rows) {
    if (!row.intended_port) continue;
    const std::size_t want = *row.intended_port - 1;
    double other = 0.0;
    for (std::size_t p = 0; p < row.port_fractions.size(); ++p) {
      if (p != want) other = std::max(other, row.port_fractions[p]);
    }
    c.push_back(other > 0.0 ? row.port_fractions[want] / other : std::numeric_limits<double>::infinity());
  }
  return c;
}

}  // namespace

// With ideal control and leak-free circulators every table row is limited by
// the off-stage reflection, which dephasing can only degrade.
TEST(PropertyRouter, ContrastNeverRisesWithDephasing) {
  Sampler s(11);
  for (int i = 0; i < 20; ++i) {
    std::vector<double> prev;
    std::vector<double> grid{0.0};
    for (int k = 0; k < 6; ++k) grid.push_back(s.uniform(grid.back(), grid.back() + 15.0));
    for (double gphi : grid) {
      const auto c = intended_contrasts(routing_table_verify(dephased_network(gphi, 0.0, std::nullopt), 2.0));
      ASSERT_EQ(c.size(), 4u);
      if (!prev.empty()) {
        for (std::size_t k = 0; k < c.size(); ++k) {
          if (std::isinf(prev[k])) continue;
          EXPECT_LE(c[k], prev[k] * (1 + 1e-12)) << "row " << k << " gphi " << gphi;
        }
      }
      prev = c;
    }
  }
}

// Finite control leaves a residual on-state reflection that dephasing
// suppresses, so the all-controls row gains contrast as the pure dephasing grows.
TEST(PropertyRouter, FiniteControlAllOnRowGainsContrastWithDephasing) {
  const auto lo = intended_contrasts(routing_table_verify(dephased_network(0.0, 0.0, 500.0), 2.0));
  const auto hi = intended_contrasts(routing_table_verify(dephased_network(40.0, 0.0, 500.0), 2.0));
  EXPECT_GT(hi.back(), lo.back());
}

// With leakage the empty row sits at 1/(T + rb R). Weak dephasing lowers R
// linearly but raises T only quadratically, so the contrast first climbs.
TEST(PropertyRouter, LeakyEmptyRowGainsContrastAtWeakDephasing) {
  const auto lo = intended_contrasts(routing_table_verify(dephased_network(0.0, 0.05, std::nullopt), 2.0));
  const auto hi = intended_contrasts(routing_table_verify(dephased_network(2.0, 0.05, std::nullopt), 2.0));
  EXPECT_NEAR(lo.front(), 1.0 / 0.05, 1e-9);
  EXPECT_GT(hi.front(), lo.front());
}

TEST(PropertyRouter, LosslessNetworkConservesPower) {
  std::vector<RouterStage> stages;
  const double alphas[] = {0.72, 0.80, 0.88};
  for (int k = 0; k < 3; ++k) {
    RouterStage st;
    st.label = std::string(1, static_cast<char>('A' + k));
    st.params = reference_device();
    st.params.gamma_phi_mhz = 0.0;
    st.params.alpha_override_ghz = alphas[k];
    stages.push_back(st);
  }
  for (const auto& row : routing_table_verify(RouterNetwork(stages), 2.0).rows) {
    double sum = 0.0;
    for (double f : row.port_fractions) sum += f;
    EXPECT_NEAR(sum, 1.0, 1e-9);
  }
}

TEST(PropertyFitting, GradientsMatchFiniteDifferences) {
  Sampler s(12);
  for (int i = 0; i < kSamples; ++i) {
    const bool power = i % 2 == 0;
    const FitModel model = power ? FitModel::kPowerSweep : FitModel::kOnOff;
    std::vector<double> q = power ? std::vector<double>{s.uniform(20, 200), s.uniform(1, 60), s.log_uniform(1e9, 1e10)}
                                  : std::vector<double>{s.uniform(50, 400), s.uniform(0.0, 0.3)};
    SweepRow row;
    row.x = power ? s.log_uniform(1e-19, 1e-14) : s.uniform(0, 800);
    const OnOffFixed fixed{s.uniform(30, 150), s.uniform(20, 120)};
    const auto g = model_gradient(model, q, row, fixed);
    for (std::size_t k = 0; k < q.size(); ++k) {
      const double h = 1e-5 * std::max(std::abs(q[k]), 1e-3);
      auto up = q, dn = q;
      up[k] += h;
      dn[k] -= h;
      const double fd = (model_value(model, up, row, fixed) - model_value(model, dn, row, fixed)) / (2 * h);
      const double scale = std::max(std::abs(fd), 1e-8 / std::max(std::abs(q[k]), 1e-3));
      EXPECT_NEAR(g[k], fd, 1e-6 * scale) << "model " << fit_model_name(model) << " parameter " << k;
    }
  }
}

TEST(PropertyFitting, AcceptedStepsNeverIncreaseResidual) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::vector<double> xs;
    for (int i = 0; i < 25; ++i) xs.push_back(25.0 * i);
    const auto d = synthesize(FitModel::kOnOff, std::vector<double>{145.0, 0.05}, xs, 0.02, trial_seed(5, seed));
    const auto rep = fit_onoff_curve(d, OnOffFixed{}, OnOffGuess{300.0, 0.3});
    for (std::size_t k = 1; k < rep.accepted_norms.size(); ++k) {
      EXPECT_LE(rep.accepted_norms[k], rep.accepted_norms[k - 1]);
    }
    EXPECT_LE(rep.residual_norm, rep.initial_residual_norm);
  }
}

TEST(PropertyFitting, LogAndLinearParameterisationsAgree) {
  std::vector<double> xs;
  for (int i = 0; i < 30; ++i) xs.push_back(power_for_photon_number(std::pow(10.0, -2.0 + 4.0 * i / 29.0), 7.1, 73.0));
  const auto d = synthesize(FitModel::kPowerSweep, std::vector<double>{73.0, 18.0, 3.15e9}, xs, 0.0, 1);
  FitOptions lin;
  lin.parameterization = Parameterization::kLinear;
  const PowerSweepGuess g{65.0, 22.0, 3.15e9, true};
  const auto a = fit_power_sweep(d, g);
  const auto b = fit_power_sweep(d, g, lin);
  for (const char* name : {"gamma10_mhz", "gamma_phi_mhz"}) {
    EXPECT_NEAR(a.value(name) / b.value(name), 1.0, 1e-4);
  }
  std::vector<double> cs;
  for (int i = 0; i < 25; ++i) cs.push_back(25.0 * i);
  const auto o = synthesize(FitModel::kOnOff, std::vector<double>{145.0, 0.05}, cs, 0.0, 1);
  const auto c = fit_onoff_curve(o, OnOffFixed{}, OnOffGuess{});
  const auto e = fit_onoff_curve(o, OnOffFixed{}, OnOffGuess{}, FitOptions{200, Parameterization::kLinear, 0, 1});
  EXPECT_NEAR(c.value("gamma20_mhz") / e.value("gamma20_mhz"), 1.0, 1e-4);
  EXPECT_NEAR(c.value("r_background") / e.value("r_background"), 1.0, 1e-4);
}
