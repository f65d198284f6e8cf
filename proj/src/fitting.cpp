#include "wqed/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "wqed/device.hpp"
#include "wqed/errors.hpp"
#include "wqed/lindblad.hpp"
#include "wqed/scattering.hpp"

namespace wqed {

// ---------------------------------------------------------------------------
// Dataset

SweepDataset::SweepDataset(std::vector<SweepRow> rows) : rows_(std::move(rows)) {
  if (rows_.size() < 4) throw DomainError("sweep dataset needs at least 4 rows");
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    const SweepRow& r = rows_[i];
    if (!std::isfinite(r.x) || !std::isfinite(r.y) || !std::isfinite(r.detuning_mhz)) {
      throw DomainError("sweep dataset row " + std::to_string(i + 1) + " is not finite");
    }
    if (!(r.weight > 0.0) || !std::isfinite(r.weight)) {
      throw DomainError("sweep dataset row " + std::to_string(i + 1) + " has a non-positive weight");
    }
    if (i > 0) {
      const SweepRow& p = rows_[i - 1];
      const bool increasing = r.detuning_mhz > p.detuning_mhz ||
                              (r.detuning_mhz == p.detuning_mhz && r.x > p.x);
      if (!increasing) {
        throw DomainError("sweep dataset independent variable must be strictly increasing (row " +
                          std::to_string(i + 1) + ")");
      }
    }
  }
}

bool SweepDataset::has_detuning() const {
  return std::any_of(rows_.begin(), rows_.end(), [](const SweepRow& r) { return r.detuning_mhz != 0.0; });
}

SweepDataset SweepDataset::parse_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DomainError("sweep dataset is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  const bool with_detuning = header.size() == 4 && header[3] == "detuning_mhz";
  if (header.size() < 3 || header[0] != "x" || header[1] != "y" || header[2] != "weight" ||
      (header.size() == 4 && !with_detuning) || header.size() > 4) {
    throw DomainError("sweep dataset header must be x,y,weight[,detuning_mhz]");
  }
  std::vector<SweepRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> values;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw DomainError("sweep dataset line " + std::to_string(lineno) + ": bad number '" + cell + "'");
      }
    }
    if (values.size() != header.size()) {
      throw DomainError("sweep dataset line " + std::to_string(lineno) + ": expected " +
                        std::to_string(header.size()) + " columns");
    }
    rows.push_back({values[0], values[1], values[2], with_detuning ? values[3] : 0.0});
  }
  return SweepDataset(std::move(rows));
}

SweepDataset SweepDataset::read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open sweep dataset " + path.string());
  return parse_csv(in);
}

void SweepDataset::write_csv(std::ostream& out) const {
  const bool det = has_detuning();
  out << "x,y,weight" << (det ? ",detuning_mhz" : "") << '\n';
  out.precision(17);
  for (const SweepRow& r : rows_) {
    out << r.x << ',' << r.y << ',' << r.weight;
    if (det) out << ',' << r.detuning_mhz;
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Models

FitModel parse_fit_model(std::string_view id) {
  if (id == "eq1_power") return FitModel::kPowerSweep;
  if (id == "eq4_onoff") return FitModel::kOnOff;
  throw DomainError("unknown model_id '" + std::string(id) + "' (expected eq1_power or eq4_onoff)");
}

std::string_view fit_model_name(FitModel model) {
  return model == FitModel::kPowerSweep ? "eq1_power" : "eq4_onoff";
}

namespace {

constexpr std::size_t parameter_count(FitModel model) { return model == FitModel::kPowerSweep ? 3 : 2; }

void check_arity(FitModel model, std::span<const double> params) {
  if (params.size() != parameter_count(model)) {
    throw DomainError("model " + std::string(fit_model_name(model)) + " takes " +
                      std::to_string(parameter_count(model)) + " parameters");
  }
}

// Two-level transmittance at finite detuning from the engine steady state.
double detuned_power_transmittance(std::span<const double> p, const SweepRow& row) {
  LadderSystem sys;
  sys.gamma10_mhz = p[0];
  sys.gamma21_mhz = 2.0 * p[0];
  sys.gamma_phi_mhz = p[1];
  sys.gamma_phi2_mhz = 0.0;
  sys.probe_rabi_mhz = p[2] * std::sqrt(row.x);
  sys.probe_detuning_mhz = row.detuning_mhz;
  if (!(sys.probe_rabi_mhz > 0.0)) {
    // Linear response: the weak-drive limit of r is independent of Ω_p.
    sys.probe_rabi_mhz = 1e-6 * p[0];
  }
  return scattering_from_state(sys, steady_state(build_generator(sys))).transmittance();
}

}  // namespace

double model_value(FitModel model, std::span<const double> params, const SweepRow& row,
                   const OnOffFixed& fixed) {
  check_arity(model, params);
  if (model == FitModel::kPowerSweep) {
    if (row.detuning_mhz != 0.0) return detuned_power_transmittance(params, row);
    const double gamma = params[0];
    const double gphi = params[1];
    const double k = params[2];
    const double decoherence = 0.5 * gamma + gphi;
    const double r0 = gamma / (gamma + 2.0 * gphi);
    const double s = k * k * row.x / (gamma * decoherence);
    const double t = 1.0 - r0 / (1.0 + s);
    return t * t;
  }
  const double g20 = params[0];
  const double rb = params[1];
  const double gamma = fixed.gamma10_mhz;
  const double denom_off = 2.0 * fixed.gamma01_decoherence_mhz;
  const double denom = denom_off + row.x * row.x / (2.0 * g20);
  const double r_on = std::pow(gamma / denom, 2);
  const double r_off = std::pow(gamma / denom_off, 2);
  return (r_on + rb) / (r_off + rb);
}

std::vector<double> model_gradient(FitModel model, std::span<const double> params,
                                   const SweepRow& row, const OnOffFixed& fixed) {
  check_arity(model, params);
  if (model == FitModel::kPowerSweep) {
    if (row.detuning_mhz != 0.0) throw DomainError("no analytic gradient for detuned rows");
    const double gamma = params[0];
    const double gphi = params[1];
    const double k = params[2];
    const double decoherence = 0.5 * gamma + gphi;
    const double sum = gamma + 2.0 * gphi;
    const double r0 = gamma / sum;
    const double s = k * k * row.x / (gamma * decoherence);
    const double t = 1.0 - r0 / (1.0 + s);
    const double du_dr0 = 1.0 / (1.0 + s);
    const double du_ds = -r0 / ((1.0 + s) * (1.0 + s));
    const double dr0_dg = 2.0 * gphi / (sum * sum);
    const double dr0_dphi = -2.0 * gamma / (sum * sum);
    const double ds_dg = -s * (1.0 / gamma + 0.5 / decoherence);
    const double ds_dphi = -s / decoherence;
    const double ds_dk = k != 0.0 ? 2.0 * s / k : 0.0;
    const double dT_du = -2.0 * t;
    return {dT_du * (du_dr0 * dr0_dg + du_ds * ds_dg), dT_du * (du_dr0 * dr0_dphi + du_ds * ds_dphi),
            dT_du * du_ds * ds_dk};
  }
  const double g20 = params[0];
  const double rb = params[1];
  const double gamma = fixed.gamma10_mhz;
  const double denom_off = 2.0 * fixed.gamma01_decoherence_mhz;
  const double omega2 = row.x * row.x;
  const double denom = denom_off + omega2 / (2.0 * g20);
  const double r_on = std::pow(gamma / denom, 2);
  const double r_off = std::pow(gamma / denom_off, 2);
  const double dr_dg20 = gamma * gamma * omega2 / (denom * denom * denom * g20 * g20);
  return {dr_dg20 / (r_off + rb), (r_off - r_on) / ((r_off + rb) * (r_off + rb))};
}

std::vector<double> residuals(FitModel model, std::span<const double> params, const SweepDataset& data,
                              const OnOffFixed& fixed) {
  std::vector<double> out;
  out.reserve(data.size());
  for (const SweepRow& row : data.rows()) {
    out.push_back(row.weight * (model_value(model, params, row, fixed) - row.y));
  }
  return out;
}

std::vector<double> residuals(std::string_view model_id, std::span<const double> params,
                              const SweepDataset& data, const OnOffFixed& fixed) {
  return residuals(parse_fit_model(model_id), params, data, fixed);
}

// ---------------------------------------------------------------------------
// Optimiser

namespace {

enum class Transform { kLog, kLogit, kLinear };

double to_internal(Transform tr, double p) {
  switch (tr) {
    case Transform::kLog:
      if (!(p > 0.0)) throw DomainError("initial guess must be > 0 for a log-parameterised value");
      return std::log(p);
    case Transform::kLogit:
      if (!(p > 0.0 && p < 1.0)) throw DomainError("initial background reflection must lie in (0, 1)");
      return std::log(p / (1.0 - p));
    case Transform::kLinear:
      return p;
  }
  return p;
}

double to_natural(Transform tr, double theta) {
  switch (tr) {
    case Transform::kLog:
      return std::exp(theta);
    case Transform::kLogit:
      return 1.0 / (1.0 + std::exp(-theta));
    case Transform::kLinear:
      return theta;
  }
  return theta;
}

// dp/dθ
double natural_derivative(Transform tr, double p) {
  switch (tr) {
    case Transform::kLog:
      return p;
    case Transform::kLogit:
      return p * (1.0 - p);
    case Transform::kLinear:
      return 1.0;
  }
  return 1.0;
}

struct Problem {
  FitModel model;
  std::vector<std::string> names;
  std::vector<double> start;      // natural units, all parameters
  std::vector<bool> free;
  std::vector<Transform> transforms;
  OnOffFixed fixed;
};

class Optimizer {
 public:
  Optimizer(const Problem& problem, const SweepDataset& data, const FitOptions& options)
      : problem_(problem), data_(data), options_(options) {
    for (std::size_t i = 0; i < problem_.free.size(); ++i) {
      if (problem_.free[i]) free_index_.push_back(i);
    }
  }

  std::vector<double> natural(const Eigen::VectorXd& theta) const {
    std::vector<double> p = problem_.start;
    for (std::size_t j = 0; j < free_index_.size(); ++j) {
      const std::size_t i = free_index_[j];
      p[i] = to_natural(problem_.transforms[i], theta(static_cast<Eigen::Index>(j)));
    }
    return p;
  }

  Eigen::VectorXd residual_vector(const Eigen::VectorXd& theta) const {
    const std::vector<double> r = residuals(problem_.model, natural(theta), data_, problem_.fixed);
    return Eigen::Map<const Eigen::VectorXd>(r.data(), static_cast<Eigen::Index>(r.size()));
  }

  Eigen::MatrixXd jacobian(const Eigen::VectorXd& theta) const {
    const auto n = static_cast<Eigen::Index>(data_.size());
    const auto m = static_cast<Eigen::Index>(free_index_.size());
    Eigen::MatrixXd jac(n, m);
    const std::vector<double> p = natural(theta);
    if (!data_.has_detuning()) {
      for (Eigen::Index row = 0; row < n; ++row) {
        const SweepRow& r = data_.rows()[static_cast<std::size_t>(row)];
        const std::vector<double> grad = model_gradient(problem_.model, p, r, problem_.fixed);
        for (Eigen::Index j = 0; j < m; ++j) {
          const std::size_t i = free_index_[static_cast<std::size_t>(j)];
          jac(row, j) = r.weight * grad[i] * natural_derivative(problem_.transforms[i], p[i]);
        }
      }
      return jac;
    }
    // Engine-backed model: central differences in the internal coordinates.
    for (Eigen::Index j = 0; j < m; ++j) {
      const double h = 1e-6 * std::max(1.0, std::abs(theta(j)));
      Eigen::VectorXd up = theta;
      Eigen::VectorXd down = theta;
      up(j) += h;
      down(j) -= h;
      jac.col(j) = (residual_vector(up) - residual_vector(down)) / (2.0 * h);
    }
    return jac;
  }

  FitReport run() const {
    const auto m = static_cast<Eigen::Index>(free_index_.size());
    Eigen::VectorXd theta(m);
    for (Eigen::Index j = 0; j < m; ++j) {
      const std::size_t i = free_index_[static_cast<std::size_t>(j)];
      theta(j) = to_internal(problem_.transforms[i], problem_.start[i]);
    }

    FitReport report;
    report.model = std::string(fit_model_name(problem_.model));
    Eigen::VectorXd r = residual_vector(theta);
    Eigen::MatrixXd jac = jacobian(theta);
    check_rank(jac);
    double cost = 0.5 * r.squaredNorm();
    Eigen::VectorXd grad = jac.transpose() * r;
    report.initial_residual_norm = r.norm();
    report.initial_gradient_norm = grad.norm();
    report.accepted_norms.push_back(r.norm());

    double lambda = 1e-3;
    int iter = 0;
    for (; iter < options_.max_iterations; ++iter) {
      if (grad.norm() <= 1e-8 * report.initial_gradient_norm || grad.norm() == 0.0) {
        report.converged = true;
        report.stop_reason = "gradient";
        break;
      }
      const Eigen::MatrixXd normal = jac.transpose() * jac;
      Eigen::MatrixXd damped = normal;
      for (Eigen::Index j = 0; j < m; ++j) damped(j, j) += lambda * std::max(normal(j, j), 1e-300);
      const Eigen::VectorXd step = damped.ldlt().solve(-grad);
      if (!step.allFinite()) throw DegenerateFitError("normal equations are singular");

      const Eigen::VectorXd trial = theta + step;
      const Eigen::VectorXd r_trial = residual_vector(trial);
      const double cost_trial = r_trial.allFinite() ? 0.5 * r_trial.squaredNorm()
                                                    : std::numeric_limits<double>::infinity();
      report.last_relative_step = step.norm() / (1.0 + theta.norm());
      if (cost_trial < cost) {
        theta = trial;
        r = r_trial;
        cost = cost_trial;
        jac = jacobian(theta);
        grad = jac.transpose() * r;
        report.accepted_norms.push_back(r.norm());
        lambda = std::max(lambda / 3.0, 1e-12);
        if (report.last_relative_step < 1e-10) {
          report.converged = true;
          report.stop_reason = "step";
          ++iter;
          break;
        }
      } else {
        lambda *= 4.0;
        if (report.last_relative_step < 1e-10 || lambda > 1e16) {
          // No descent direction left at this resolution.
          report.converged = true;
          report.stop_reason = "step";
          ++iter;
          break;
        }
      }
    }
    if (!report.converged) report.stop_reason = "max_iterations";
    report.iterations = iter;
    report.residual_norm = r.norm();
    report.gradient_norm = grad.norm();

    check_rank(jac);
    const Eigen::MatrixXd normal = jac.transpose() * jac;
    const auto dof = static_cast<double>(data_.size()) - static_cast<double>(m);
    const double variance = dof > 0 ? 2.0 * cost / dof : 0.0;
    const Eigen::MatrixXd cov = variance * normal.inverse();

    const std::vector<double> p = natural(theta);
    for (std::size_t i = 0; i < p.size(); ++i) {
      FitParameter fp{problem_.names[i], p[i], 0.0, std::nullopt, !problem_.free[i]};
      const auto it = std::find(free_index_.begin(), free_index_.end(), i);
      if (it != free_index_.end()) {
        const auto j = static_cast<Eigen::Index>(it - free_index_.begin());
        fp.sigma = std::abs(natural_derivative(problem_.transforms[i], p[i])) * std::sqrt(std::max(cov(j, j), 0.0));
      }
      report.parameters.push_back(fp);
    }
    return report;
  }

 private:
  void check_rank(const Eigen::MatrixXd& jac) const {
    if (jac.cols() == 0) throw DegenerateFitError("no free parameters");
    if (!jac.allFinite()) throw DegenerateFitError("model Jacobian is not finite");
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac);
    const auto& sv = svd.singularValues();
    if (!(sv(0) > 0.0) || sv(sv.size() - 1) < 1e-10 * sv(0)) {
      throw DegenerateFitError("normal equations are singular: the data do not constrain every free parameter");
    }
  }

  const Problem& problem_;
  const SweepDataset& data_;
  const FitOptions& options_;
  std::vector<std::size_t> free_index_;
};

void require_variation(const SweepDataset& data) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const SweepRow& r : data.rows()) {
    lo = std::min(lo, r.y);
    hi = std::max(hi, r.y);
  }
  if (hi - lo <= 1e-12 * std::max(1.0, std::max(std::abs(lo), std::abs(hi)))) {
    throw DegenerateFitError("observable is constant across the sweep; nothing to fit");
  }
}

FitReport fit_problem(const Problem& problem, const SweepDataset& data, const FitOptions& options) {
  require_variation(data);
  FitReport report = Optimizer(problem, data, options).run();
  if (options.bootstrap_samples <= 0) return report;

  const std::size_t np = report.parameters.size();
  std::vector<std::vector<double>> samples(np);
  Problem from_optimum = problem;
  for (std::size_t i = 0; i < np; ++i) from_optimum.start[i] = report.parameters[i].value;
  FitOptions inner = options;
  inner.bootstrap_samples = 0;
  for (int b = 0; b < options.bootstrap_samples; ++b) {
    std::mt19937_64 rng(trial_seed(options.seed, static_cast<std::uint64_t>(b)));
    std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);
    std::vector<SweepRow> rows(data.size());
    std::vector<double> multiplicity(data.size(), 0.0);
    for (std::size_t k = 0; k < data.size(); ++k) multiplicity[pick(rng)] += 1.0;
    // Resampled cases enter as integer weights; rows never drawn are kept with a tiny weight
    // so the dataset ordering contract still holds.
    for (std::size_t k = 0; k < data.size(); ++k) {
      rows[k] = data.rows()[k];
      rows[k].weight *= multiplicity[k] > 0.0 ? std::sqrt(multiplicity[k]) : 1e-9;
    }
    try {
      const FitReport rep = Optimizer(from_optimum, SweepDataset(std::move(rows)), inner).run();
      for (std::size_t i = 0; i < np; ++i) samples[i].push_back(rep.parameters[i].value);
    } catch (const DegenerateFitError&) {
      // Replica lost identifiability; skip it.
    }
  }
  for (std::size_t i = 0; i < np; ++i) {
    const auto& s = samples[i];
    if (s.size() < 2 || report.parameters[i].fixed) continue;
    const double mean = std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
    double var = 0.0;
    for (double v : s) var += (v - mean) * (v - mean);
    report.parameters[i].bootstrap_sigma = std::sqrt(var / static_cast<double>(s.size() - 1));
  }
  return report;
}

Transform rate_transform(const FitOptions& o) {
  return o.parameterization == Parameterization::kLog ? Transform::kLog : Transform::kLinear;
}

}  // namespace

const FitParameter& FitReport::parameter(std::string_view name) const {
  for (const auto& p : parameters) {
    if (p.name == name) return p;
  }
  throw DomainError("fit report has no parameter '" + std::string(name) + "'");
}

std::string FitReport::to_key_value() const {
  std::ostringstream out;
  out.precision(12);
  out << "model=" << model << '\n';
  for (const auto& p : parameters) {
    out << p.name << '=' << p.value << '\n';
    out << p.name << "_sigma=" << p.sigma << '\n';
    if (p.bootstrap_sigma) out << p.name << "_bootstrap_sigma=" << *p.bootstrap_sigma << '\n';
    if (p.fixed) out << p.name << "_fixed=true\n";
  }
  out << "residual_norm=" << residual_norm << '\n'
      << "initial_residual_norm=" << initial_residual_norm << '\n'
      << "gradient_norm=" << gradient_norm << '\n'
      << "initial_gradient_norm=" << initial_gradient_norm << '\n'
      << "converged=" << (converged ? "true" : "false") << '\n'
      << "stop_reason=" << stop_reason << '\n'
      << "iterations=" << iterations << '\n';
  return out.str();
}

FitReport fit_power_sweep(const SweepDataset& data, const PowerSweepGuess& init, const FitOptions& options) {
  const Transform tr = rate_transform(options);
  Problem problem{FitModel::kPowerSweep,
                  {"gamma10_mhz", "gamma_phi_mhz", "coupling_k"},
                  {init.gamma10_mhz, init.gamma_phi_mhz, init.k_mhz_per_sqrt_w},
                  {true, true, !init.fix_k},
                  {tr, tr, tr},
                  {}};
  return fit_problem(problem, data, options);
}

FitReport fit_onoff_curve(const SweepDataset& data, const OnOffFixed& fixed, const OnOffGuess& init,
                          const FitOptions& options) {
  const bool log = options.parameterization == Parameterization::kLog;
  Problem problem{FitModel::kOnOff,
                  {"gamma20_mhz", "r_background"},
                  {init.gamma20_mhz, init.r_background},
                  {true, true},
                  {log ? Transform::kLog : Transform::kLinear, log ? Transform::kLogit : Transform::kLinear},
                  fixed};
  return fit_problem(problem, data, options);
}

std::uint64_t trial_seed(std::uint64_t master, std::uint64_t trial) {
  // splitmix64 finaliser
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (trial + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

SweepDataset synthesize(FitModel model, std::span<const double> truth, std::span<const double> xs,
                        double relative_noise, std::uint64_t seed, const OnOffFixed& fixed,
                        std::span<const double> detunings_mhz) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  const std::vector<double> zero{0.0};
  const std::span<const double> dets = detunings_mhz.empty() ? std::span<const double>(zero) : detunings_mhz;
  std::vector<SweepRow> rows;
  for (double d : dets) {
    for (double x : xs) {
      SweepRow row{x, 0.0, 1.0, d};
      row.y = model_value(model, truth, row, fixed) * (1.0 + relative_noise * noise(rng));
      rows.push_back(row);
    }
  }
  return SweepDataset(std::move(rows));
}

}  // namespace wqed
