#include "latentacc/model.hpp"

#include <algorithm>
#include <cmath>

#include "latentacc/errors.hpp"
#include "latentacc/fisher.hpp"
#include "latentacc/numerics.hpp"
#include "latentacc/quadrature.hpp"

namespace latentacc {

namespace {

void check_label(const ModelSpec& m, int y) {
  if (y < 1 || y > m.components()) {
    throw DomainError("label " + std::to_string(y) + " outside {1.." +
                      std::to_string(m.components()) + "}");
  }
}

double log_weight(const ParamVec& w, int k) {
  return k == 1 ? std::log(w.weight()) : std::log1p(-w.weight());
}

}  // namespace

std::string to_string(Family family) {
  return family == Family::binomial_mixture ? "binomial_mixture" : "gaussian_mixture_1d";
}

Family family_from_string(const std::string& name) {
  if (name == "binomial_mixture") return Family::binomial_mixture;
  if (name == "gaussian_mixture_1d") return Family::gaussian_mixture_1d;
  throw DomainError("unknown model family '" + name + "'");
}

ModelSpec::ModelSpec(Family family, int trial_count)
    : family_(family), trial_count_(trial_count) {
  if (family_ == Family::binomial_mixture) {
    // Two binomial components are identifiable from their mixture only when
    // N_t >= 2K - 1.
    if (trial_count_ < 3) throw DomainError("binomial mixture needs trial_count >= 3");
    log_binom_.resize(static_cast<std::size_t>(trial_count_) + 1);
    for (int x = 0; x <= trial_count_; ++x) {
      log_binom_[static_cast<std::size_t>(x)] = std::lgamma(trial_count_ + 1.0) -
                                                std::lgamma(x + 1.0) -
                                                std::lgamma(trial_count_ - x + 1.0);
    }
  }
}

ModelSpec ModelSpec::binomial_mixture(int trial_count) {
  return ModelSpec(Family::binomial_mixture, trial_count);
}

ModelSpec ModelSpec::gaussian_mixture_1d() { return ModelSpec(Family::gaussian_mixture_1d, 0); }

CoordDomain ModelSpec::domain(std::size_t i) const {
  if (i == 0 || family_ == Family::binomial_mixture) return CoordDomain::unit_interval;
  return CoordDomain::real_line;
}

std::vector<double> ModelSpec::support() const {
  std::vector<double> s;
  if (finite_support()) {
    for (int x = 0; x <= trial_count_; ++x) s.push_back(x);
  }
  return s;
}

void ModelSpec::check_observation(double x) const {
  if (!std::isfinite(x)) throw DomainError("observation is not finite");
  if (family_ == Family::binomial_mixture) {
    if (x < 0 || x > trial_count_ || x != std::floor(x)) {
      throw DomainError("observation " + std::to_string(x) + " outside {0.." +
                        std::to_string(trial_count_) + "}");
    }
  }
}

std::string ModelSpec::name() const {
  if (family_ == Family::binomial_mixture) {
    return "binomial_mixture(N_t=" + std::to_string(trial_count_) + ")";
  }
  return "gaussian_mixture_1d";
}

ParamVec::ParamVec(const ModelSpec& model, std::vector<double> values)
    : values_(std::move(values)) {
  if (values_.size() != model.dim()) {
    throw DomainError("parameter has length " + std::to_string(values_.size()) +
                      ", model expects " + std::to_string(model.dim()));
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const double v = values_[i];
    if (!std::isfinite(v)) throw DomainError("parameter coordinate is not finite");
    if (model.domain(i) == CoordDomain::unit_interval && !(v > 0.0 && v < 1.0)) {
      throw DomainError("parameter coordinate " + std::to_string(i) + " = " +
                        std::to_string(v) + " outside the open interval (0, 1)");
    }
  }
}

double joint_log_density(const ModelSpec& m, const ParamVec& w, double x, int y) {
  check_label(m, y);
  m.check_observation(x);
  return log_weight(w, y) + m.component_log_density(w.theta(y), x);
}

double marginal_log_density(const ModelSpec& m, const ParamVec& w, double x) {
  m.check_observation(x);
  return log_add_exp(log_weight(w, 1) + m.component_log_density(w.theta(1), x),
                     log_weight(w, 2) + m.component_log_density(w.theta(2), x));
}

std::vector<double> latent_log_conditional(const ModelSpec& m, const ParamVec& w, double x) {
  m.check_observation(x);
  const double l1 = log_weight(w, 1) + m.component_log_density(w.theta(1), x);
  const double l2 = log_weight(w, 2) + m.component_log_density(w.theta(2), x);
  const double lz = log_add_exp(l1, l2);
  return {l1 - lz, l2 - lz};
}

std::vector<double> latent_conditional(const ModelSpec& m, const ParamVec& w, double x) {
  auto out = latent_log_conditional(m, w, x);
  for (double& v : out) v = std::exp(v);
  return out;
}

std::vector<double> score_joint(const ModelSpec& m, const ParamVec& w, double x, int y) {
  check_label(m, y);
  m.check_observation(x);
  std::vector<double> s(m.dim(), 0.0);
  const std::size_t k = static_cast<std::size_t>(y);
  s[0] = y == 1 ? 1.0 / w.weight() : -1.0 / (1.0 - w.weight());
  s[k] = m.component_score(w.theta(y), x);
  return s;
}

std::vector<double> score_marginal(const ModelSpec& m, const ParamVec& w, double x) {
  const auto r = latent_conditional(m, w, x);
  std::vector<double> s(m.dim(), 0.0);
  for (int y = 1; y <= m.components(); ++y) {
    const auto sj = score_joint(m, w, x, y);
    for (std::size_t i = 0; i < s.size(); ++i) s[i] += r[static_cast<std::size_t>(y - 1)] * sj[i];
  }
  return s;
}

std::vector<double> score_conditional(const ModelSpec& m, const ParamVec& w, double x, int y) {
  auto s = score_joint(m, w, x, y);
  const auto sm = score_marginal(m, w, x);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] -= sm[i];
  return s;
}

Dataset sample_joint(const ModelSpec& m, const ParamVec& w, std::size_t n,
                     RandomStream& stream) {
  if (n == 0) throw DomainError("sample_joint needs n >= 1");
  Dataset data;
  data.xs.resize(n);
  std::vector<int> ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int y = stream.bernoulli(w.weight()) ? 1 : 2;
    ys[i] = y;
    if (m.family() == Family::binomial_mixture) {
      data.xs[i] = stream.binomial(m.trial_count(), w.theta(y));
    } else {
      data.xs[i] = stream.normal(w.theta(y), 1.0);
    }
  }
  data.ys = std::move(ys);
  return data;
}

IdentifiabilityReport validate_identifiability(const ModelSpec& m, const ParamVec& w) {
  IdentifiabilityReport r;
  r.min_mixing = std::min(w.weight(), 1.0 - w.weight());
  if (m.finite_support()) {
    double tv = 0.0;
    for (double x : m.support()) {
      tv += std::abs(std::exp(m.component_log_density(w.theta(1), x)) -
                     std::exp(m.component_log_density(w.theta(2), x)));
    }
    r.component_distance = 0.5 * tv;
  } else {
    r.component_distance = std::erf(std::abs(w.theta(1) - w.theta(2)) / (2.0 * std::sqrt(2.0)));
  }
  r.min_eig_ix = sym_eigenvalues(fisher_marginal(m, w)).smallest();
  r.ok = r.min_mixing > 1e-6 && r.component_distance > 1e-6 && r.min_eig_ix > 1e-8;
  return r;
}

ParamVec swap_labels(const ModelSpec& m, const ParamVec& w) {
  return ParamVec(m, {1.0 - w.weight(), w.theta(2), w.theta(1)});
}

}  // namespace latentacc
