#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <tuple>
#include <utility>

#include "latentacc/errors.hpp"
#include "latentacc/estimators.hpp"
#include "latentacc/quadrature.hpp"

namespace latentacc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_beta_fn(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

double log_beta_pdf(double t, double eta) {
  return (eta - 1.0) * (std::log(t) + std::log1p(-t)) - log_beta_fn(eta, eta);
}

struct ThetaRange {
  double lo;
  double hi;
};

ThetaRange theta_range(const ModelSpec& m, const Prior& prior) {
  if (m.family() == Family::binomial_mixture) return {0.0, 1.0};
  return {prior.mean_lo, prior.mean_hi};
}

double log_theta_density(const ModelSpec& m, const Prior& prior, double t) {
  if (m.family() == Family::binomial_mixture) return log_beta_pdf(t, prior.eta);
  if (t < prior.mean_lo || t > prior.mean_hi) return kNegInf;
  return -std::log(prior.mean_hi - prior.mean_lo);
}

}  // namespace

std::string to_string(LabelOrder order) {
  switch (order) {
    case LabelOrder::none:
      return "none";
    case LabelOrder::first_larger:
      return "first_larger";
    case LabelOrder::second_larger:
      return "second_larger";
  }
  return "unknown";
}

LabelOrder label_order_from_string(const std::string& name) {
  if (name == "none") return LabelOrder::none;
  if (name == "first_larger") return LabelOrder::first_larger;
  if (name == "second_larger") return LabelOrder::second_larger;
  throw DomainError("unknown label order '" + name + "'");
}

Prior Prior::aligned(const ModelSpec& m, const ParamVec& w_star, double eta) {
  Prior p;
  p.eta = eta;
  if (w_star.theta(1) == w_star.theta(2)) {
    throw DomainError("aligned prior needs distinct component parameters");
  }
  p.order = w_star.theta(1) > w_star.theta(2) ? LabelOrder::first_larger : LabelOrder::second_larger;
  p.require_support(m, w_star);
  return p;
}

double Prior::log_density(const ModelSpec& m, const ParamVec& w) const {
  double lp = log_beta_pdf(w.weight(), eta) + log_theta_density(m, *this, w.theta(1)) +
              log_theta_density(m, *this, w.theta(2));
  switch (order) {
    case LabelOrder::none:
      return lp;
    case LabelOrder::first_larger:
      return w.theta(1) > w.theta(2) ? lp + std::log(2.0) : kNegInf;
    case LabelOrder::second_larger:
      return w.theta(2) > w.theta(1) ? lp + std::log(2.0) : kNegInf;
  }
  return lp;
}

void Prior::require_support(const ModelSpec& m, const ParamVec& w) const {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw DomainError("prior eta must be positive");
  if (m.family() == Family::gaussian_mixture_1d && !(mean_lo < mean_hi)) {
    throw DomainError("prior mean box must have mean_lo < mean_hi");
  }
  if (!std::isfinite(log_density(m, w))) {
    throw DomainError("prior density vanishes at the true parameter");
  }
}

ParameterGrid::ParameterGrid(const ModelSpec& model, const Prior& prior, std::size_t nodes_per_axis)
    : model_(model), prior_(prior), nodes_per_axis_(nodes_per_axis) {
  if (nodes_per_axis < 2) throw DomainError("grid needs at least two nodes per axis");
  if (!(prior.eta > 0.0)) throw DomainError("prior eta must be positive");
  const ThetaRange range = theta_range(model, prior);
  if (!(range.lo < range.hi)) throw DomainError("empty component parameter range");

  // Each axis uses the Gauss-Jacobi rule whose weight carries the power
  // factors of the prior (and of the Jacobian under an ordered prior), so the
  // prior mass itself is integrated exactly for any eta.
  const double eta = prior.eta;
  const bool binomial = model.family() == Family::binomial_mixture;
  const bool ordered = prior.order != LabelOrder::none;
  const double log_norm_theta = binomial ? log_beta_fn(eta, eta) : std::log(range.hi - range.lo);

  const QuadratureRule ra = gauss_jacobi(nodes_per_axis, 0.0, 1.0, eta - 1.0, eta - 1.0);
  QuadratureRule rt, ru;
  if (!ordered) {
    rt = binomial ? gauss_jacobi(nodes_per_axis, 0.0, 1.0, eta - 1.0, eta - 1.0)
                  : gauss_legendre(nodes_per_axis, range.lo, range.hi);
    ru = rt;
  } else if (binomial) {
    // theta_hi^(2 eta - 1) (1 - theta_hi)^(eta - 1) and u^(eta - 1)
    rt = gauss_jacobi(nodes_per_axis, 0.0, 1.0, eta - 1.0, 2.0 * eta - 1.0);
    ru = gauss_jacobi(nodes_per_axis, 0.0, 1.0, 0.0, eta - 1.0);
  } else {
    rt = gauss_jacobi(nodes_per_axis, range.lo, range.hi, 0.0, 1.0);
    ru = gauss_legendre(nodes_per_axis, 0.0, 1.0);
  }

  const std::size_t total = nodes_per_axis * nodes_per_axis * nodes_per_axis;
  weight_.reserve(total);
  theta1_.reserve(total);
  theta2_.reserve(total);
  log_mass_.reserve(total);

  const double base = -log_beta_fn(eta, eta) - 2.0 * log_norm_theta + (ordered ? std::log(2.0) : 0.0);
  for (std::size_t ia = 0; ia < nodes_per_axis; ++ia) {
    const double a = ra.nodes[ia];
    const double la = std::log(ra.weights[ia]) + base;
    for (std::size_t it = 0; it < nodes_per_axis; ++it) {
      for (std::size_t iu = 0; iu < nodes_per_axis; ++iu) {
        double t1, t2, lm;
        if (!ordered) {
          t1 = rt.nodes[it];
          t2 = ru.nodes[iu];
          lm = std::log(rt.weights[it]) + std::log(ru.weights[iu]);
        } else {
          const double hi = rt.nodes[it];
          const double u = ru.nodes[iu];
          const double lo = range.lo + (hi - range.lo) * u;
          lm = std::log(rt.weights[it]) + std::log(ru.weights[iu]);
          if (binomial) lm += (eta - 1.0) * std::log1p(-hi * u);
          t1 = prior.order == LabelOrder::first_larger ? hi : lo;
          t2 = prior.order == LabelOrder::first_larger ? lo : hi;
        }
        weight_.push_back(a);
        theta1_.push_back(t1);
        theta2_.push_back(t2);
        log_mass_.push_back(la + lm);
      }
    }
  }

  log_weight_.resize(total);
  log_weight_c_.resize(total);
  for (std::size_t i = 0; i < total; ++i) {
    log_weight_[i] = std::log(weight_[i]);
    log_weight_c_[i] = std::log1p(-weight_[i]);
  }

  if (model.finite_support()) {
    const std::vector<double> support = model.support();
    support_size_ = support.size();
    table_joint_.resize(total * support_size_ * 2);
    table_marginal_.resize(total * support_size_);
    for (std::size_t i = 0; i < total; ++i) {
      for (std::size_t s = 0; s < support_size_; ++s) {
        const double x = support[s];
        const double l1 = log_weight_[i] + model.component_log_density(theta1_[i], x);
        const double l2 = log_weight_c_[i] + model.component_log_density(theta2_[i], x);
        table_joint_[(i * support_size_ + s) * 2] = l1;
        table_joint_[(i * support_size_ + s) * 2 + 1] = l2;
        table_marginal_[i * support_size_ + s] = log_add_exp(l1, l2);
      }
    }
  }
}

ParamVec ParameterGrid::node(std::size_t i) const {
  return ParamVec(model_, {weight_.at(i), theta1_.at(i), theta2_.at(i)});
}

double ParameterGrid::log_marginal_uncached(std::size_t node, double x) const {
  return log_add_exp(log_weight_[node] + model_.component_log_density(theta1_[node], x),
                     log_weight_c_[node] + model_.component_log_density(theta2_[node], x));
}

std::vector<SiteTerm> compress_terms(const ModelSpec& m, std::vector<SiteTerm> terms) {
  if (!m.finite_support()) return terms;
  std::map<std::tuple<int, int, double>, double> merged;
  for (const SiteTerm& t : terms) {
    merged[{static_cast<int>(t.kind), t.label, t.x}] += t.multiplicity;
  }
  std::vector<SiteTerm> out;
  out.reserve(merged.size());
  for (const auto& [key, mult] : merged) {
    out.push_back({std::get<2>(key), static_cast<TermKind>(std::get<0>(key)), std::get<1>(key), mult});
  }
  return out;
}

std::vector<SiteTerm> marginal_terms(const ModelSpec& m, std::span<const double> xs) {
  std::vector<SiteTerm> terms;
  terms.reserve(xs.size());
  for (double x : xs) {
    m.check_observation(x);
    terms.push_back({x, TermKind::marginal, 0, 1.0});
  }
  return compress_terms(m, std::move(terms));
}

namespace {

// Terms folded into one coefficient per table column.
std::vector<double> tabulated_integrand(const ParameterGrid& grid, std::span<const SiteTerm> terms) {
  const ModelSpec& m = grid.model();
  const std::size_t support = grid.support_size();
  std::vector<double> joint_coef(2 * support, 0.0), marginal_coef(support, 0.0);
  for (const SiteTerm& t : terms) {
    const std::size_t s = m.support_index(t.x);
    if (t.kind != TermKind::marginal) joint_coef[2 * s + static_cast<std::size_t>(t.label - 1)] += t.multiplicity;
    if (t.kind != TermKind::joint) marginal_coef[s] += t.kind == TermKind::marginal ? t.multiplicity : -t.multiplicity;
  }
  std::vector<std::pair<std::size_t, double>> joint_cols, marginal_cols;
  for (std::size_t c = 0; c < joint_coef.size(); ++c) {
    if (joint_coef[c] != 0.0) joint_cols.emplace_back(c, joint_coef[c]);
  }
  for (std::size_t c = 0; c < marginal_coef.size(); ++c) {
    if (marginal_coef[c] != 0.0) marginal_cols.emplace_back(c, marginal_coef[c]);
  }
  const std::size_t total = grid.size();
  const double* joint = grid.joint_table().data();
  const double* marginal = grid.marginal_table().data();
  std::vector<double> out(total, 0.0);
  for (std::size_t i = 0; i < total; ++i) {
    const double* jr = joint + i * 2 * support;
    const double* mr = marginal + i * support;
    double s = 0.0;
    for (const auto& [c, w] : joint_cols) s += w * jr[c];
    for (const auto& [c, w] : marginal_cols) s += w * mr[c];
    out[i] = s;
  }
  return out;
}

}  // namespace

std::vector<double> log_integrand(const ParameterGrid& grid, std::span<const SiteTerm> terms) {
  for (const SiteTerm& t : terms) grid.model().check_observation(t.x);
  if (grid.tabulated()) return tabulated_integrand(grid, terms);
  const std::size_t total = grid.size();
  std::vector<double> out(total, 0.0);
  for (std::size_t i = 0; i < total; ++i) {
    double s = 0.0;
    for (const SiteTerm& t : terms) {
      double v;
      switch (t.kind) {
        case TermKind::marginal:
          v = grid.log_marginal(i, t.x);
          break;
        case TermKind::joint:
          v = grid.log_joint(i, t.x, t.label);
          break;
        default:
          v = grid.log_joint(i, t.x, t.label) - grid.log_marginal(i, t.x);
          break;
      }
      s += t.multiplicity * v;
    }
    out[i] = s;
  }
  return out;
}

double log_integral(const ParameterGrid& grid, std::span<const SiteTerm> terms) {
  std::vector<double> v = log_integrand(grid, terms);
  const auto mass = grid.log_mass();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += mass[i];
  return log_sum_exp(v);
}

PosteriorGrid::PosteriorGrid(std::shared_ptr<const ParameterGrid> grid, std::span<const double> xs)
    : grid_(std::move(grid)), xs_(xs.begin(), xs.end()) {
  if (!grid_) throw DomainError("posterior needs a grid");
  const std::vector<SiteTerm> terms = marginal_terms(grid_->model(), xs_);
  log_weights_ = log_integrand(*grid_, terms);
  const auto mass = grid_->log_mass();
  for (std::size_t i = 0; i < log_weights_.size(); ++i) log_weights_[i] += mass[i];
  log_norm_ = log_sum_exp(log_weights_);
  if (!std::isfinite(log_norm_)) throw NonFinite("log evidence on the grid", 0);
}

double PosteriorGrid::log_expectation(std::span<const SiteTerm> terms) const {
  std::vector<double> v = log_integrand(*grid_, terms);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += log_weights_[i];
  return log_sum_exp(v) - log_norm_;
}

std::vector<double> PosteriorGrid::predictive_latent(double x) const {
  grid_->model().check_observation(x);
  std::vector<double> out;
  for (int k = 1; k <= grid_->model().components(); ++k) {
    const SiteTerm term{x, TermKind::conditional, k, 1.0};
    out.push_back(std::exp(log_expectation(std::span<const SiteTerm>(&term, 1))));
  }
  return out;
}

double PosteriorGrid::predictive_log_density(double x) const {
  grid_->model().check_observation(x);
  const SiteTerm term{x, TermKind::marginal, 0, 1.0};
  return log_expectation(std::span<const SiteTerm>(&term, 1));
}

}  // namespace latentacc
