#include <cmath>
#include <vector>

#include "latentacc/errors.hpp"
#include "latentacc/estimators.hpp"
#include "latentacc/quadrature.hpp"
#include "latentacc/theory.hpp"

namespace latentacc {

namespace {

void require_matching(const PosteriorGrid& posterior, const Dataset& data) {
  if (!data.has_labels()) throw DomainError("latent log-probability needs labels");
  if (data.ys->size() != data.xs.size()) throw DomainError("labels and observations differ in length");
  const auto xs = posterior.xs();
  if (xs.size() != data.xs.size()) throw DomainError("dataset does not match the posterior's observations");
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i] != data.xs[i]) throw DomainError("dataset does not match the posterior's observations");
  }
}

std::vector<SiteTerm> conditional_terms(const ModelSpec& m, std::span<const double> xs,
                                        std::span<const int> ys) {
  std::vector<SiteTerm> terms;
  terms.reserve(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (ys[i] < 1 || ys[i] > m.components()) throw DomainError("label outside {1, 2}");
    m.check_observation(xs[i]);
    terms.push_back({xs[i], TermKind::conditional, ys[i], 1.0});
  }
  return compress_terms(m, std::move(terms));
}

}  // namespace

double bayes_latent_logprob(const PosteriorGrid& posterior, const Dataset& data) {
  require_matching(posterior, data);
  const ParameterGrid& grid = posterior.grid();
  return log_evidence_complete(grid.model(), data, grid.prior()) - posterior.log_norm();
}

double bayes_latent_logprob(const ModelSpec& m, const Dataset& data, const Prior& prior,
                            std::size_t nodes_per_axis) {
  auto grid = std::make_shared<const ParameterGrid>(m, prior, nodes_per_axis);
  const PosteriorGrid posterior(grid, data.xs);
  return bayes_latent_logprob(posterior, data);
}

double bayes_latent_logprob_mixture(const PosteriorGrid& posterior, const Dataset& data) {
  require_matching(posterior, data);
  const std::vector<SiteTerm> terms = conditional_terms(posterior.grid().model(), data.xs, *data.ys);
  return posterior.log_expectation(terms);
}

std::vector<double> bayes_type2_marginal_logprob(const PosteriorGrid& posterior, std::size_t site) {
  const auto xs = posterior.xs();
  if (site >= xs.size()) throw DomainError("site index out of range");
  std::vector<double> out;
  for (int k = 1; k <= posterior.grid().model().components(); ++k) {
    const SiteTerm term{xs[site], TermKind::conditional, k, 1.0};
    out.push_back(posterior.log_expectation(std::span<const SiteTerm>(&term, 1)));
  }
  return out;
}

std::vector<double> bayes_type2_marginal_logprob_enumerated(const PosteriorGrid& posterior,
                                                            std::size_t site) {
  const auto xs = posterior.xs();
  if (site >= xs.size()) throw DomainError("site index out of range");
  const int k_max = posterior.grid().model().components();
  std::vector<std::vector<double>> parts(static_cast<std::size_t>(k_max));
  Dataset data{std::vector<double>(xs.begin(), xs.end()), std::vector<int>(xs.size(), 1)};
  for_each_labeling(xs.size(), [&](std::span<const int> ys) {
    std::copy(ys.begin(), ys.end(), data.ys->begin());
    parts[static_cast<std::size_t>(ys[site] - 1)].push_back(bayes_latent_logprob(posterior, data));
  });
  std::vector<double> out;
  for (const auto& p : parts) out.push_back(log_sum_exp(p));
  return out;
}

std::vector<double> bayes_type3_predictive(const PosteriorGrid& posterior, double x_new) {
  return posterior.predictive_latent(x_new);
}

std::size_t alpha_sites(double alpha, std::size_t n) {
  check_alpha(alpha);
  const double target = alpha * static_cast<double>(n);
  const double rounded = std::round(target);
  if (std::abs(target - rounded) > 1e-9 * std::max(1.0, target) || rounded < 1.0) {
    throw AlphaGridMismatch(alpha, n);
  }
  return static_cast<std::size_t>(rounded);
}

double bayes_type2p_logprob(const PosteriorGrid& posterior, const Dataset& data, double alpha) {
  require_matching(posterior, data);
  const std::size_t m = alpha_sites(alpha, data.size());
  if (m == data.size()) return bayes_latent_logprob(posterior, data);
  const std::vector<SiteTerm> terms =
      conditional_terms(posterior.grid().model(), std::span<const double>(data.xs).first(m),
                        std::span<const int>(*data.ys).first(m));
  return posterior.log_expectation(terms);
}

double bayes_type3p_logprob(const PosteriorGrid& posterior, const Dataset& future, double alpha) {
  if (!future.has_labels()) throw DomainError("future sites need labels");
  const std::size_t m = alpha_sites(alpha, posterior.xs().size());
  if (future.size() != m || future.ys->size() != m) {
    throw DomainError("expected " + std::to_string(m) + " future sites, got " +
                      std::to_string(future.size()));
  }
  const std::vector<SiteTerm> terms = conditional_terms(posterior.grid().model(), future.xs, *future.ys);
  return posterior.log_expectation(terms);
}

std::string to_string(LatentMethod method) {
  switch (method) {
    case LatentMethod::ml:
      return "ml";
    case LatentMethod::bayes_evidence:
      return "bayes_evidence";
    case LatentMethod::bayes_quadrature:
      return "bayes_quadrature";
    case LatentMethod::bayes_enumeration:
      return "bayes_enumeration";
  }
  return "unknown";
}

LatentPosterior::LatentPosterior(const ModelSpec& m, LatentMethod method, std::vector<double> xs)
    : model_(m), method_(method), xs_(std::move(xs)) {}

LatentPosterior LatentPosterior::maximum_likelihood(const ModelSpec& m, std::vector<double> xs,
                                                    const ParamVec& w_hat) {
  LatentPosterior lp(m, LatentMethod::ml, std::move(xs));
  lp.w_hat_ = w_hat;
  return lp;
}

LatentPosterior LatentPosterior::bayes(std::shared_ptr<const ParameterGrid> grid,
                                       std::vector<double> xs, LatentMethod method) {
  if (method == LatentMethod::ml) throw DomainError("use maximum_likelihood for the ML posterior");
  if (!grid) throw DomainError("Bayes posterior needs a grid");
  LatentPosterior lp(grid->model(), method, std::move(xs));
  if (method == LatentMethod::bayes_enumeration) {
    lp.log_norm_ = log_evidence_marginal_enumerated(grid->model(), lp.xs_, grid->prior());
  }
  lp.posterior_.emplace(std::move(grid), lp.xs_);
  if (method != LatentMethod::bayes_enumeration) lp.log_norm_ = lp.posterior_->log_norm();
  return lp;
}

double LatentPosterior::log_prob(std::span<const int> ys) const {
  if (ys.size() != xs_.size()) throw DomainError("label vector length differs from the observations");
  const Dataset data{xs_, std::vector<int>(ys.begin(), ys.end())};
  switch (method_) {
    case LatentMethod::ml:
      return ml_latent_logprob(model_, *w_hat_, data);
    case LatentMethod::bayes_evidence:
    case LatentMethod::bayes_enumeration:
      return log_evidence_complete(model_, data, posterior_->grid().prior()) - log_norm_;
    case LatentMethod::bayes_quadrature:
      return bayes_latent_logprob_mixture(*posterior_, data);
  }
  return 0.0;
}

}  // namespace latentacc
