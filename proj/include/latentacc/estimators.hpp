#pragma once

// Estimated distributions of the latent labels: the ML plug-in, the Bayes
// evidence ratio and its posterior-mixture form, single-site marginals,
// predictive label distributions for new observations, and the partial
// (alpha n sites) variants. Enumeration oracles over all 2^n labelings are
// provided for n <= kEnumerationLimit.

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "latentacc/model.hpp"

namespace latentacc {

inline constexpr std::size_t kEnumerationLimit = 12;
inline constexpr std::size_t kDefaultNodesPerAxis = 64;
/// Unit-interval estimates are clamped to [m, 1 - m].
inline constexpr double kDomainMargin = 1e-12;

// ---------------------------------------------------------------------------
// Priors and parameter grids

/// Restricts the prior to one labeling of the components. Under `none` the
/// posterior has two label-switched modes; the ordered variants keep the one
/// matching a reference parameter and double the prior density there.
enum class LabelOrder { none, first_larger, second_larger };

std::string to_string(LabelOrder order);
LabelOrder label_order_from_string(const std::string& name);

struct Prior {
  double eta = 1.0;  // Beta(eta, eta) on the weight (and binomial thetas)
  LabelOrder order = LabelOrder::none;
  double mean_lo = -6.0;  // uniform box for Gaussian component means
  double mean_hi = 6.0;

  /// Ordered prior whose retained labeling contains w_star.
  static Prior aligned(const ModelSpec& m, const ParamVec& w_star, double eta = 1.0);

  /// ln phi(w); -inf outside the support.
  double log_density(const ModelSpec& m, const ParamVec& w) const;
  /// Throws DomainError unless the density is positive at w.
  void require_support(const ModelSpec& m, const ParamVec& w) const;
};

/// Data-independent tensor quadrature grid over the parameter domain.
///
/// Gauss-Legendre nodes on every axis. Under an ordered prior the smaller
/// component parameter is written as lo + (t - lo) u with u in (0, 1), which
/// keeps the integrand smooth on the retained half of the domain.
class ParameterGrid {
 public:
  ParameterGrid(const ModelSpec& model, const Prior& prior,
                std::size_t nodes_per_axis = kDefaultNodesPerAxis);

  const ModelSpec& model() const { return model_; }
  const Prior& prior() const { return prior_; }
  std::size_t nodes_per_axis() const { return nodes_per_axis_; }
  std::size_t size() const { return log_mass_.size(); }

  ParamVec node(std::size_t i) const;
  /// ln(quadrature weight x Jacobian x prior density) per node.
  std::span<const double> log_mass() const { return log_mass_; }

  double log_joint(std::size_t node, double x, int k) const {
    if (!table_marginal_.empty()) {
      return table_joint_[(node * support_size_ + model_.support_index(x)) * 2 +
                          static_cast<std::size_t>(k - 1)];
    }
    return (k == 1 ? log_weight_[node] : log_weight_c_[node]) +
           model_.component_log_density(k == 1 ? theta1_[node] : theta2_[node], x);
  }

  /// Finite support: per-node rows of ln p(x, y = k | w) (support-major,
  /// label-minor) and ln p(x | w).
  bool tabulated() const { return !table_marginal_.empty(); }
  std::size_t support_size() const { return support_size_; }
  std::span<const double> joint_table() const { return table_joint_; }
  std::span<const double> marginal_table() const { return table_marginal_; }

  double log_marginal(std::size_t node, double x) const {
    if (!table_marginal_.empty()) {
      return table_marginal_[node * support_size_ + model_.support_index(x)];
    }
    return log_marginal_uncached(node, x);
  }

 private:
  double log_marginal_uncached(std::size_t node, double x) const;

  ModelSpec model_;
  Prior prior_;
  std::size_t nodes_per_axis_;
  std::vector<double> weight_, theta1_, theta2_;
  std::vector<double> log_weight_, log_weight_c_;  // ln a, ln(1 - a)
  std::vector<double> log_mass_;
  std::size_t support_size_ = 0;
  std::vector<double> table_joint_;
  std::vector<double> table_marginal_;
};

/// One factor of a likelihood-like integrand: p(x | w), p(x, y | w) or
/// p(y | x, w), raised to `multiplicity`.
enum class TermKind { marginal, joint, conditional };

struct SiteTerm {
  double x = 0.0;
  TermKind kind = TermKind::marginal;
  int label = 0;
  double multiplicity = 1.0;
};

/// Merges identical terms (finite-support models only).
std::vector<SiteTerm> compress_terms(const ModelSpec& m, std::vector<SiteTerm> terms);

/// Per-node sum of multiplicity * ln factor.
std::vector<double> log_integrand(const ParameterGrid& grid, std::span<const SiteTerm> terms);
/// ln of the prior-weighted integral of the product of factors.
double log_integral(const ParameterGrid& grid, std::span<const SiteTerm> terms);

std::vector<SiteTerm> marginal_terms(const ModelSpec& m, std::span<const double> xs);

/// Posterior over the grid given observations X^n.
class PosteriorGrid {
 public:
  PosteriorGrid(std::shared_ptr<const ParameterGrid> grid, std::span<const double> xs);

  const ParameterGrid& grid() const { return *grid_; }
  std::shared_ptr<const ParameterGrid> grid_ptr() const { return grid_; }
  std::span<const double> xs() const { return xs_; }

  /// Un-normalized ln(prior mass x likelihood) per node.
  std::span<const double> log_weights() const { return log_weights_; }
  /// ln Z(X^n) on the grid.
  double log_norm() const { return log_norm_; }

  /// ln E_post[prod of factors].
  double log_expectation(std::span<const SiteTerm> terms) const;
  /// E_post[p(y = k | x, w)], k = 1..K.
  std::vector<double> predictive_latent(double x) const;
  /// ln E_post[p(x | w)].
  double predictive_log_density(double x) const;

 private:
  std::shared_ptr<const ParameterGrid> grid_;
  std::vector<double> xs_;
  std::vector<double> log_weights_;
  double log_norm_ = 0.0;
};

// ---------------------------------------------------------------------------
// Maximum likelihood

struct EmOptions {
  double tolerance = 1e-10;  // stop once the log-likelihood gain falls below
  std::size_t max_iterations = 10000;
  bool record_trace = false;
};

struct EmResult {
  ParamVec estimate;
  double log_likelihood = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  /// Some unit-interval coordinate ended within 1e-9 of {0, 1}.
  bool at_boundary = false;
  std::vector<double> trace;  // log-likelihood after each iteration
};

/// EM for the marginal likelihood L_X started from `init`.
EmResult mle_marginal(const ModelSpec& m, std::span<const double> xs, const ParamVec& init,
                      const EmOptions& options = {});

/// Closed-form complete-data maximizer. Throws DegenerateLabels when a
/// component has no observations.
ParamVec mle_joint(const ModelSpec& m, const Dataset& data);

/// The label permutation of w_hat closest to w_star (identity on ties).
ParamVec align_labels(const ParamVec& w_hat, const ParamVec& w_star, const ModelSpec& m);

double log_likelihood_marginal(const ModelSpec& m, const ParamVec& w, std::span<const double> xs);
double log_likelihood_joint(const ModelSpec& m, const ParamVec& w, const Dataset& data);

/// sum_i ln p(y_i | x_i, w_hat).
double ml_latent_logprob(const ModelSpec& m, const ParamVec& w_hat, const Dataset& data);
/// sum_i ln q(y_i | x_i) at the true parameter.
double true_latent_logprob(const ModelSpec& m, const ParamVec& w_star, const Dataset& data);

/// KL(p(. | x, truth) || p(. | x, est)) over the label.
double site_latent_kl(const ModelSpec& m, const ParamVec& truth, const ParamVec& est, double x);

// ---------------------------------------------------------------------------
// Bayes

/// ln Z(X^n, Y^n) in closed form (Beta conjugacy for the binomial family,
/// truncated-normal integrals for the Gaussian family). Under an ordered
/// prior the label-order probability of the complete-data posterior is
/// included by one-dimensional quadrature.
double log_evidence_complete(const ModelSpec& m, const Dataset& data, const Prior& prior);

/// ln Z(X^n) by tensor-grid quadrature.
double log_evidence_marginal(const ParameterGrid& grid, std::span<const double> xs);
double log_evidence_marginal(const ModelSpec& m, std::span<const double> xs, const Prior& prior,
                             std::size_t nodes_per_axis = kDefaultNodesPerAxis);
/// ln sum_{Y^n} Z(X^n, Y^n); EnumerationTooLarge for n > 12.
double log_evidence_marginal_enumerated(const ModelSpec& m, std::span<const double> xs,
                                        const Prior& prior);

/// |ln Z(X^n) at 2x nodes per axis - ln Z(X^n) at the grid's resolution|.
double grid_refinement_delta(const ParameterGrid& grid, std::span<const double> xs);

/// Visits all K^n label vectors (labels in {1, 2}); EnumerationTooLarge for n > 12.
void for_each_labeling(std::size_t n, const std::function<void(std::span<const int>)>& visit);

/// ln p(Y^n | X^n) = ln Z(X^n, Y^n) - ln Z(X^n).
double bayes_latent_logprob(const PosteriorGrid& posterior, const Dataset& data);
double bayes_latent_logprob(const ModelSpec& m, const Dataset& data, const Prior& prior,
                            std::size_t nodes_per_axis = kDefaultNodesPerAxis);
/// ln of the posterior expectation of prod_i p(y_i | x_i, w).
double bayes_latent_logprob_mixture(const PosteriorGrid& posterior, const Dataset& data);

/// ln p(y_i = k | X^n), k = 1..K, as E_post[p(y_i | x_i, w)].
std::vector<double> bayes_type2_marginal_logprob(const PosteriorGrid& posterior, std::size_t site);
/// Same by summing p(Y^n | X^n) over the other labels (n <= 12).
std::vector<double> bayes_type2_marginal_logprob_enumerated(const PosteriorGrid& posterior,
                                                            std::size_t site);

/// p(y = k | x_new, X^n) for k = 1..K.
std::vector<double> bayes_type3_predictive(const PosteriorGrid& posterior, double x_new);

/// Number of target sites alpha * n; AlphaGridMismatch unless integral.
std::size_t alpha_sites(double alpha, std::size_t n);

/// ln p(Y_1 | X^n) for the first alpha n labels. alpha = 1 is Type I.
double bayes_type2p_logprob(const PosteriorGrid& posterior, const Dataset& data, double alpha);
/// ln p(Y_2 | X_2, X^n) for alpha n future labelled pairs.
double bayes_type3p_logprob(const PosteriorGrid& posterior, const Dataset& future, double alpha);

// ---------------------------------------------------------------------------

enum class LatentMethod { ml, bayes_evidence, bayes_quadrature, bayes_enumeration };

std::string to_string(LatentMethod method);

/// ln p(Y^n | X^n) under one estimation method, built from X^n alone.
class LatentPosterior {
 public:
  static LatentPosterior maximum_likelihood(const ModelSpec& m, std::vector<double> xs,
                                            const ParamVec& w_hat);
  static LatentPosterior bayes(std::shared_ptr<const ParameterGrid> grid, std::vector<double> xs,
                               LatentMethod method = LatentMethod::bayes_evidence);

  LatentMethod method() const { return method_; }
  std::span<const double> xs() const { return xs_; }
  const std::optional<ParamVec>& ml_estimate() const { return w_hat_; }
  const PosteriorGrid* posterior() const { return posterior_ ? &*posterior_ : nullptr; }

  double log_prob(std::span<const int> ys) const;

 private:
  LatentPosterior(const ModelSpec& m, LatentMethod method, std::vector<double> xs);

  ModelSpec model_;
  LatentMethod method_;
  std::vector<double> xs_;
  std::optional<ParamVec> w_hat_;
  std::optional<PosteriorGrid> posterior_;
  double log_norm_ = 0.0;
};

}  // namespace latentacc
