#include <algorithm>
#include <cmath>
#include <vector>

#include "latentacc/errors.hpp"
#include "latentacc/estimators.hpp"
#include "latentacc/quadrature.hpp"

namespace latentacc {

namespace {

constexpr double kBoundaryFlag = 1e-9;

struct WeightedPoint {
  double x;
  double count;
};

std::vector<WeightedPoint> tally(const ModelSpec& m, std::span<const double> xs) {
  std::vector<WeightedPoint> out;
  if (m.finite_support()) {
    const std::vector<double> support = m.support();
    std::vector<double> counts(support.size(), 0.0);
    for (double x : xs) {
      m.check_observation(x);
      counts[m.support_index(x)] += 1.0;
    }
    for (std::size_t s = 0; s < support.size(); ++s) {
      if (counts[s] > 0.0) out.push_back({support[s], counts[s]});
    }
  } else {
    out.reserve(xs.size());
    for (double x : xs) {
      m.check_observation(x);
      out.push_back({x, 1.0});
    }
  }
  return out;
}

double clamp_unit(double v) { return std::clamp(v, kDomainMargin, 1.0 - kDomainMargin); }

double clamp_coord(const ModelSpec& m, std::size_t i, double v) {
  return m.domain(i) == CoordDomain::unit_interval ? clamp_unit(v) : v;
}

double weighted_loglik(const ModelSpec& m, const ParamVec& w, const std::vector<WeightedPoint>& pts) {
  double ll = 0.0;
  for (const WeightedPoint& p : pts) ll += p.count * marginal_log_density(m, w, p.x);
  return ll;
}

bool near_boundary(const ModelSpec& m, const ParamVec& w) {
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (m.domain(i) != CoordDomain::unit_interval) continue;
    if (w[i] < kBoundaryFlag || w[i] > 1.0 - kBoundaryFlag) return true;
  }
  return false;
}

}  // namespace

double log_likelihood_marginal(const ModelSpec& m, const ParamVec& w, std::span<const double> xs) {
  return weighted_loglik(m, w, tally(m, xs));
}

double log_likelihood_joint(const ModelSpec& m, const ParamVec& w, const Dataset& data) {
  if (!data.has_labels()) throw DomainError("joint likelihood needs labels");
  double ll = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) ll += joint_log_density(m, w, data.xs[i], (*data.ys)[i]);
  return ll;
}

EmResult mle_marginal(const ModelSpec& m, std::span<const double> xs, const ParamVec& init,
                      const EmOptions& options) {
  if (xs.empty()) throw DomainError("EM needs at least one observation");
  const std::vector<WeightedPoint> pts = tally(m, xs);
  const double n = static_cast<double>(xs.size());
  const double scale = m.family() == Family::binomial_mixture ? m.trial_count() : 1.0;

  std::vector<double> w(init.values().begin(), init.values().end());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = clamp_coord(m, i, w[i]);
  EmResult result{ParamVec(m, w), 0.0, 0, false, false, {}};
  double ll = weighted_loglik(m, result.estimate, pts);
  if (!std::isfinite(ll)) throw NonFinite("EM log-likelihood at the start point", 0);

  for (std::size_t it = 1; it <= options.max_iterations; ++it) {
    double r_sum = 0.0, rx_sum = 0.0, sx_sum = 0.0;
    for (const WeightedPoint& p : pts) {
      const double r = std::exp(latent_log_conditional(m, result.estimate, p.x)[0]);
      r_sum += p.count * r;
      rx_sum += p.count * r * p.x;
      sx_sum += p.count * p.x;
    }
    const double c_sum = n - r_sum;
    const double cx_sum = sx_sum - rx_sum;
    w[0] = clamp_unit(r_sum / n);
    if (r_sum > 0.0) w[1] = clamp_coord(m, 1, rx_sum / (scale * r_sum));
    if (c_sum > 0.0) w[2] = clamp_coord(m, 2, cx_sum / (scale * c_sum));
    result.estimate = ParamVec(m, w);

    const double next = weighted_loglik(m, result.estimate, pts);
    if (!std::isfinite(next)) throw NonFinite("EM log-likelihood", it);
    if (options.record_trace) result.trace.push_back(next);
    result.iterations = it;
    const double gain = next - ll;
    ll = next;
    if (gain < options.tolerance) {
      result.converged = true;
      break;
    }
  }
  result.log_likelihood = ll;
  result.at_boundary = near_boundary(m, result.estimate);
  return result;
}

ParamVec mle_joint(const ModelSpec& m, const Dataset& data) {
  if (!data.has_labels()) throw DomainError("complete-data MLE needs labels");
  double count[2] = {0.0, 0.0};
  double sum[2] = {0.0, 0.0};
  for (std::size_t i = 0; i < data.size(); ++i) {
    const int y = (*data.ys)[i];
    if (y < 1 || y > 2) throw DomainError("label outside {1, 2}");
    m.check_observation(data.xs[i]);
    count[y - 1] += 1.0;
    sum[y - 1] += data.xs[i];
  }
  if (count[0] == 0.0 || count[1] == 0.0) {
    throw DegenerateLabels("a component has no labelled observations");
  }
  const double scale = m.family() == Family::binomial_mixture ? m.trial_count() : 1.0;
  const double n = count[0] + count[1];
  return ParamVec(m, {clamp_unit(count[0] / n), clamp_coord(m, 1, sum[0] / (scale * count[0])),
                      clamp_coord(m, 2, sum[1] / (scale * count[1]))});
}

ParamVec align_labels(const ParamVec& w_hat, const ParamVec& w_star, const ModelSpec& m) {
  const ParamVec swapped = swap_labels(m, w_hat);
  double keep = 0.0, swap = 0.0;
  for (std::size_t i = 0; i < w_hat.size(); ++i) {
    keep += (w_hat[i] - w_star[i]) * (w_hat[i] - w_star[i]);
    swap += (swapped[i] - w_star[i]) * (swapped[i] - w_star[i]);
  }
  return swap < keep ? swapped : w_hat;
}

double ml_latent_logprob(const ModelSpec& m, const ParamVec& w_hat, const Dataset& data) {
  if (!data.has_labels()) throw DomainError("latent log-probability needs labels");
  double s = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const int y = (*data.ys)[i];
    if (y < 1 || y > 2) throw DomainError("label outside {1, 2}");
    s += latent_log_conditional(m, w_hat, data.xs[i])[static_cast<std::size_t>(y - 1)];
  }
  return s;
}

double true_latent_logprob(const ModelSpec& m, const ParamVec& w_star, const Dataset& data) {
  return ml_latent_logprob(m, w_star, data);
}

double site_latent_kl(const ModelSpec& m, const ParamVec& truth, const ParamVec& est, double x) {
  const std::vector<double> lq = latent_log_conditional(m, truth, x);
  const std::vector<double> lp = latent_log_conditional(m, est, x);
  double kl = 0.0;
  for (std::size_t k = 0; k < lq.size(); ++k) {
    if (std::isinf(lq[k])) continue;
    kl += std::exp(lq[k]) * (lq[k] - lp[k]);
  }
  return std::max(0.0, kl);
}

}  // namespace latentacc
