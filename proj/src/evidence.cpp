#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <boost/math/distributions/beta.hpp>

#include "latentacc/errors.hpp"
#include "latentacc/estimators.hpp"
#include "latentacc/quadrature.hpp"

namespace latentacc {

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;
constexpr double kLog2Pi = 1.83787706640934548356;

double log_beta_fn(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

double normal_cdf(double z) { return 0.5 * std::erfc(-z / kSqrt2); }
double normal_ccdf(double z) { return 0.5 * std::erfc(z / kSqrt2); }

// ln[Phi(hi) - Phi(lo)] for lo < hi, using the tail that keeps precision.
double log_normal_mass(double lo, double hi) {
  if (lo > 0.0) return std::log(normal_ccdf(lo) - normal_ccdf(hi));
  return std::log(normal_cdf(hi) - normal_cdf(lo));
}

// One-dimensional posterior of a single component parameter given the
// labelled sites of that component.
class ComponentPosterior {
 public:
  enum class Kind { beta, truncated_normal, uniform };

  static ComponentPosterior beta(double a, double b) {
    ComponentPosterior p;
    p.kind_ = Kind::beta;
    p.beta_ = boost::math::beta_distribution<double>(a, b);
    p.a_ = a;
    p.b_ = b;
    p.lo_ = 0.0;
    p.hi_ = 1.0;
    p.center_ = a / (a + b);
    p.spread_ = std::sqrt(a * b / ((a + b) * (a + b) * (a + b + 1.0)));
    return p;
  }

  static ComponentPosterior truncated_normal(double mean, double sd, double lo, double hi) {
    ComponentPosterior p;
    p.kind_ = Kind::truncated_normal;
    p.lo_ = lo;
    p.hi_ = hi;
    p.center_ = std::clamp(mean, lo, hi);
    p.mean_ = mean;
    p.spread_ = sd;
    p.log_mass_ = log_normal_mass((lo - mean) / sd, (hi - mean) / sd);
    return p;
  }

  static ComponentPosterior uniform(double lo, double hi) {
    ComponentPosterior p;
    p.kind_ = Kind::uniform;
    p.lo_ = lo;
    p.hi_ = hi;
    p.center_ = 0.5 * (lo + hi);
    p.spread_ = (hi - lo) / std::sqrt(12.0);
    return p;
  }

  bool is_beta() const { return kind_ == Kind::beta; }
  double a() const { return a_; }
  double b() const { return b_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double center() const { return center_; }
  double spread() const { return spread_; }

  double pdf(double t) const {
    if (t <= lo_ || t >= hi_) return 0.0;
    switch (kind_) {
      case Kind::beta:
        return boost::math::pdf(beta_, t);
      case Kind::truncated_normal: {
        const double z = (t - mean_) / spread_;
        return std::exp(-0.5 * z * z - 0.5 * kLog2Pi - log_mass_) / spread_;
      }
      case Kind::uniform:
        return 1.0 / (hi_ - lo_);
    }
    return 0.0;
  }

  double cdf(double t) const {
    if (t <= lo_) return 0.0;
    if (t >= hi_) return 1.0;
    switch (kind_) {
      case Kind::beta:
        return boost::math::cdf(beta_, t);
      case Kind::truncated_normal:
        return std::exp(log_normal_mass((lo_ - mean_) / spread_, (t - mean_) / spread_) - log_mass_);
      case Kind::uniform:
        return (t - lo_) / (hi_ - lo_);
    }
    return 0.0;
  }

  double ccdf(double t) const {
    if (t <= lo_) return 1.0;
    if (t >= hi_) return 0.0;
    switch (kind_) {
      case Kind::beta:
        return boost::math::cdf(boost::math::complement(beta_, t));
      case Kind::truncated_normal:
        return std::exp(log_normal_mass((t - mean_) / spread_, (hi_ - mean_) / spread_) - log_mass_);
      case Kind::uniform:
        return (hi_ - t) / (hi_ - lo_);
    }
    return 0.0;
  }

 private:
  ComponentPosterior() : beta_(1.0, 1.0) {}

  Kind kind_ = Kind::uniform;
  boost::math::beta_distribution<double> beta_;
  double lo_ = 0.0, hi_ = 1.0, center_ = 0.5, spread_ = 0.0, mean_ = 0.0, log_mass_ = 0.0;
  double a_ = 1.0, b_ = 1.0;
};

bool is_small_integer(double v) { return v >= 1.0 && v <= 1e6 && v == std::round(v); }

// ln P(X > Y) for independent X ~ Beta(a1, b1), Y ~ Beta(a2, b2) with a1 a
// positive integer: a finite sum of positive terms,
// sum_{i < a1} B(a2 + i, b1 + b2) / ((b1 + i) B(1 + i, b1) B(a2, b2)).
double log_beta_exceeds(double a1, double b1, double a2, double b2) {
  const auto count = static_cast<std::size_t>(a1);
  std::vector<double> terms(count);
  const double shared = log_beta_fn(a2, b2);
  for (std::size_t k = 0; k < count; ++k) {
    const double i = static_cast<double>(k);
    terms[k] = log_beta_fn(a2 + i, b1 + b2) - std::log(b1 + i) - log_beta_fn(1.0 + i, b1) - shared;
  }
  return std::min(0.0, log_sum_exp(terms));
}

// ln P(first > second) or ln P(first < second) for independent posteriors.
double log_order_probability(const ComponentPosterior& first, const ComponentPosterior& second,
                             bool want_first_larger) {
  if (first.is_beta() && second.is_beta()) {
    if (want_first_larger && is_small_integer(first.a())) {
      return log_beta_exceeds(first.a(), first.b(), second.a(), second.b());
    }
    if (!want_first_larger && is_small_integer(second.a())) {
      return log_beta_exceeds(second.a(), second.b(), first.a(), first.b());
    }
  }

  std::vector<double> breaks;
  for (const ComponentPosterior* p : {&first, &second}) {
    for (double k : {-8.0, -4.0, -2.0, 0.0, 2.0, 4.0, 8.0}) {
      const double b = p->center() + k * p->spread();
      if (b > first.lo() && b < first.hi()) breaks.push_back(b);
    }
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  // The larger probability is taken as log1p(-smaller) so neither loses precision.
  const double p_first_larger = integrate_adaptive(
      [&](double t) { return first.pdf(t) * second.cdf(t); }, first.lo(), first.hi(), breaks);
  const double p_first_smaller = integrate_adaptive(
      [&](double t) { return first.pdf(t) * second.ccdf(t); }, first.lo(), first.hi(), breaks);
  const double wanted = want_first_larger ? p_first_larger : p_first_smaller;
  const double other = want_first_larger ? p_first_smaller : p_first_larger;
  if (wanted >= other) return std::log1p(-std::clamp(other, 0.0, 1.0));
  return std::log(wanted);
}

struct ComponentStats {
  double count = 0.0;
  double sum = 0.0;
  double sum_sq = 0.0;
};

}  // namespace

double log_evidence_complete(const ModelSpec& m, const Dataset& data, const Prior& prior) {
  if (!data.has_labels()) throw DomainError("complete-data evidence needs labels");
  const std::vector<int>& ys = *data.ys;
  if (ys.size() != data.xs.size()) throw DomainError("labels and observations differ in length");
  if (!(prior.eta > 0.0)) throw DomainError("prior eta must be positive");

  ComponentStats stats[2];
  double base = 0.0;
  for (std::size_t i = 0; i < data.xs.size(); ++i) {
    const double x = data.xs[i];
    const int y = ys[i];
    m.check_observation(x);
    if (y < 1 || y > m.components()) throw DomainError("label outside {1, 2}");
    ComponentStats& s = stats[y - 1];
    s.count += 1.0;
    s.sum += x;
    s.sum_sq += x * x;
    if (m.finite_support()) {
      // the log binomial coefficient: density at theta = 1/2 minus the power term
      base += m.component_log_density(0.5, x) + m.trial_count() * std::log(2.0);
    }
  }

  const double eta = prior.eta;
  double lz = base + log_beta_fn(eta + stats[0].count, eta + stats[1].count) - log_beta_fn(eta, eta);

  std::vector<ComponentPosterior> posts;
  for (const ComponentStats& s : stats) {
    if (m.family() == Family::binomial_mixture) {
      const double a = eta + s.sum;
      const double b = eta + m.trial_count() * s.count - s.sum;
      lz += log_beta_fn(a, b) - log_beta_fn(eta, eta);
      posts.push_back(ComponentPosterior::beta(a, b));
    } else {
      const double lo = prior.mean_lo;
      const double hi = prior.mean_hi;
      if (s.count == 0.0) {
        posts.push_back(ComponentPosterior::uniform(lo, hi));
        continue;
      }
      const double mean = s.sum / s.count;
      const double ss = std::max(0.0, s.sum_sq - s.count * mean * mean);
      const double sd = 1.0 / std::sqrt(s.count);
      // prod_i N(x_i | mu, 1) = (2 pi)^{-n/2} e^{-ss/2} e^{-n (mu - mean)^2 / 2}
      lz += -0.5 * s.count * kLog2Pi - 0.5 * ss + 0.5 * (kLog2Pi - std::log(s.count)) +
            log_normal_mass((lo - mean) / sd, (hi - mean) / sd) - std::log(hi - lo);
      posts.push_back(ComponentPosterior::truncated_normal(mean, sd, lo, hi));
    }
  }

  if (prior.order != LabelOrder::none) {
    lz += std::log(2.0) +
          log_order_probability(posts[0], posts[1], prior.order == LabelOrder::first_larger);
  }
  return lz;
}

double log_evidence_marginal(const ParameterGrid& grid, std::span<const double> xs) {
  const std::vector<SiteTerm> terms = marginal_terms(grid.model(), xs);
  return log_integral(grid, terms);
}

double log_evidence_marginal(const ModelSpec& m, std::span<const double> xs, const Prior& prior,
                             std::size_t nodes_per_axis) {
  const ParameterGrid grid(m, prior, nodes_per_axis);
  return log_evidence_marginal(grid, xs);
}

void for_each_labeling(std::size_t n, const std::function<void(std::span<const int>)>& visit) {
  if (n > kEnumerationLimit) throw EnumerationTooLarge(n, kEnumerationLimit);
  std::vector<int> ys(n, 1);
  const std::size_t total = std::size_t{1} << n;
  for (std::size_t code = 0; code < total; ++code) {
    for (std::size_t i = 0; i < n; ++i) ys[i] = ((code >> i) & 1U) ? 2 : 1;
    visit(ys);
  }
}

double log_evidence_marginal_enumerated(const ModelSpec& m, std::span<const double> xs,
                                        const Prior& prior) {
  if (xs.size() > kEnumerationLimit) throw EnumerationTooLarge(xs.size(), kEnumerationLimit);
  std::vector<double> terms;
  terms.reserve(std::size_t{1} << xs.size());
  Dataset data{std::vector<double>(xs.begin(), xs.end()), std::vector<int>(xs.size(), 1)};
  for_each_labeling(xs.size(), [&](std::span<const int> ys) {
    std::copy(ys.begin(), ys.end(), data.ys->begin());
    terms.push_back(log_evidence_complete(m, data, prior));
  });
  return log_sum_exp(terms);
}

double grid_refinement_delta(const ParameterGrid& grid, std::span<const double> xs) {
  const ParameterGrid fine(grid.model(), grid.prior(), 2 * grid.nodes_per_axis());
  return std::abs(log_evidence_marginal(fine, xs) - log_evidence_marginal(grid, xs));
}

}  // namespace latentacc
