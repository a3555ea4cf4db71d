#include "latentacc/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <thread>

#include "latentacc/errors.hpp"
#include "latentacc/quadrature.hpp"

namespace latentacc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
// Panels per component for x-expectations of continuous families.
constexpr std::size_t kExpectationPanels = 24;

struct Outcome {
  double value = 0.0;
  bool boundary = false;
};

using Replication = std::function<Outcome(RandomStream&)>;

void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& body) {
  std::size_t workers = threads != 0 ? threads : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!failure) failure = std::current_exception();
          next.store(count);
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

ErrorEstimate run(const StudyContext& ctx, Functional functional, Method method, std::size_t n,
                  std::size_t R, std::uint64_t seed, double alpha, const Replication& body) {
  if (n == 0) throw DomainError("sample size must be positive");
  if (R < 2) throw DomainError("at least two replications are needed for a standard error");
  ErrorEstimate e;
  e.functional = functional;
  e.method = method;
  e.n = n;
  e.alpha = alpha;
  e.seed = seed;
  e.values.assign(R, kNaN);
  std::vector<char> boundary(R, 0);
  parallel_for(R, ctx.threads, [&](std::size_t r) {
    RandomStream rng = RandomStream::derive(seed, r);
    try {
      const Outcome o = body(rng);
      if (!std::isfinite(o.value)) throw NonFinite("replication value", r);
      e.values[r] = o.value;
      boundary[r] = o.boundary ? 1 : 0;
    } catch (const Error&) {
      e.values[r] = kNaN;
    }
  });
  for (std::size_t r = 0; r < R; ++r) {
    if (std::isnan(e.values[r])) ++e.aborted;
    if (boundary[r]) ++e.boundary_hits;
  }
  if (static_cast<double>(e.aborted) > kMaxAbortFraction * static_cast<double>(R)) {
    throw RunFailed(std::to_string(e.aborted) + " of " + std::to_string(R) + " replications of " +
                    to_string(functional) + "/" + to_string(method) + " at n = " + std::to_string(n) +
                    " aborted (limit 1%)");
  }
  summarize(e);
  return e;
}

struct Fit {
  ParamVec w_hat;
  bool boundary;
};

Fit fit_ml(const StudyContext& ctx, std::span<const double> xs) {
  const EmResult r = mle_marginal(ctx.model(), xs, ctx.w_star(), ctx.em);
  return {align_labels(r.estimate, ctx.w_star(), ctx.model()), r.at_boundary};
}

Dataset prefix(const Dataset& data, std::size_t m) {
  Dataset out;
  out.xs.assign(data.xs.begin(), data.xs.begin() + static_cast<std::ptrdiff_t>(m));
  out.ys = std::vector<int>(data.ys->begin(), data.ys->begin() + static_cast<std::ptrdiff_t>(m));
  return out;
}

// Average per-site label KL over the given observations: the exact inner sum
// of the ML latent functionals.
double ml_site_kl_average(const StudyContext& ctx, const ParamVec& w_hat, std::span<const double> xs) {
  double s = 0.0;
  for (double x : xs) s += site_latent_kl(ctx.model(), ctx.w_star(), w_hat, x);
  return s / static_cast<double>(xs.size());
}

// E_q[f(x)]: exact support sum, or composite panels per component.
double expect_over_x(const StudyContext& ctx, const std::function<double(double)>& f) {
  const ModelSpec& m = ctx.model();
  const ParamVec& w = ctx.w_star();
  double s = 0.0;
  if (m.finite_support()) {
    for (double x : m.support()) s += std::exp(marginal_log_density(m, w, x)) * f(x);
    return s;
  }
  for (int k = 1; k <= m.components(); ++k) {
    const double pk = k == 1 ? w.weight() : 1.0 - w.weight();
    const QuadratureRule rule = normal_panel_rule(w.theta(k), kExpectationPanels);
    for (std::size_t j = 0; j < rule.size(); ++j) s += pk * rule.weights[j] * f(rule.nodes[j]);
  }
  return s;
}

double label_kl(const std::vector<double>& log_q, const std::vector<double>& log_p) {
  double kl = 0.0;
  for (std::size_t k = 0; k < log_q.size(); ++k) {
    if (std::isinf(log_q[k])) continue;
    kl += std::exp(log_q[k]) * (log_q[k] - log_p[k]);
  }
  return kl;
}

std::vector<double> log_of(std::vector<double> p) {
  for (double& v : p) v = std::log(v);
  return p;
}

}  // namespace

std::string to_string(Functional f) {
  switch (f) {
    case Functional::type1:
      return "type1";
    case Functional::type2:
      return "type2";
    case Functional::type3:
      return "type3";
    case Functional::type2p:
      return "type2p";
    case Functional::type3p:
      return "type3p";
    case Functional::generalization:
      return "generalization";
    case Functional::training_error:
      return "training_error";
  }
  return "unknown";
}

std::string to_string(Method m) { return m == Method::ml ? "ml" : "bayes"; }

Functional functional_from_string(const std::string& name) {
  for (Functional f : {Functional::type1, Functional::type2, Functional::type3, Functional::type2p,
                       Functional::type3p, Functional::generalization, Functional::training_error}) {
    if (to_string(f) == name) return f;
  }
  throw DomainError("unknown functional '" + name + "'");
}

Method method_from_string(const std::string& name) {
  if (name == "ml") return Method::ml;
  if (name == "bayes") return Method::bayes;
  throw DomainError("unknown method '" + name + "'");
}

StudyContext::StudyContext(ModelSpec model, ParamVec w_star, Prior prior, std::size_t nodes_per_axis)
    : model_(std::move(model)),
      w_star_(std::move(w_star)),
      prior_(prior),
      nodes_per_axis_(nodes_per_axis) {
  prior_.require_support(model_, w_star_);
}

std::shared_ptr<const ParameterGrid> StudyContext::grid() const {
  if (!grid_) grid_ = std::make_shared<const ParameterGrid>(model_, prior_, nodes_per_axis_);
  return grid_;
}

void summarize(ErrorEstimate& e) {
  double sum = 0.0;
  std::size_t count = 0;
  for (double v : e.values) {
    if (std::isnan(v)) continue;
    sum += v;
    ++count;
  }
  e.replications = count;
  if (count < 2) throw RunFailed("fewer than two completed replications");
  e.mean = sum / static_cast<double>(count);
  double ss = 0.0;
  for (double v : e.values) {
    if (std::isnan(v)) continue;
    ss += (v - e.mean) * (v - e.mean);
  }
  const double var = ss / static_cast<double>(count - 1);
  e.std_error = std::sqrt(var / static_cast<double>(count));
}

ErrorEstimate estimate_type1(const StudyContext& ctx, Method method, std::size_t n, std::size_t R,
                             std::uint64_t seed) {
  const ModelSpec& m = ctx.model();
  if (method == Method::ml) {
    return run(ctx, Functional::type1, method, n, R, seed, 1.0, [&](RandomStream& rng) {
      const Dataset data = sample_joint(m, ctx.w_star(), n, rng);
      const Fit fit = fit_ml(ctx, data.xs);
      if (ctx.rao_blackwell) return Outcome{ml_site_kl_average(ctx, fit.w_hat, data.xs), fit.boundary};
      const double t = true_latent_logprob(m, ctx.w_star(), data);
      const double p = ml_latent_logprob(m, fit.w_hat, data);
      return Outcome{(t - p) / static_cast<double>(n), fit.boundary};
    });
  }
  const auto grid = ctx.grid();
  return run(ctx, Functional::type1, method, n, R, seed, 1.0, [&](RandomStream& rng) {
    const Dataset data = sample_joint(m, ctx.w_star(), n, rng);
    const PosteriorGrid post(grid, data.xs);
    const double t = true_latent_logprob(m, ctx.w_star(), data);
    const double p = bayes_latent_logprob(post, data);
    return Outcome{(t - p) / static_cast<double>(n), false};
  });
}

ErrorEstimate estimate_type2(const StudyContext& ctx, Method method, std::size_t n, std::size_t R,
                             std::uint64_t seed) {
  const ModelSpec& m = ctx.model();
  if (method == Method::ml) {
    return run(ctx, Functional::type2, method, n, R, seed, 1.0, [&](RandomStream& rng) {
      const Dataset data = sample_joint(m, ctx.w_star(), n, rng);
      const Fit fit = fit_ml(ctx, data.xs);
      return Outcome{ml_site_kl_average(ctx, fit.w_hat, data.xs), fit.boundary};
    });
  }
  const auto grid = ctx.grid();
  return run(ctx, Functional::type2, method, n, R, seed, 1.0, [&](RandomStream& rng) {
    const Dataset data = sample_joint(m, ctx.w_star(), n, rng);
    const PosteriorGrid post(grid, data.xs);
    std::map<double, double> cache;
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = data.xs[i];
      if (m.finite_support()) {
        auto it = cache.find(x);
        if (it == cache.end()) {
          const double kl = label_kl(latent_log_conditional(m, ctx.w_star(), x),
                                     bayes_type2_marginal_logprob(post, i));
          it = cache.emplace(x, kl).first;
        }
        s += it->second;
      } else {
        s += label_kl(latent_log_conditional(m, ctx.w_star(), x), bayes_type2_marginal_logprob(post, i));
      }
    }
    return Outcome{s / static_cast<double>(n), false};
  });
}

ErrorEstimate estimate_type3(const StudyContext& ctx, Method method, std::size_t n, std::size_t R,
                             std::uint64_t seed) {
  const ModelSpec& m = ctx.model();
  const auto grid = method == Method::bayes ? ctx.grid() : nullptr;
  return run(ctx, Functional::type3, method, n, R, seed, 1.0, [&](RandomStream& rng) {
    const Dataset data = sample_joint(m, ctx.w_star(), n, rng);
    std::function<std::vector<double>(double)> log_p;
    bool boundary = false;
    std::optional<PosteriorGrid> post;
    std::optional<ParamVec> w_hat;
    if (method == Method::ml) {
      const Fit fit = fit_ml(ctx, data.xs);
      boundary = fit.boundary;
      w_hat = fit.w_hat;
      log_p = [&](double x) { return latent_log_conditional(m, *w_hat, x); };
    } else {
      post.emplace(grid, data.xs);
      log_p = [&](double x) { return log_of(bayes_type3_predictive(*post, x)); };
    }
    auto site = [&](double x) { return label_kl(latent_log_conditional(m, ctx.w_star(), x), log_p(x)); };
    if (m.finite_support()) return Outcome{expect_over_x(ctx, site), boundary};
    const Dataset fresh = sample_joint(m, ctx.w_star(), 1, rng);
    return Outcome{site(fresh.xs[0]), boundary};
  });
}

ErrorEstimate estimate_type2p(const StudyContext& ctx, Method method, std::size_t n, std::size_t R,
                              std::uint64_t seed, double alpha) {
  const std::size_t sites = alpha_sites(alpha, n);
  const ModelSpec& m = ctx.model();
  if (method == Method::ml) {
    return run(ctx, Functional::type2p, method, n, R, seed, alpha, [&](RandomStream& rng) {
      const Dataset data = sample_joint(m, ctx.w_star(), n, rng);
      const Fit fit = fit_ml(ctx, data.xs);
      const std::span<const double> head(data.xs.data(), sites);
      if (ctx.rao_blackwell) return Outcome{ml_site_kl_average(ctx, fit.w_hat, head), fit.boundary};
      const Dataset target = prefix(data, sites);
      const double t = true_latent_logprob(m, ctx.w_star(), target);
      const double p = ml_latent_logprob(m, fit.w_hat, target);
      return Outcome{(t - p) / static_cast<double>(sites), fit.boundary};
    });
  }
  const auto grid = ctx.grid();
  return run(ctx, Functional::type2p, method, n, R, seed, alpha, [&](RandomStream& rng) {
    const Dataset data = sample_joint(m, ctx.w_star(), n, rng);
    const PosteriorGrid post(grid, data.xs);
    const double t = sites == n ? true_latent_logprob(m, ctx.w_star(), data)
                                : true_latent_logprob(m, ctx.w_star(), prefix(data, sites));
    const double p = bayes_type2p_logprob(post, data, alpha);
    return Outcome{(t - p) / static_cast<double>(sites), false};
  });
}

ErrorEstimate estimate_type3p(const StudyContext& ctx, Method method, std::size_t n, std::size_t R,
                              std::uint64_t seed, double alpha) {
  const std::size_t sites = alpha_sites(alpha, n);
  const ModelSpec& m = ctx.model();
  const auto grid = method == Method::bayes ? ctx.grid() : nullptr;
  return run(ctx, Functional::type3p, method, n, R, seed, alpha, [&](RandomStream& rng) {
    const Dataset data = sample_joint(m, ctx.w_star(), n, rng);
    const Dataset future = sample_joint(m, ctx.w_star(), sites, rng);
    const double t = true_latent_logprob(m, ctx.w_star(), future);
    if (method == Method::ml) {
      const Fit fit = fit_ml(ctx, data.xs);
      if (ctx.rao_blackwell) return Outcome{ml_site_kl_average(ctx, fit.w_hat, future.xs), fit.boundary};
      const double p = ml_latent_logprob(m, fit.w_hat, future);
      return Outcome{(t - p) / static_cast<double>(sites), fit.boundary};
    }
    const PosteriorGrid post(grid, data.xs);
    const double p = bayes_type3p_logprob(post, future, alpha);
    return Outcome{(t - p) / static_cast<double>(sites), false};
  });
}

ErrorEstimate estimate_generalization(const StudyContext& ctx, Method method, std::size_t n,
                                      std::size_t R, std::uint64_t seed) {
  const ModelSpec& m = ctx.model();
  const auto grid = method == Method::bayes ? ctx.grid() : nullptr;
  return run(ctx, Functional::generalization, method, n, R, seed, 1.0, [&](RandomStream& rng) {
    const Dataset data = sample_joint(m, ctx.w_star(), n, rng);
    auto log_q = [&](double x) { return marginal_log_density(m, ctx.w_star(), x); };
    if (method == Method::ml) {
      const Fit fit = fit_ml(ctx, data.xs);
      const double kl = expect_over_x(
          ctx, [&](double x) { return log_q(x) - marginal_log_density(m, fit.w_hat, x); });
      return Outcome{kl, fit.boundary};
    }
    const PosteriorGrid post(grid, data.xs);
    const double kl =
        expect_over_x(ctx, [&](double x) { return log_q(x) - post.predictive_log_density(x); });
    return Outcome{kl, false};
  });
}

ErrorEstimate training_error_check(const StudyContext& ctx, std::size_t n, std::size_t R,
                                   std::uint64_t seed) {
  const ModelSpec& m = ctx.model();
  return run(ctx, Functional::training_error, Method::ml, n, R, seed, 1.0, [&](RandomStream& rng) {
    const Dataset data = sample_joint(m, ctx.w_star(), n, rng);
    if (ctx.complete_data_training) {
      const ParamVec w_hat = mle_joint(m, data);
      const double t = log_likelihood_joint(m, ctx.w_star(), data);
      return Outcome{(t - log_likelihood_joint(m, w_hat, data)) / static_cast<double>(n), false};
    }
    const Fit fit = fit_ml(ctx, data.xs);
    const double t = log_likelihood_marginal(m, ctx.w_star(), data.xs);
    const double p = log_likelihood_marginal(m, fit.w_hat, data.xs);
    return Outcome{(t - p) / static_cast<double>(n), fit.boundary};
  });
}

ErrorEstimate estimate(const StudyContext& ctx, Functional functional, Method method, std::size_t n,
                       std::size_t replications, std::uint64_t seed, double alpha) {
  switch (functional) {
    case Functional::type1:
      return estimate_type1(ctx, method, n, replications, seed);
    case Functional::type2:
      return estimate_type2(ctx, method, n, replications, seed);
    case Functional::type3:
      return estimate_type3(ctx, method, n, replications, seed);
    case Functional::type2p:
      return estimate_type2p(ctx, method, n, replications, seed, alpha);
    case Functional::type3p:
      return estimate_type3p(ctx, method, n, replications, seed, alpha);
    case Functional::generalization:
      return estimate_generalization(ctx, method, n, replications, seed);
    case Functional::training_error:
      if (method != Method::ml) throw DomainError("the training error is defined for the ML fit");
      return training_error_check(ctx, n, replications, seed);
  }
  throw DomainError("unknown functional");
}

}  // namespace latentacc
