#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "latentacc/errors.hpp"
#include "latentacc/fisher.hpp"
#include "latentacc/montecarlo.hpp"
#include "latentacc/random.hpp"

namespace latentacc {

namespace {

constexpr double kRelativeTolerance = 0.05;
constexpr double kStderrMultiple = 3.0;
constexpr double kGridRefinementLimit = 1e-6;

void require_grid(const std::vector<std::size_t>& n_grid) {
  if (n_grid.size() < 4) throw DomainError("a convergence study needs at least four sample sizes");
  for (std::size_t j = 0; j < n_grid.size(); ++j) {
    if (n_grid[j] == 0) throw DomainError("sample sizes must be positive");
    if (j > 0 && n_grid[j] <= n_grid[j - 1]) throw DomainError("sample sizes must increase strictly");
  }
}

// Per-replication differences, skipping replications aborted on either side.
std::vector<double> differences(const ErrorEstimate& larger, const ErrorEstimate& smaller) {
  if (larger.values.size() != smaller.values.size()) {
    throw DomainError("paired estimates need the same replication count");
  }
  std::vector<double> d;
  d.reserve(larger.values.size());
  for (std::size_t r = 0; r < larger.values.size(); ++r) {
    const double a = larger.values[r];
    const double b = smaller.values[r];
    if (std::isnan(a) || std::isnan(b)) continue;
    d.push_back(a - b);
  }
  return d;
}

ErrorEstimate gap_estimate(const ErrorEstimate& larger, const ErrorEstimate& smaller, std::size_t n) {
  ErrorEstimate e;
  e.functional = smaller.functional;
  e.method = larger.method;
  e.n = n;
  e.alpha = smaller.alpha;
  e.seed = smaller.seed;
  e.values.assign(larger.values.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t r = 0; r < e.values.size(); ++r) {
    if (!std::isnan(larger.values[r]) && !std::isnan(smaller.values[r])) {
      e.values[r] = larger.values[r] - smaller.values[r];
    } else {
      ++e.aborted;
    }
  }
  summarize(e);
  return e;
}

std::string format_number(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

}  // namespace

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::pass:
      return "pass";
    case Verdict::fail:
      return "fail";
    case Verdict::no_target:
      return "no_target";
  }
  return "unknown";
}

std::uint64_t level_seed(std::uint64_t seed, std::size_t n) {
  return splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(n)));
}

std::optional<double> theory_coefficient(const CoefficientReport& r, Functional f, Method m) {
  switch (f) {
    case Functional::type1:
      return m == Method::ml ? r.ml_type1 : r.bayes_type1;
    case Functional::type2:
      if (m == Method::ml) return r.ml_type2;
      return std::nullopt;
    case Functional::type3:
      if (m == Method::ml) return r.ml_type3;
      return std::nullopt;
    case Functional::type2p:
      return m == Method::ml ? r.ml_type1 : r.bayes_type2p;
    case Functional::type3p:
      return m == Method::ml ? r.ml_type1 : r.bayes_type3p;
    case Functional::generalization:
      return r.prediction;
    case Functional::training_error:
      if (m == Method::ml) return -r.prediction;
      return std::nullopt;
  }
  return std::nullopt;
}

Verdict judge(double extrapolated, double standard_error, double theory) {
  if (!std::isfinite(extrapolated) || !std::isfinite(standard_error)) return Verdict::fail;
  const double tolerance = std::max(kRelativeTolerance * std::abs(theory), kStderrMultiple * standard_error);
  return std::abs(extrapolated - theory) <= tolerance ? Verdict::pass : Verdict::fail;
}

ConvergenceSeries fit_series(std::vector<ErrorEstimate> estimates, std::optional<double> theory) {
  if (estimates.size() < 2) throw DomainError("a fit needs at least two sample sizes");
  ConvergenceSeries s;
  s.functional = estimates.front().functional;
  s.method = estimates.front().method;
  s.alpha = estimates.front().alpha;
  s.theory_coefficient = theory;
  s.grid_refinement_delta = std::numeric_limits<double>::quiet_NaN();

  // n D(n) = c + b / n, weighted by the inverse variance of n D(n).
  double smallest = std::numeric_limits<double>::infinity();
  for (const ErrorEstimate& e : estimates) {
    const double sd = e.scaled_std_error();
    if (sd > 0.0) smallest = std::min(smallest, sd);
  }
  if (!std::isfinite(smallest)) smallest = 1.0;
  double sw = 0.0, sx = 0.0, sxx = 0.0, sy = 0.0, sxy = 0.0;
  for (const ErrorEstimate& e : estimates) {
    s.n_grid.push_back(e.n);
    const double sd = std::max(e.scaled_std_error(), smallest);
    const double w = 1.0 / (sd * sd);
    const double x = 1.0 / static_cast<double>(e.n);
    const double y = e.scaled_mean();
    sw += w;
    sx += w * x;
    sxx += w * x * x;
    sy += w * y;
    sxy += w * x * y;
  }
  const double det = sw * sxx - sx * sx;
  if (!(det > 0.0)) throw DomainError("the fit needs at least two distinct sample sizes");
  s.extrapolated_coefficient = (sxx * sy - sx * sxy) / det;
  s.slope = (sw * sxy - sx * sy) / det;
  s.extrapolation_stderr = std::sqrt(sxx / det);
  for (const ErrorEstimate& e : estimates) {
    const double sd = std::max(e.scaled_std_error(), smallest);
    const double r = e.scaled_mean() - s.extrapolated_coefficient - s.slope / static_cast<double>(e.n);
    s.fit_chi2 += r * r / (sd * sd);
  }
  s.estimates = std::move(estimates);

  if (theory) {
    s.verdict = judge(s.extrapolated_coefficient, s.extrapolation_stderr, *theory);
    if (s.extrapolation_stderr > 0.5 * std::abs(*theory)) {
      s.insufficient_precision = true;
      s.warnings.push_back("InsufficientPrecision: extrapolation stderr " +
                           format_number(s.extrapolation_stderr) + " exceeds half the theory value; raise R");
    }
  }
  return s;
}

ConvergenceSeries convergence_study(const StudyContext& ctx, Functional functional, Method method,
                                    const std::vector<std::size_t>& n_grid, std::size_t R,
                                    std::uint64_t seed, double alpha) {
  require_grid(n_grid);
  const CoefficientReport report = coefficient_report(ctx.model(), ctx.w_star(), alpha);
  std::vector<ErrorEstimate> estimates;
  std::size_t boundary = 0;
  for (std::size_t n : n_grid) {
    estimates.push_back(estimate(ctx, functional, method, n, R, level_seed(seed, n), alpha));
    boundary += estimates.back().boundary_hits;
  }
  ConvergenceSeries s = fit_series(std::move(estimates), theory_coefficient(report, functional, method));
  if (boundary > 0) {
    s.warnings.push_back("BoundaryFits: " + std::to_string(boundary) +
                         " ML fits ended on the parameter boundary");
  }
  if (method == Method::bayes) {
    const std::size_t n = n_grid.back();
    RandomStream rng = RandomStream::derive(level_seed(seed, n), 0);
    const Dataset data = sample_joint(ctx.model(), ctx.w_star(), n, rng);
    s.grid_refinement_delta = grid_refinement_delta(*ctx.grid(), data.xs);
    if (s.grid_refinement_delta > kGridRefinementLimit) {
      s.warnings.push_back("QuadratureWarning: evidence changes by " + format_number(s.grid_refinement_delta) +
                           " under grid refinement at n = " + std::to_string(n));
    }
  }
  return s;
}

PairedGap paired_gap(const ErrorEstimate& larger, const ErrorEstimate& smaller, std::size_t resamples,
                     std::uint64_t seed) {
  const std::vector<double> d = differences(larger, smaller);
  if (d.size() < 2) throw RunFailed("fewer than two paired replications");
  if (resamples == 0) throw DomainError("the bootstrap needs at least one resample");
  PairedGap g;
  g.n = smaller.n;
  double sum = 0.0;
  for (double v : d) sum += v;
  const double count = static_cast<double>(d.size());
  g.mean = sum / count;
  double ss = 0.0;
  for (double v : d) ss += (v - g.mean) * (v - g.mean);
  g.std_error = std::sqrt(ss / (count - 1.0) / count);

  RandomStream rng(seed);
  std::size_t positive = 0;
  for (std::size_t b = 0; b < resamples; ++b) {
    double s = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) s += d[rng.index_below(d.size())];
    if (s > 0.0) ++positive;
  }
  g.confidence = static_cast<double>(positive) / static_cast<double>(resamples);
  return g;
}

MethodComparison compare_methods(const StudyContext& ctx, Functional functional,
                                 const std::vector<std::size_t>& n_grid, std::size_t R, std::uint64_t seed,
                                 double alpha, std::size_t bootstrap_resamples) {
  if (functional == Functional::training_error) {
    throw DomainError("the training error is defined for the ML fit only");
  }
  MethodComparison c;
  c.ml = convergence_study(ctx, functional, Method::ml, n_grid, R, seed, alpha);
  c.bayes = convergence_study(ctx, functional, Method::bayes, n_grid, R, seed, alpha);
  std::vector<ErrorEstimate> gaps;
  for (std::size_t j = 0; j < n_grid.size(); ++j) {
    const ErrorEstimate& ml = c.ml.estimates[j];
    const ErrorEstimate& bayes = c.bayes.estimates[j];
    c.gaps.push_back(paired_gap(ml, bayes, bootstrap_resamples, splitmix64(level_seed(seed, n_grid[j]) + 1)));
    gaps.push_back(gap_estimate(ml, bayes, n_grid[j]));
  }
  const CoefficientReport report = coefficient_report(ctx.model(), ctx.w_star(), alpha);
  std::optional<double> theory;
  if (functional == Functional::type1) theory = report.gap_ml_bayes;
  if (functional == Functional::type2p || functional == Functional::type3p) theory = report.gap_ml_bayes_alpha;
  if (functional == Functional::generalization) theory = 0.0;
  c.gap_series = fit_series(std::move(gaps), theory);
  return c;
}

SupplementaryStudy supplementary_study(const StudyContext& ctx, double alpha,
                                       const std::vector<std::size_t>& n_grid, std::size_t R,
                                       std::uint64_t seed, std::size_t bootstrap_resamples) {
  require_grid(n_grid);
  const CoefficientReport report = coefficient_report(ctx.model(), ctx.w_star(), alpha);
  SupplementaryStudy s;
  s.alpha = alpha;
  s.min_eigenvalue = report.eigenvalues.smallest();
  const double gain = supplementary_gain(alpha, build_fisher_set(ctx.model(), ctx.w_star()));

  std::vector<ErrorEstimate> partial;
  std::vector<ErrorEstimate> gaps;
  for (std::size_t n : n_grid) {
    const std::size_t reduced_n = alpha_sites(alpha, n);
    const std::uint64_t shared = level_seed(seed, n);
    partial.push_back(estimate_type2p(ctx, Method::bayes, n, R, shared, alpha));
    s.reduced.push_back(estimate_type1(ctx, Method::bayes, reduced_n, R, shared));
    s.gaps.push_back(paired_gap(s.reduced.back(), partial.back(), bootstrap_resamples, splitmix64(shared + 1)));
    gaps.push_back(gap_estimate(s.reduced.back(), partial.back(), n));
  }
  s.partial = fit_series(std::move(partial), report.bayes_type2p);
  s.gap_series = fit_series(std::move(gaps), gain);
  return s;
}

UnbiasednessCheck unbiasedness_check(const StudyContext& ctx, std::size_t n, std::size_t R,
                                     std::uint64_t seed) {
  if (n > kEnumerationLimit) throw EnumerationTooLarge(n, kEnumerationLimit);
  const ModelSpec& m = ctx.model();
  UnbiasednessCheck u;
  u.sampled = estimate_type1(ctx, Method::bayes, n, R, seed);

  // Same data as the sampled estimator: the exact label sum replaces the drawn labels.
  const auto grid = ctx.grid();
  u.exact = u.sampled;
  for (std::size_t r = 0; r < R; ++r) {
    if (std::isnan(u.sampled.values[r])) {
      u.exact.values[r] = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    RandomStream rng = RandomStream::derive(seed, r);
    Dataset data = sample_joint(m, ctx.w_star(), n, rng);
    const PosteriorGrid post(grid, data.xs);
    double total = 0.0;
    for_each_labeling(n, [&](std::span<const int> ys) {
      std::copy(ys.begin(), ys.end(), data.ys->begin());
      const double lq = true_latent_logprob(m, ctx.w_star(), data);
      total += std::exp(lq) * (lq - bayes_latent_logprob(post, data));
    });
    u.exact.values[r] = total / static_cast<double>(n);
  }
  summarize(u.exact);

  const ErrorEstimate diff = gap_estimate(u.sampled, u.exact, n);
  u.difference = diff.mean;
  u.difference_stderr = diff.std_error;
  u.pass = std::abs(u.difference) <= kStderrMultiple * u.difference_stderr;
  return u;
}

}  // namespace latentacc
