#pragma once

// Replication-based estimates of the latent-variable error functionals and
// convergence studies of n * D(n) against the theoretical coefficients.
//
// Replication r draws from RandomStream::derive(seed, r): first the n
// training pairs, then any future observations. Estimates that share a seed
// therefore share data, which is what the paired comparisons rely on.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "latentacc/estimators.hpp"
#include "latentacc/model.hpp"
#include "latentacc/theory.hpp"

namespace latentacc {

enum class Functional { type1, type2, type3, type2p, type3p, generalization, training_error };
enum class Method { ml, bayes };

std::string to_string(Functional f);
std::string to_string(Method m);
Functional functional_from_string(const std::string& name);
Method method_from_string(const std::string& name);

/// Replications aborted above this fraction fail the run.
inline constexpr double kMaxAbortFraction = 0.01;

/// Everything an estimate needs besides (n, R, seed).
class StudyContext {
 public:
  StudyContext(ModelSpec model, ParamVec w_star, Prior prior,
               std::size_t nodes_per_axis = kDefaultNodesPerAxis);

  const ModelSpec& model() const { return model_; }
  const ParamVec& w_star() const { return w_star_; }
  const Prior& prior() const { return prior_; }
  std::size_t nodes_per_axis() const { return nodes_per_axis_; }
  /// Parameter grid for the Bayes paths; built on first use.
  std::shared_ptr<const ParameterGrid> grid() const;

  /// Worker threads; 0 means one per hardware thread.
  std::size_t threads = 0;
  /// ML latent functionals use the exact per-site inner sum.
  bool rao_blackwell = true;
  /// Training error of the complete-data fit p(x, y | w_XY) instead of p(x | w_X).
  bool complete_data_training = false;
  EmOptions em;

 private:
  ModelSpec model_;
  ParamVec w_star_;
  Prior prior_;
  std::size_t nodes_per_axis_;
  mutable std::shared_ptr<const ParameterGrid> grid_;
};

struct ErrorEstimate {
  Functional functional = Functional::type1;
  Method method = Method::ml;
  std::size_t n = 0;
  double alpha = 1.0;
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t replications = 0;  // completed replications
  std::uint64_t seed = 0;
  std::size_t aborted = 0;
  std::size_t boundary_hits = 0;  // ML fits that ended on the domain boundary
  /// Per-replication values indexed by replication; NaN where aborted.
  std::vector<double> values;

  double scaled_mean() const { return static_cast<double>(n) * mean; }
  double scaled_std_error() const { return static_cast<double>(n) * std_error; }
};

/// Dispatches to the functional's estimator. alpha applies to type2p/type3p.
ErrorEstimate estimate(const StudyContext& ctx, Functional functional, Method method, std::size_t n,
                       std::size_t replications, std::uint64_t seed, double alpha = 1.0);

ErrorEstimate estimate_type1(const StudyContext& ctx, Method method, std::size_t n, std::size_t R,
                             std::uint64_t seed);
ErrorEstimate estimate_type2(const StudyContext& ctx, Method method, std::size_t n, std::size_t R,
                             std::uint64_t seed);
ErrorEstimate estimate_type3(const StudyContext& ctx, Method method, std::size_t n, std::size_t R,
                             std::uint64_t seed);
ErrorEstimate estimate_type2p(const StudyContext& ctx, Method method, std::size_t n, std::size_t R,
                              std::uint64_t seed, double alpha);
ErrorEstimate estimate_type3p(const StudyContext& ctx, Method method, std::size_t n, std::size_t R,
                              std::uint64_t seed, double alpha);
ErrorEstimate estimate_generalization(const StudyContext& ctx, Method method, std::size_t n,
                                      std::size_t R, std::uint64_t seed);
/// E[ln q(X^n) - ln p(X^n | w_hat)] / n for the ML fit.
ErrorEstimate training_error_check(const StudyContext& ctx, std::size_t n, std::size_t R,
                                   std::uint64_t seed);

/// Mean and standard error of a set of per-replication values (NaN skipped).
void summarize(ErrorEstimate& e);

// ---------------------------------------------------------------------------
// Studies

enum class Verdict { pass, fail, no_target };
std::string to_string(Verdict v);

struct ConvergenceSeries {
  Functional functional = Functional::type1;
  Method method = Method::ml;
  double alpha = 1.0;
  std::vector<std::size_t> n_grid;
  std::vector<ErrorEstimate> estimates;
  std::optional<double> theory_coefficient;
  double extrapolated_coefficient = 0.0;  // c in n D(n) = c + b / n
  double extrapolation_stderr = 0.0;
  double slope = 0.0;  // b
  /// Weighted residual sum of squares of the fit (k - 2 degrees of freedom).
  double fit_chi2 = 0.0;
  Verdict verdict = Verdict::no_target;
  /// The extrapolation stderr exceeds half the theory value; raise R.
  bool insufficient_precision = false;
  /// Grid-refinement check of the Bayes evidence; NaN when not run.
  double grid_refinement_delta = 0.0;
  std::vector<std::string> warnings;
};

/// Seed of the estimates at sample size n within a study; the methods and
/// functionals compared at one n share it.
std::uint64_t level_seed(std::uint64_t seed, std::size_t n);

/// Theory coefficient for (functional, method); none where no theory exists.
std::optional<double> theory_coefficient(const CoefficientReport& r, Functional f, Method m);

/// Weighted least squares of n * mean on 1/n and the verdict against theory.
ConvergenceSeries fit_series(std::vector<ErrorEstimate> estimates, std::optional<double> theory);

/// Pass iff |extrapolated - theory| <= max(5% |theory|, 3 standard errors).
Verdict judge(double extrapolated, double standard_error, double theory);

ConvergenceSeries convergence_study(const StudyContext& ctx, Functional functional, Method method,
                                    const std::vector<std::size_t>& n_grid, std::size_t R,
                                    std::uint64_t seed, double alpha = 1.0);

/// Mean of paired per-replication differences with a replication bootstrap.
struct PairedGap {
  std::size_t n = 0;
  double mean = 0.0;
  double std_error = 0.0;
  /// Fraction of bootstrap resamples whose mean difference is positive.
  double confidence = 0.0;
};

PairedGap paired_gap(const ErrorEstimate& larger, const ErrorEstimate& smaller,
                     std::size_t resamples, std::uint64_t seed);

/// ML versus Bayes on shared seeds, with the gap fitted against its theory.
struct MethodComparison {
  ConvergenceSeries ml;
  ConvergenceSeries bayes;
  std::vector<PairedGap> gaps;
  ConvergenceSeries gap_series;
};

MethodComparison compare_methods(const StudyContext& ctx, Functional functional,
                                 const std::vector<std::size_t>& n_grid, std::size_t R,
                                 std::uint64_t seed, double alpha = 1.0,
                                 std::size_t bootstrap_resamples = 2000);

/// Bayes Type I at alpha n against Type II' at n on shared seeds.
struct SupplementaryStudy {
  double alpha = 0.5;
  ConvergenceSeries partial;  // Type II' at n
  std::vector<ErrorEstimate> reduced;  // Type I at alpha n
  std::vector<PairedGap> gaps;  // D(alpha n) - D_{Y1|X^n}(n)
  ConvergenceSeries gap_series;  // n * gap against the supplementary gain
  double min_eigenvalue = 0.0;  // of I_XY I_X^{-1}
};

SupplementaryStudy supplementary_study(const StudyContext& ctx, double alpha,
                                       const std::vector<std::size_t>& n_grid, std::size_t R,
                                       std::uint64_t seed, std::size_t bootstrap_resamples = 2000);

/// Bayes Type I: joint-sampling estimator against the exact sum over all
/// 2^n labelings, per replication on shared data (n <= 12).
struct UnbiasednessCheck {
  ErrorEstimate sampled;
  ErrorEstimate exact;
  double difference = 0.0;
  double difference_stderr = 0.0;
  bool pass = false;
};

UnbiasednessCheck unbiasedness_check(const StudyContext& ctx, std::size_t n, std::size_t R,
                                     std::uint64_t seed);

}  // namespace latentacc
