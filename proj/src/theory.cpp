#include "latentacc/theory.hpp"

#include <cmath>
#include <limits>

#include "latentacc/errors.hpp"

namespace latentacc {

namespace {

constexpr double kPathAgreement = 1e-10;

void require_agreement(double a, double b, const char* what) {
  if (std::abs(a - b) > kPathAgreement * std::max(1.0, std::abs(a))) {
    throw IdentityViolation(std::string(what) + ": computation paths disagree (" +
                            std::to_string(a) + " vs " + std::to_string(b) + ")");
  }
}

EigenList information_ratio_eigenvalues(const FisherSet& f) {
  return generalized_eigenvalues(f.i_xy, f.i_x);
}

}  // namespace

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw AlphaOutOfRange(alpha);
}

double coeff_ml_type1(const FisherSet& f) {
  const SymMatrix diff = f.i_xy - f.i_x;
  const double via_trace = 0.5 * trace(solve_spd(f.i_x, diff.matrix()));
  double sum = 0.0;
  for (double l : information_ratio_eigenvalues(f).values) sum += l - 1.0;
  const double via_eigen = 0.5 * sum;
  require_agreement(via_trace, via_eigen, "coeff_ml_type1");
  return via_trace;
}

double coeff_bayes_type1(const FisherSet& f) {
  const double via_logdet = 0.5 * (log_det_spd(f.i_xy) - log_det_spd(f.i_x));
  double sum = 0.0;
  for (double l : information_ratio_eigenvalues(f).values) sum += std::log(l);
  require_agreement(via_logdet, 0.5 * sum, "coeff_bayes_type1");
  return via_logdet;
}

SymMatrix k_matrix(double alpha, const FisherSet& f) {
  check_alpha(alpha);
  return alpha * f.i_xy + (1.0 - alpha) * f.i_x;
}

double coeff_bayes_type2p(double alpha, const FisherSet& f) {
  check_alpha(alpha);
  double sum = 0.0;
  for (double l : information_ratio_eigenvalues(f).values) sum += std::log(alpha * l + 1.0 - alpha);
  return sum / (2.0 * alpha);
}

double coeff_bayes_type3p(double alpha, const FisherSet& f) {
  check_alpha(alpha);
  const double via_logdet =
      (log_det_spd(k_matrix(alpha, f)) - log_det_spd(f.i_x)) / (2.0 * alpha);
  require_agreement(via_logdet, coeff_bayes_type2p(alpha, f), "coeff_bayes_type3p");
  return via_logdet;
}

double gap_ml_bayes(const FisherSet& f) {
  double sum = 0.0;
  for (double l : information_ratio_eigenvalues(f).values) sum += l - 1.0 - std::log(l);
  return 0.5 * sum;
}

double gap_ml_bayes_alpha(double alpha, const FisherSet& f) {
  check_alpha(alpha);
  double sum = 0.0;
  for (double l : information_ratio_eigenvalues(f).values) {
    const double mu = alpha * l + 1.0 - alpha;
    sum += mu - 1.0 - std::log(mu);
  }
  return sum / (2.0 * alpha);
}

double supplementary_gain(double alpha, const FisherSet& f) {
  check_alpha(alpha);
  const EigenList lambda = information_ratio_eigenvalues(f);
  if (lambda.smallest() < 1.0 - 1e-8) {
    throw AssumptionViolated("supplementary_gain requires lambda_min >= 1, got " +
                             std::to_string(lambda.smallest()));
  }
  double sum = 0.0;
  for (double l : lambda.values) sum += std::log(l) - std::log(alpha * l + 1.0 - alpha);
  return sum / (2.0 * alpha);
}

double coeff_prediction(std::size_t d) {
  if (d == 0) throw DomainError("dimension must be positive");
  return 0.5 * static_cast<double>(d);
}

CoefficientReport coefficient_report(const ModelSpec& m, const ParamVec& w, double alpha) {
  check_alpha(alpha);
  const FisherSet f = build_fisher_set(m, w);
  CoefficientReport r;
  r.alpha = alpha;
  r.eigenvalues = information_ratio_eigenvalues(f);
  r.ml_type1 = coeff_ml_type1(f);
  // One formula serves all three ML types.
  r.ml_type2 = r.ml_type1;
  r.ml_type3 = r.ml_type1;
  r.bayes_type1 = coeff_bayes_type1(f);
  r.bayes_type2p = coeff_bayes_type2p(alpha, f);
  r.bayes_type3p = coeff_bayes_type3p(alpha, f);
  r.prediction = coeff_prediction(m.dim());
  r.gap_ml_bayes = gap_ml_bayes(f);
  r.gap_ml_bayes_alpha = gap_ml_bayes_alpha(alpha, f);
  try {
    r.supplementary_gain = supplementary_gain(alpha, f);
  } catch (const AssumptionViolated&) {
    r.supplementary_gain = std::numeric_limits<double>::quiet_NaN();
  }
  return r;
}

}  // namespace latentacc
