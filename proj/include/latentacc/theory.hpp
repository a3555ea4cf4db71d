#pragma once

// Dominant-order 1/n coefficients of the latent-variable error functions.
// Every coefficient c here means D(n) = c / n + o(1/n).

#include <cstddef>

#include "latentacc/fisher.hpp"
#include "latentacc/model.hpp"
#include "latentacc/numerics.hpp"

namespace latentacc {

struct CoefficientReport {
  double ml_type1 = 0.0;
  double ml_type2 = 0.0;
  double ml_type3 = 0.0;
  double bayes_type1 = 0.0;
  double bayes_type2p = 0.0;
  double bayes_type3p = 0.0;
  double prediction = 0.0;
  double gap_ml_bayes = 0.0;
  double gap_ml_bayes_alpha = 0.0;
  double supplementary_gain = 0.0;  // NaN when lambda_min < 1
  double alpha = 1.0;
  EigenList eigenvalues;  // of I_XY I_X^{-1}
};

/// Tr[(I_XY - I_X) I_X^{-1}] / 2 for ML Types I, II and III.
double coeff_ml_type1(const FisherSet& f);
/// ln det[I_XY I_X^{-1}] / 2.
double coeff_bayes_type1(const FisherSet& f);

/// alpha I_XY + (1 - alpha) I_X.
SymMatrix k_matrix(double alpha, const FisherSet& f);

/// ln det[K_XY I_X^{-1}] / (2 alpha), from the eigenvalues of I_XY I_X^{-1}.
double coeff_bayes_type2p(double alpha, const FisherSet& f);
/// Same coefficient as Type II', computed from log-determinants and checked
/// against coeff_bayes_type2p (IdentityViolation on mismatch).
double coeff_bayes_type3p(double alpha, const FisherSet& f);

/// sum(lambda - 1 - ln lambda) / 2.
double gap_ml_bayes(const FisherSet& f);
/// sum(mu - 1 - ln mu) / (2 alpha) with mu = alpha lambda + 1 - alpha.
double gap_ml_bayes_alpha(double alpha, const FisherSet& f);
/// sum[ln lambda - ln(alpha lambda + 1 - alpha)] / (2 alpha); requires
/// lambda_min >= 1 (AssumptionViolated otherwise).
double supplementary_gain(double alpha, const FisherSet& f);

double coeff_prediction(std::size_t d);

CoefficientReport coefficient_report(const ModelSpec& m, const ParamVec& w, double alpha);

void check_alpha(double alpha);

}  // namespace latentacc
