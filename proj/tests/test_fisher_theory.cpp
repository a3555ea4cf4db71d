#include <doctest.h>

#include <cmath>

#include "latentacc/errors.hpp"
#include "latentacc/fisher.hpp"
#include "latentacc/theory.hpp"

using namespace latentacc;

namespace {

const ModelSpec kBinom = ModelSpec::binomial_mixture(3);
const ModelSpec kGauss = ModelSpec::gaussian_mixture_1d();

// Reference values from tests/oracles/fisher_oracle.py (sympy scores, exact
// support sums, numpy eigensolver).
const double kIx[3][3] = {{2.366813856430346, 2.005043277970396, 1.8820392519851683},
                          {2.005043277970396, 5.0697263937727834, -0.7372617342209796},
                          {1.8820392519851683, -0.7372617342209796, 4.488643658834532}};
const double kLambda[3] = {17.33145819616347, 1.572682660167948, 1.0};

}  // namespace

TEST_CASE("reference binomial mixture information matrices") {
  const FisherSet f = build_fisher_set(kBinom, ParamVec(kBinom, {0.5, 0.8, 0.25}));
  CHECK(f.method == FisherMethod::exact);
  CHECK(f.i_xy(0, 0) == doctest::Approx(4.0).epsilon(1e-13));
  CHECK(f.i_xy(1, 1) == doctest::Approx(9.375).epsilon(1e-13));
  CHECK(f.i_xy(2, 2) == doctest::Approx(8.0).epsilon(1e-13));
  CHECK(std::abs(f.i_xy(0, 1)) < 1e-13);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(f.i_x(i, j) == doctest::Approx(kIx[i][j]).epsilon(1e-12));
}

TEST_CASE("Fisher identities hold on the exact path") {
  const FisherSet f = build_fisher_set(kBinom, ParamVec(kBinom, {0.3, 0.9, 0.05}));
  CHECK(max_abs(f.j_xy - f.i_x.matrix()) <= 1e-12 * std::max(1.0, max_abs(f.i_xy.matrix())));
  const auto cond = fisher_conditional(kBinom, ParamVec(kBinom, {0.3, 0.9, 0.05}));
  CHECK(max_abs(cond.direct.matrix() - cond.difference.matrix()) < 1e-10);
}

TEST_CASE("Gaussian mixture takes the quadrature path") {
  const FisherSet f = build_fisher_set(kGauss, ParamVec(kGauss, {0.4, 1.5, -1.5}));
  CHECK(f.method == FisherMethod::quadrature);
  CHECK(f.i_xy(1, 1) == doctest::Approx(0.4).epsilon(1e-10));
  CHECK(f.i_xy(2, 2) == doctest::Approx(0.6).epsilon(1e-10));
  CHECK(f.i_xy(0, 0) == doctest::Approx(1.0 / (0.4 * 0.6)).epsilon(1e-10));
  CHECK(max_abs(f.j_xy - f.i_x.matrix()) <= 1e-6);
  CHECK(f.quadrature_tail < 1e-8);
}

TEST_CASE("Monte Carlo Fisher agrees within standard errors") {
  RandomStream rng(3);
  const ParamVec w(kBinom, {0.5, 0.8, 0.25});
  const MonteCarloFisher mc = fisher_montecarlo(kBinom, w, 200000, rng);
  const FisherSet f = build_fisher_set(kBinom, w);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(std::abs(mc.i_xy(i, j) - f.i_xy(i, j)) < 5.0 * mc.i_xy_stderr(i, j) + 1e-9);
      CHECK(std::abs(mc.i_x(i, j) - f.i_x(i, j)) < 5.0 * mc.i_x_stderr(i, j) + 1e-9);
    }
}

TEST_CASE("coefficients at the reference point") {
  const CoefficientReport r = coefficient_report(kBinom, ParamVec(kBinom, {0.5, 0.8, 0.25}), 0.5);
  for (std::size_t i = 0; i < 3; ++i) CHECK(r.eigenvalues[i] == doctest::Approx(kLambda[i]).epsilon(1e-12));
  CHECK(r.ml_type1 == doctest::Approx(8.45207042816571).epsilon(1e-12));
  CHECK(r.ml_type2 == r.ml_type1);
  CHECK(r.ml_type3 == r.ml_type1);
  CHECK(r.bayes_type1 == doctest::Approx(1.6526530525032967).epsilon(1e-12));
  CHECK(r.gap_ml_bayes == doctest::Approx(6.7994173756624132).epsilon(1e-12));
  CHECK(r.bayes_type2p == doctest::Approx(2.4672734411339383).epsilon(1e-12));
  CHECK(r.bayes_type3p == doctest::Approx(r.bayes_type2p).epsilon(1e-12));
  CHECK(r.gap_ml_bayes_alpha == doctest::Approx(5.9847969870317712).epsilon(1e-12));
  CHECK(r.supplementary_gain == doctest::Approx(0.83803266387265474).epsilon(1e-12));
  CHECK(r.prediction == 1.5);
}

TEST_CASE("coefficient properties") {
  const FisherSet f = build_fisher_set(kBinom, ParamVec(kBinom, {0.5, 0.8, 0.25}));
  SUBCASE("alpha = 1 reduces the partial coefficient to Type I") {
    CHECK(coeff_bayes_type2p(1.0, f) == doctest::Approx(coeff_bayes_type1(f)).epsilon(1e-13));
    CHECK(gap_ml_bayes_alpha(1.0, f) == doctest::Approx(gap_ml_bayes(f)).epsilon(1e-13));
  }
  SUBCASE("Bayes never exceeds ML") {
    CHECK(coeff_bayes_type1(f) <= coeff_ml_type1(f));
    CHECK(gap_ml_bayes(f) >= 0.0);
  }
  SUBCASE("partial coefficient grows as alpha shrinks") {
    double prev = coeff_bayes_type2p(1.0, f);
    for (double a : {0.8, 0.5, 0.25, 0.1, 0.01}) {
      const double v = coeff_bayes_type2p(a, f);
      CHECK(v >= prev - 1e-12);
      prev = v;
    }
    CHECK(prev <= coeff_ml_type1(f) + 1e-9);
  }
  SUBCASE("alpha range") {
    CHECK_THROWS_AS(coeff_bayes_type2p(0.0, f), AlphaOutOfRange);
    CHECK_THROWS_AS(coeff_bayes_type2p(1.5, f), AlphaOutOfRange);
  }
}

TEST_CASE("coefficients on random identifiable points") {
  RandomStream rng(99);
  int checked = 0;
  while (checked < 20) {
    const double b = 0.05 + 0.9 * rng.uniform();
    const double c = 0.05 + 0.9 * rng.uniform();
    if (std::abs(b - c) < 0.1) continue;
    const ParamVec w(kBinom, {0.1 + 0.8 * rng.uniform(), b, c});
    const FisherSet f = build_fisher_set(kBinom, w);
    const EigenList lam = generalized_eigenvalues(f.i_xy, f.i_x);
    CHECK(lam.smallest() >= 1.0 - 1e-8);
    CHECK(coeff_ml_type1(f) >= coeff_bayes_type1(f));
    CHECK(supplementary_gain(0.5, f) >= -1e-12);
    ++checked;
  }
}
