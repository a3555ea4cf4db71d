#include <doctest.h>

#include <cmath>

#include "latentacc/errors.hpp"
#include "latentacc/model.hpp"

using namespace latentacc;

namespace {
const ModelSpec kBinom = ModelSpec::binomial_mixture(3);
const ModelSpec kGauss = ModelSpec::gaussian_mixture_1d();
}  // namespace

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(ParamVec(kBinom, {0.5, 0.8}), DomainError);
  CHECK_THROWS_AS(ParamVec(kBinom, {0.0, 0.8, 0.25}), DomainError);
  CHECK_THROWS_AS(ParamVec(kBinom, {0.5, 1.0, 0.25}), DomainError);
  CHECK_THROWS_AS(ParamVec(kBinom, {0.5, NAN, 0.25}), DomainError);
  CHECK_NOTHROW(ParamVec(kGauss, {0.4, 7.0, -3.0}));
  CHECK_THROWS_AS(ModelSpec::binomial_mixture(2), DomainError);
}

TEST_CASE("binomial marginal density") {
  const ParamVec w(kBinom, {0.5, 0.8, 0.25});
  const double expect = 0.5 * std::pow(0.8, 3) + 0.5 * std::pow(0.25, 3);
  CHECK(std::exp(marginal_log_density(kBinom, w, 3.0)) == doctest::Approx(expect).epsilon(1e-14));
  double total = 0.0;
  for (double x : kBinom.support()) total += std::exp(marginal_log_density(kBinom, w, x));
  CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(marginal_log_density(kBinom, w, 4.0), DomainError);
  CHECK_THROWS_AS(marginal_log_density(kBinom, w, 1.5), DomainError);
}

TEST_CASE("latent conditional sums to one and stays finite in the tails") {
  const ParamVec w(kGauss, {0.4, 1.5, -1.5});
  for (double x : {-40.0, -2.0, 0.0, 0.3, 40.0}) {
    const auto lp = latent_log_conditional(kGauss, w, x);
    CHECK(std::isfinite(lp[0]));
    CHECK(std::isfinite(lp[1]));
    CHECK(std::exp(lp[0]) + std::exp(lp[1]) == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("conditional score is the joint score minus the marginal score") {
  const ParamVec w(kBinom, {0.3, 0.6, 0.1});
  const auto sc = score_conditional(kBinom, w, 2.0, 1);
  const auto sj = score_joint(kBinom, w, 2.0, 1);
  const auto sm = score_marginal(kBinom, w, 2.0);
  for (std::size_t i = 0; i < 3; ++i) CHECK(sc[i] == doctest::Approx(sj[i] - sm[i]));
}

TEST_CASE("marginal score matches finite differences") {
  const std::vector<double> base{0.35, 0.7, 0.2};
  for (double x : {0.0, 1.0, 3.0}) {
    const auto s = score_marginal(kBinom, ParamVec(kBinom, base), x);
    for (std::size_t i = 0; i < 3; ++i) {
      auto up = base, dn = base;
      up[i] += 1e-6;
      dn[i] -= 1e-6;
      const double fd = (marginal_log_density(kBinom, ParamVec(kBinom, up), x) -
                         marginal_log_density(kBinom, ParamVec(kBinom, dn), x)) /
                        2e-6;
      CHECK(s[i] == doctest::Approx(fd).epsilon(1e-7));
    }
  }
}

TEST_CASE("sampling is deterministic and consistent with the weight") {
  const ParamVec w(kBinom, {0.5, 0.8, 0.25});
  RandomStream a(1), b(1);
  const Dataset da = sample_joint(kBinom, w, 2000, a);
  const Dataset db = sample_joint(kBinom, w, 2000, b);
  CHECK(da.xs == db.xs);
  CHECK(*da.ys == *db.ys);
  double ones = 0.0;
  for (int y : *da.ys) ones += y == 1;
  CHECK(ones / 2000.0 == doctest::Approx(0.5).epsilon(0.1));
}

TEST_CASE("identifiability report") {
  const auto good = validate_identifiability(kBinom, ParamVec(kBinom, {0.5, 0.8, 0.25}));
  CHECK(good.ok);
  CHECK(good.min_mixing == doctest::Approx(0.5));
  const auto bad = validate_identifiability(kBinom, ParamVec(kBinom, {0.5, 0.4, 0.4}));
  CHECK_FALSE(bad.ok);
  CHECK(bad.component_distance == 0.0);
  const auto gauss = validate_identifiability(kGauss, ParamVec(kGauss, {0.4, 1.5, -1.5}));
  CHECK(gauss.ok);
  CHECK(gauss.component_distance == doctest::Approx(std::erf(3.0 / (2.0 * std::sqrt(2.0)))));
}

TEST_CASE("label swap is an involution and preserves the marginal") {
  const ParamVec w(kBinom, {0.3, 0.6, 0.1});
  const ParamVec s = swap_labels(kBinom, w);
  CHECK(s.weight() == doctest::Approx(0.7));
  CHECK(s.theta(1) == 0.1);
  for (double x : kBinom.support())
    CHECK(marginal_log_density(kBinom, s, x) == doctest::Approx(marginal_log_density(kBinom, w, x)));
  const ParamVec back = swap_labels(kBinom, s);
  CHECK(back.theta(1) == w.theta(1));
}
