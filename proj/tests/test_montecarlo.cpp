#include <doctest.h>

#include <cmath>
#include <cstring>

#include "latentacc/errors.hpp"
#include "latentacc/montecarlo.hpp"

using namespace latentacc;

namespace {

const ModelSpec kBinom = ModelSpec::binomial_mixture(3);
const ParamVec kStar(kBinom, {0.5, 0.8, 0.25});

StudyContext context(std::size_t threads = 1, std::size_t nodes = 24) {
  StudyContext ctx(kBinom, kStar, Prior::aligned(kBinom, kStar), nodes);
  ctx.threads = threads;
  return ctx;
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::memcmp(&a[i], &b[i], sizeof(double)) != 0) return false;
  }
  return true;
}

ErrorEstimate synthetic(std::size_t n, double scaled_mean, double scaled_se) {
  ErrorEstimate e;
  e.n = n;
  e.mean = scaled_mean / static_cast<double>(n);
  e.std_error = scaled_se / static_cast<double>(n);
  return e;
}

}  // namespace

TEST_CASE("estimates do not depend on the thread count") {
  const StudyContext one = context(1);
  const StudyContext three = context(3);
  CHECK(same_bits(estimate_type1(one, Method::ml, 60, 30, 11).values,
                  estimate_type1(three, Method::ml, 60, 30, 11).values));
  CHECK(same_bits(estimate_type1(one, Method::bayes, 20, 6, 11).values,
                  estimate_type1(three, Method::bayes, 20, 6, 11).values));
  CHECK(same_bits(estimate_type3p(one, Method::bayes, 20, 4, 5, 0.5).values,
                  estimate_type3p(three, Method::bayes, 20, 4, 5, 0.5).values));
}

TEST_CASE("ML Type II reproduces ML Type I exactly") {
  const StudyContext ctx = context();
  const ErrorEstimate t1 = estimate_type1(ctx, Method::ml, 80, 40, 3);
  const ErrorEstimate t2 = estimate_type2(ctx, Method::ml, 80, 40, 3);
  CHECK(same_bits(t1.values, t2.values));
  CHECK(t1.mean == t2.mean);
}

TEST_CASE("Type II' at alpha = 1 reproduces Type I exactly") {
  const StudyContext ctx = context();
  const ErrorEstimate t1 = estimate_type1(ctx, Method::bayes, 20, 5, 9);
  const ErrorEstimate t2p = estimate_type2p(ctx, Method::bayes, 20, 5, 9, 1.0);
  CHECK(same_bits(t1.values, t2p.values));
}

TEST_CASE("Rao-Blackwellization lowers the variance without moving the mean") {
  // small n, where label noise is a visible share of the variance
  StudyContext ctx = context();
  const ErrorEstimate rb = estimate_type1(ctx, Method::ml, 20, 2000, 21);
  ctx.rao_blackwell = false;
  const ErrorEstimate plain = estimate_type1(ctx, Method::ml, 20, 2000, 21);
  CHECK(rb.std_error < plain.std_error);
  CHECK(std::abs(rb.mean - plain.mean) < 3.0 * std::hypot(rb.std_error, plain.std_error));
}

TEST_CASE("aborted replications beyond one percent fail the run") {
  StudyContext ctx = context();
  ctx.complete_data_training = true;
  // with two sites a component is often left without labels
  CHECK_THROWS_AS(training_error_check(ctx, 2, 50, 1), RunFailed);
  const ErrorEstimate ok = training_error_check(ctx, 80, 50, 1);
  CHECK(ok.aborted == 0);
  CHECK(ok.replications == 50);
}

TEST_CASE("estimate arguments are validated") {
  const StudyContext ctx = context();
  CHECK_THROWS_AS(estimate_type1(ctx, Method::ml, 50, 1, 1), DomainError);
  CHECK_THROWS_AS(estimate_type1(ctx, Method::ml, 0, 10, 1), DomainError);
  CHECK_THROWS_AS(estimate_type2p(ctx, Method::bayes, 25, 4, 1, 0.5), AlphaGridMismatch);
  CHECK_THROWS_AS(estimate(ctx, Functional::training_error, Method::bayes, 20, 4, 1), DomainError);
  CHECK_THROWS_AS(convergence_study(ctx, Functional::type1, Method::ml, {50, 100, 200}, 4, 1), DomainError);
  CHECK_THROWS_AS(convergence_study(ctx, Functional::type1, Method::ml, {50, 100, 100, 200}, 4, 1), DomainError);
  CHECK_THROWS_AS(StudyContext(kBinom, kStar, Prior::aligned(kBinom, swap_labels(kBinom, kStar))), DomainError);
}

TEST_CASE("functional and method names round-trip") {
  for (Functional f : {Functional::type1, Functional::type2, Functional::type3, Functional::type2p,
                       Functional::type3p, Functional::generalization, Functional::training_error}) {
    CHECK(functional_from_string(to_string(f)) == f);
  }
  CHECK(method_from_string("bayes") == Method::bayes);
  CHECK_THROWS_AS(method_from_string("map"), DomainError);
}

TEST_CASE("series fit recovers an exact c + b / n") {
  std::vector<ErrorEstimate> es;
  for (std::size_t n : {50, 100, 200, 400}) es.push_back(synthetic(n, 2.0 + 30.0 / static_cast<double>(n), 0.1));
  const ConvergenceSeries s = fit_series(es, 2.0);
  CHECK(s.extrapolated_coefficient == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(s.slope == doctest::Approx(30.0).epsilon(1e-10));
  CHECK(s.fit_chi2 == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(s.verdict == Verdict::pass);
  CHECK_FALSE(s.insufficient_precision);

  const ConvergenceSeries wrong = fit_series(es, 3.0);
  CHECK(wrong.verdict == Verdict::fail);
  CHECK(fit_series(es, std::nullopt).verdict == Verdict::no_target);

  std::vector<ErrorEstimate> noisy;
  for (std::size_t n : {50, 100, 200, 400}) noisy.push_back(synthetic(n, 2.0, 5.0));
  CHECK(fit_series(noisy, 2.0).insufficient_precision);
}

TEST_CASE("judge uses the larger of 5% and three standard errors") {
  CHECK(judge(1.04, 0.001, 1.0) == Verdict::pass);
  CHECK(judge(1.06, 0.001, 1.0) == Verdict::fail);
  CHECK(judge(1.2, 0.1, 1.0) == Verdict::pass);
  CHECK(judge(-1.52, 0.0, -1.5) == Verdict::pass);
  CHECK(judge(std::nan(""), 0.1, 1.0) == Verdict::fail);
}

TEST_CASE("paired gap and bootstrap confidence") {
  ErrorEstimate a, b;
  a.values = {3.0, 4.0, 5.0, 6.0};
  b.values = {1.0, 1.0, 1.0, std::nan("")};
  const PairedGap g = paired_gap(a, b, 500, 1);
  CHECK(g.mean == doctest::Approx(3.0));
  CHECK(g.std_error == doctest::Approx(1.0 / std::sqrt(3.0)));
  CHECK(g.confidence == 1.0);
  b.values = {1.0, 1.0};
  CHECK_THROWS_AS(paired_gap(a, b, 500, 1), DomainError);
}

TEST_CASE("theory targets per functional") {
  const CoefficientReport r = coefficient_report(kBinom, kStar, 0.5);
  CHECK(*theory_coefficient(r, Functional::type1, Method::ml) == r.ml_type1);
  CHECK(*theory_coefficient(r, Functional::type1, Method::bayes) == r.bayes_type1);
  CHECK(*theory_coefficient(r, Functional::type3, Method::ml) == r.ml_type1);
  CHECK_FALSE(theory_coefficient(r, Functional::type2, Method::bayes).has_value());
  CHECK(*theory_coefficient(r, Functional::type3p, Method::bayes) == r.bayes_type3p);
  CHECK(*theory_coefficient(r, Functional::generalization, Method::bayes) == 1.5);
  CHECK(*theory_coefficient(r, Functional::training_error, Method::ml) == -1.5);
}

TEST_CASE("level seeds differ across sample sizes") {
  CHECK(level_seed(1, 50) != level_seed(1, 100));
  CHECK(level_seed(1, 50) != level_seed(2, 50));
  CHECK(level_seed(1, 50) == level_seed(1, 50));
}

TEST_CASE("sampled and exact-enumeration Type I agree") {
  const StudyContext ctx = context(1, 32);
  const UnbiasednessCheck u = unbiasedness_check(ctx, 6, 40, 17);
  CHECK(u.sampled.replications == 40);
  CHECK(u.exact.mean > 0.0);
  CHECK(u.pass);
}

TEST_CASE("Gaussian mixture estimates run end to end") {
  const ModelSpec g = ModelSpec::gaussian_mixture_1d();
  const ParamVec w(g, {0.4, 1.5, -1.5});
  StudyContext ctx(g, w, Prior::aligned(g, w), 16);
  ctx.threads = 1;
  const ErrorEstimate ml = estimate_type1(ctx, Method::ml, 60, 10, 4);
  CHECK(std::isfinite(ml.mean));
  CHECK(ml.mean >= 0.0);
  const ErrorEstimate bayes = estimate_type3(ctx, Method::bayes, 30, 4, 4);
  CHECK(std::isfinite(bayes.mean));
}
