#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "latentacc/errors.hpp"
#include "latentacc/numerics.hpp"
#include "latentacc/quadrature.hpp"
#include "latentacc/random.hpp"

using namespace latentacc;

namespace {

SymMatrix random_spd(RandomStream& rng, std::size_t d) {
  Matrix g(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) g(i, j) = rng.normal(0.0, 1.0);
  Matrix a = g * transpose(g);
  for (std::size_t i = 0; i < d; ++i) a(i, i) += 0.1;
  return SymMatrix(a);
}

Eigen::MatrixXd to_eigen(const SymMatrix& a) {
  Eigen::MatrixXd out(a.dim(), a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i)
    for (std::size_t j = 0; j < a.dim(); ++j) out(i, j) = a(i, j);
  return out;
}

}  // namespace

TEST_CASE("cholesky reconstructs the input") {
  const SymMatrix a = SymMatrix::from_rows({{4, 2, 0}, {2, 5, 1}, {0, 1, 3}});
  const Matrix l = cholesky(a);
  CHECK(max_abs(l * transpose(l) - a.matrix()) < 1e-14);
  CHECK(l(0, 1) == 0.0);
}

TEST_CASE("cholesky rejects an indefinite matrix") {
  const SymMatrix a = SymMatrix::from_rows({{1, 2}, {2, 1}});
  CHECK_THROWS_AS(cholesky(a), NotPositiveDefinite);
  try {
    cholesky(a);
  } catch (const NotPositiveDefinite& e) {
    CHECK(e.pivot() == 1);
  }
}

TEST_CASE("symmetric eigenvalues agree with a reference eigensolver") {
  RandomStream rng(7);
  for (std::size_t d : {1u, 2u, 3u, 5u, 8u}) {
    for (int rep = 0; rep < 10; ++rep) {
      const SymMatrix a = random_spd(rng, d);
      const EigenList ours = sym_eigenvalues(a);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(to_eigen(a));
      std::vector<double> theirs(ref.eigenvalues().data(), ref.eigenvalues().data() + d);
      std::sort(theirs.rbegin(), theirs.rend());
      for (std::size_t i = 0; i < d; ++i) CHECK(ours[i] == doctest::Approx(theirs[i]).epsilon(1e-11));
    }
  }
}

TEST_CASE("log determinant and solve") {
  RandomStream rng(11);
  const SymMatrix a = random_spd(rng, 4);
  const Eigen::MatrixXd e = to_eigen(a);
  CHECK(log_det_spd(a) == doctest::Approx(std::log(e.determinant())).epsilon(1e-12));
  const Matrix x = solve_spd(a, Matrix::identity(4));
  CHECK(max_abs(a.matrix() * x - Matrix::identity(4)) < 1e-12);
}

TEST_CASE("generalized eigenvalues of (A, I) are the eigenvalues of A") {
  const SymMatrix a = SymMatrix::from_rows({{2, 1}, {1, 2}});
  const EigenList g = generalized_eigenvalues(a, SymMatrix::identity(2));
  CHECK(g[0] == doctest::Approx(3.0));
  CHECK(g[1] == doctest::Approx(1.0));
}

TEST_CASE("generalized eigenvalues match the dense non-symmetric product") {
  RandomStream rng(5);
  const SymMatrix a = random_spd(rng, 3);
  const SymMatrix b = random_spd(rng, 3);
  const Eigen::MatrixXd prod = to_eigen(a) * to_eigen(b).inverse();
  Eigen::EigenSolver<Eigen::MatrixXd> ref(prod);
  std::vector<double> theirs;
  for (int i = 0; i < 3; ++i) theirs.push_back(ref.eigenvalues()[i].real());
  std::sort(theirs.rbegin(), theirs.rend());
  const EigenList ours = generalized_eigenvalues(a, b);
  for (std::size_t i = 0; i < 3; ++i) CHECK(ours[i] == doctest::Approx(theirs[i]).epsilon(1e-10));
}

TEST_CASE("symmetric matrix averages its transpose") {
  Matrix m(2, 2);
  m(0, 1) = 1.0;
  m(1, 0) = 3.0;
  const SymMatrix s(m);
  CHECK(s(0, 1) == 2.0);
  CHECK(s(1, 0) == 2.0);
}

TEST_CASE("Gauss-Legendre integrates polynomials exactly") {
  const QuadratureRule r = gauss_legendre(5, -1.0, 2.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) sum += r.weights[i] * std::pow(r.nodes[i], 9);
  CHECK(sum == doctest::Approx((std::pow(2.0, 10) - 1.0) / 10.0).epsilon(1e-13));
}

TEST_CASE("normal panel rule integrates against a unit normal") {
  const QuadratureRule r = normal_panel_rule(1.5, 96);
  double m0 = 0.0, m1 = 0.0, m2 = 0.0, logistic = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    m0 += r.weights[i];
    m1 += r.weights[i] * r.nodes[i];
    m2 += r.weights[i] * r.nodes[i] * r.nodes[i];
    logistic += r.weights[i] / (1.0 + std::exp(-3.0 * (r.nodes[i] - 1.5)));
  }
  CHECK(m0 == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(m1 == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(m2 == doctest::Approx(1.0 + 2.25).epsilon(1e-14));
  CHECK(logistic == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("Gauss-Jacobi absorbs endpoint powers") {
  // int_0^1 x^0.5 (1 - x)^-0.3 x^2 dx = B(3.5, 0.7)
  const QuadratureRule r = gauss_jacobi(12, 0.0, 1.0, -0.3, 0.5);
  double sum = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) sum += r.weights[i] * r.nodes[i] * r.nodes[i];
  const double expect = std::exp(std::lgamma(3.5) + std::lgamma(0.7) - std::lgamma(4.2));
  CHECK(sum == doctest::Approx(expect).epsilon(1e-13));
}

TEST_CASE("log-sum-exp is stable") {
  const std::vector<double> v{-1000.0, -1000.0};
  CHECK(log_sum_exp(v) == doctest::Approx(-1000.0 + std::log(2.0)));
  CHECK(log_add_exp(0.0, -INFINITY) == 0.0);
}

TEST_CASE("adaptive integration") {
  const double v = integrate_adaptive([](double x) { return std::exp(-x * x); }, -10.0, 10.0);
  CHECK(v == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-13));
}

TEST_CASE("derived streams are reproducible and distinct") {
  RandomStream a = RandomStream::derive(42, 3);
  RandomStream b = RandomStream::derive(42, 3);
  RandomStream c = RandomStream::derive(42, 4);
  const auto va = a.next_u64();
  CHECK(va == b.next_u64());
  CHECK(va != c.next_u64());
  for (int i = 0; i < 1000; ++i) {
    const double u = a.uniform();
    CHECK((u >= 0.0 && u < 1.0));
  }
}
