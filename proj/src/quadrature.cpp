#include "latentacc/quadrature.hpp"

#include <gsl/gsl_integration.h>

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>

#include "latentacc/errors.hpp"

namespace latentacc {

namespace {

struct FixedWorkspaceDeleter {
  void operator()(gsl_integration_fixed_workspace* w) const { gsl_integration_fixed_free(w); }
};

QuadratureRule fixed_rule(const gsl_integration_fixed_type* type, std::size_t n, double a,
                          double b, double alpha = 0.0, double beta = 0.0) {
  if (n == 0) throw DomainError("quadrature rule needs at least one node");
  std::unique_ptr<gsl_integration_fixed_workspace, FixedWorkspaceDeleter> ws(
      gsl_integration_fixed_alloc(type, n, a, b, alpha, beta));
  if (!ws) throw DomainError("could not build quadrature rule");
  const double* x = gsl_integration_fixed_nodes(ws.get());
  const double* w = gsl_integration_fixed_weights(ws.get());
  QuadratureRule rule;
  rule.nodes.assign(x, x + n);
  rule.weights.assign(w, w + n);
  return rule;
}

}  // namespace

QuadratureRule gauss_legendre(std::size_t n, double lo, double hi) {
  if (!(hi > lo)) throw DomainError("gauss_legendre: empty interval");
  return fixed_rule(gsl_integration_fixed_legendre, n, lo, hi);
}

QuadratureRule gauss_jacobi(std::size_t n, double lo, double hi, double alpha, double beta) {
  if (!(hi > lo)) throw DomainError("gauss_jacobi: empty interval");
  if (!(alpha > -1.0 && beta > -1.0)) throw DomainError("gauss_jacobi: exponents must exceed -1");
  return fixed_rule(gsl_integration_fixed_jacobi, n, lo, hi, alpha, beta);
}

QuadratureRule normal_panel_rule(double mean, std::size_t panels, double half_width) {
  if (panels == 0) throw DomainError("normal_panel_rule needs at least one panel");
  const QuadratureRule unit = gauss_legendre(kPanelNodes, 0.0, 1.0);
  const double width = 2.0 * half_width / static_cast<double>(panels);
  const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  QuadratureRule rule;
  rule.nodes.reserve(panels * kPanelNodes);
  rule.weights.reserve(panels * kPanelNodes);
  for (std::size_t p = 0; p < panels; ++p) {
    const double start = mean - half_width + width * static_cast<double>(p);
    for (std::size_t j = 0; j < kPanelNodes; ++j) {
      const double x = start + width * unit.nodes[j];
      const double z = x - mean;
      rule.nodes.push_back(x);
      rule.weights.push_back(width * unit.weights[j] * norm * std::exp(-0.5 * z * z));
    }
  }
  return rule;
}

double log_sum_exp(std::span<const double> values) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : values) m = std::max(m, v);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double v : values) s += std::exp(v - m);
  return m + std::log(s);
}

double log_add_exp(double a, double b) {
  if (a < b) std::swap(a, b);
  if (a == -std::numeric_limits<double>::infinity()) return a;
  return a + std::log1p(std::exp(b - a));
}

double integrate_adaptive(const std::function<double(double)>& f, double lo, double hi,
                          std::span<const double> breakpoints) {
  std::vector<double> cuts{lo};
  for (double b : breakpoints)
    if (b > lo && b < hi) cuts.push_back(b);
  cuts.push_back(hi);
  std::sort(cuts.begin(), cuts.end());

  using Rule = boost::math::quadrature::gauss_kronrod<double, 61>;
  constexpr double kTolerance = 1e-13;
  // First pass: one Kronrod rule per segment gives each segment's share of
  // the total. Boost's tolerance is relative to the segment, so negligible
  // segments would otherwise refine rounding noise to full depth.
  std::vector<double> l1(cuts.size() - 1, 0.0);
  double l1_total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] <= cuts[i]) continue;
    Rule::integrate(f, cuts[i], cuts[i + 1], 0, kTolerance, nullptr, &l1[i]);
    l1_total += l1[i];
  }
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] <= cuts[i] || l1[i] == 0.0) continue;
    const double tol = kTolerance * std::max(1.0, l1_total / l1[i]);
    total += Rule::integrate(f, cuts[i], cuts[i + 1], 15, tol);
  }
  return total;
}

}  // namespace latentacc
