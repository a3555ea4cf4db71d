#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace latentacc {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
};

/// n-point Gauss-Legendre rule on [lo, hi].
QuadratureRule gauss_legendre(std::size_t n, double lo, double hi);

/// n-point Gauss-Jacobi rule on [lo, hi] for the weight
/// (hi - x)^alpha (x - lo)^beta; the weight is folded into the returned weights.
QuadratureRule gauss_jacobi(std::size_t n, double lo, double hi, double alpha, double beta);

inline constexpr std::size_t kPanelNodes = 8;

/// Composite Gauss-Legendre rule over mean +- half_width whose weights
/// include the N(mean, 1) density: sum_j w_j f(x_j) ~ E[f(X)].
QuadratureRule normal_panel_rule(double mean, std::size_t panels, double half_width = 12.0);

double log_sum_exp(std::span<const double> values);
double log_add_exp(double a, double b);

/// Adaptive Gauss-Kronrod integral of f over [lo, hi], split at the given
/// interior breakpoints.
double integrate_adaptive(const std::function<double(double)>& f, double lo, double hi,
                          std::span<const double> breakpoints = {});

}  // namespace latentacc
