#include "latentacc/fisher.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "latentacc/errors.hpp"
#include "latentacc/quadrature.hpp"

namespace latentacc {

namespace {

constexpr double kExactTolerance = 1e-12;
constexpr double kQuadratureTolerance = 1e-6;
constexpr double kTailWarning = 1e-8;

// Calls visit(x, y, mass) over a rule for the joint law of (x, y) under w:
// exact enumeration of the support, or composite panels per component.
void for_each_joint_node(const ModelSpec& m, const ParamVec& w, std::size_t panels,
                         const std::function<void(double, int, double)>& visit) {
  for (int y = 1; y <= m.components(); ++y) {
    const double py = y == 1 ? w.weight() : 1.0 - w.weight();
    if (m.finite_support()) {
      for (double x : m.support()) {
        visit(x, y, py * std::exp(m.component_log_density(w.theta(y), x)));
      }
    } else {
      const QuadratureRule rule = normal_panel_rule(w.theta(y), panels);
      for (std::size_t j = 0; j < rule.size(); ++j) visit(rule.nodes[j], y, py * rule.weights[j]);
    }
  }
}

void add_outer(Matrix& acc, double mass, const std::vector<double>& u,
               const std::vector<double>& v) {
  for (std::size_t i = 0; i < u.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) acc(i, j) += mass * u[i] * v[j];
}

struct RawFisher {
  Matrix i_xy;
  Matrix i_x;
  Matrix j_xy;
  Matrix i_cond;
};

RawFisher accumulate(const ModelSpec& m, const ParamVec& w, std::size_t panels) {
  const std::size_t d = m.dim();
  RawFisher f{Matrix(d, d), Matrix(d, d), Matrix(d, d), Matrix(d, d)};
  for_each_joint_node(m, w, panels, [&](double x, int y, double mass) {
    const auto sj = score_joint(m, w, x, y);
    const auto sm = score_marginal(m, w, x);
    std::vector<double> sc(d);
    for (std::size_t i = 0; i < d; ++i) sc[i] = sj[i] - sm[i];
    add_outer(f.i_xy, mass, sj, sj);
    add_outer(f.i_x, mass, sm, sm);
    add_outer(f.j_xy, mass, sj, sm);
    add_outer(f.i_cond, mass, sc, sc);
  });
  return f;
}

}  // namespace

std::string to_string(FisherMethod method) {
  switch (method) {
    case FisherMethod::exact:
      return "exact";
    case FisherMethod::quadrature:
      return "quadrature";
    case FisherMethod::montecarlo:
      return "montecarlo";
  }
  return "unknown";
}

SymMatrix fisher_joint(const ModelSpec& m, const ParamVec& w, std::size_t panels) {
  return SymMatrix(accumulate(m, w, panels).i_xy);
}

SymMatrix fisher_marginal(const ModelSpec& m, const ParamVec& w, std::size_t panels) {
  return SymMatrix(accumulate(m, w, panels).i_x);
}

Matrix fisher_cross(const ModelSpec& m, const ParamVec& w, std::size_t panels) {
  return accumulate(m, w, panels).j_xy;
}

ConditionalFisher fisher_conditional(const ModelSpec& m, const ParamVec& w,
                                     std::size_t panels) {
  const RawFisher f = accumulate(m, w, panels);
  return {SymMatrix(f.i_cond), SymMatrix(f.i_xy - f.i_x)};
}

FisherSet build_fisher_set(const ModelSpec& m, const ParamVec& w) {
  const RawFisher f = accumulate(m, w, kFisherPanels);
  FisherSet set;
  set.i_xy = SymMatrix(f.i_xy);
  set.i_x = SymMatrix(f.i_x);
  set.j_xy = f.j_xy;
  set.i_y_given_x = SymMatrix(f.i_cond);

  if (m.finite_support()) {
    set.method = FisherMethod::exact;
    set.tolerance = kExactTolerance;
  } else {
    set.method = FisherMethod::quadrature;
    set.tolerance = kQuadratureTolerance;
    const RawFisher doubled = accumulate(m, w, 2 * kFisherPanels);
    set.quadrature_tail = std::max({max_abs(doubled.i_xy - f.i_xy), max_abs(doubled.i_x - f.i_x),
                                    max_abs(doubled.j_xy - f.j_xy),
                                    max_abs(doubled.i_cond - f.i_cond)});
    if (set.quadrature_tail > kTailWarning) {
      set.warnings.push_back("QuadratureWarning: panel-refinement tail estimate " +
                             std::to_string(set.quadrature_tail) + " exceeds 1e-8");
    }
  }

  // Entries grow like 1/a(1-a) near the boundary, so tolerances scale with
  // the largest entry once it exceeds one.
  const double scale = std::max(1.0, max_abs(set.i_xy.matrix()));
  const double tol = set.tolerance * scale;
  const double cross_gap = max_abs(set.j_xy - set.i_x.matrix());
  if (cross_gap > tol) {
    throw IdentityViolation("J_XY differs from I_X by " + std::to_string(cross_gap));
  }
  const SymMatrix difference = set.i_xy - set.i_x;
  const double cond_gap = max_abs(set.i_y_given_x.matrix() - difference.matrix());
  if (cond_gap > tol) {
    throw IdentityViolation("I_{Y|X} differs from I_XY - I_X by " + std::to_string(cond_gap));
  }
  const double min_eig = sym_eigenvalues(difference).smallest();
  if (min_eig < -tol) {
    throw IdentityViolation("I_XY - I_X has negative eigenvalue " + std::to_string(min_eig));
  }
  return set;
}

MonteCarloFisher fisher_montecarlo(const ModelSpec& m, const ParamVec& w, std::size_t draws,
                                   RandomStream& stream) {
  if (draws < 2) throw DomainError("fisher_montecarlo needs at least two draws");
  const std::size_t d = m.dim();
  Matrix sum_xy(d, d), sum_x(d, d), sq_xy(d, d), sq_x(d, d);
  const Dataset data = sample_joint(m, w, draws, stream);
  for (std::size_t r = 0; r < draws; ++r) {
    const auto sj = score_joint(m, w, data.xs[r], (*data.ys)[r]);
    const auto sm = score_marginal(m, w, data.xs[r]);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) {
        const double a = sj[i] * sj[j];
        const double b = sm[i] * sm[j];
        sum_xy(i, j) += a;
        sq_xy(i, j) += a * a;
        sum_x(i, j) += b;
        sq_x(i, j) += b * b;
      }
  }
  MonteCarloFisher out{Matrix(d, d), Matrix(d, d), Matrix(d, d), Matrix(d, d), draws};
  const double nd = static_cast<double>(draws);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      const double mxy = sum_xy(i, j) / nd;
      const double mx = sum_x(i, j) / nd;
      out.i_xy(i, j) = mxy;
      out.i_x(i, j) = mx;
      out.i_xy_stderr(i, j) = std::sqrt(std::max(0.0, sq_xy(i, j) / nd - mxy * mxy) / (nd - 1.0));
      out.i_x_stderr(i, j) = std::sqrt(std::max(0.0, sq_x(i, j) / nd - mx * mx) / (nd - 1.0));
    }
  return out;
}

}  // namespace latentacc
