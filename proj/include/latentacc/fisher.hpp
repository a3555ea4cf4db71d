#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "latentacc/model.hpp"
#include "latentacc/numerics.hpp"
#include "latentacc/random.hpp"

namespace latentacc {

enum class FisherMethod { exact, quadrature, montecarlo };

std::string to_string(FisherMethod method);

/// Quadrature panels per component (width 0.25) for continuous-x expectations.
inline constexpr std::size_t kFisherPanels = 96;

/// The four information matrices at one parameter point.
struct FisherSet {
  SymMatrix i_xy;         // complete-data information
  SymMatrix i_x;          // marginal information
  Matrix j_xy;            // E[score_joint score_marginal^T]
  SymMatrix i_y_given_x;  // conditional information, direct path
  FisherMethod method = FisherMethod::exact;
  double tolerance = 0.0;
  /// Largest |change| of any entry when the panel count is doubled.
  double quadrature_tail = 0.0;
  std::vector<std::string> warnings;
};

SymMatrix fisher_joint(const ModelSpec& m, const ParamVec& w,
                       std::size_t panels = kFisherPanels);
SymMatrix fisher_marginal(const ModelSpec& m, const ParamVec& w,
                          std::size_t panels = kFisherPanels);
Matrix fisher_cross(const ModelSpec& m, const ParamVec& w,
                    std::size_t panels = kFisherPanels);

struct ConditionalFisher {
  SymMatrix direct;      // E[score_conditional score_conditional^T]
  SymMatrix difference;  // I_XY - I_X
};
ConditionalFisher fisher_conditional(const ModelSpec& m, const ParamVec& w,
                                     std::size_t panels = kFisherPanels);

/// Bundles the four matrices and checks J_XY = I_X, I_{Y|X} = I_XY - I_X
/// and I_XY - I_X >= 0 at the recorded tolerance (IdentityViolation).
FisherSet build_fisher_set(const ModelSpec& m, const ParamVec& w);

/// Plain Monte Carlo estimates with per-entry standard errors; validation only.
struct MonteCarloFisher {
  Matrix i_xy;
  Matrix i_x;
  Matrix i_xy_stderr;
  Matrix i_x_stderr;
  std::size_t draws = 0;
};
MonteCarloFisher fisher_montecarlo(const ModelSpec& m, const ParamVec& w, std::size_t draws,
                                   RandomStream& stream);

}  // namespace latentacc
