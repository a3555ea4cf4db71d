#pragma once

// Two-component hierarchical models p(x, y | w) = p(y | w) p(x | y, w).
//
// Parameters are w = (a, theta_1, theta_2) with a = p(y = 1). For the
// binomial mixture theta_k is the success probability of component k
// (x in {0..N_t}); for the 1-D Gaussian mixture theta_k is the mean of a
// unit-variance normal component.

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "latentacc/random.hpp"

namespace latentacc {

enum class Family { binomial_mixture, gaussian_mixture_1d };

enum class CoordDomain { unit_interval, real_line };

std::string to_string(Family family);
Family family_from_string(const std::string& name);

class ModelSpec {
 public:
  static ModelSpec binomial_mixture(int trial_count = 3);
  static ModelSpec gaussian_mixture_1d();

  Family family() const { return family_; }
  int components() const { return 2; }
  std::size_t dim() const { return 3; }
  int trial_count() const { return trial_count_; }
  CoordDomain domain(std::size_t i) const;

  bool finite_support() const { return family_ == Family::binomial_mixture; }
  /// Support points of x; empty for continuous families.
  std::vector<double> support() const;
  /// Index of x within support(); only valid for finite support.
  std::size_t support_index(double x) const { return static_cast<std::size_t>(x); }

  /// ln p(x | y = k, theta) without validation; hot-path kernel.
  double component_log_density(double theta, double x) const {
    if (family_ == Family::binomial_mixture) {
      const auto xi = static_cast<std::size_t>(x);
      return log_binom_[xi] + x * std::log(theta) + (trial_count_ - x) * std::log1p(-theta);
    }
    const double z = x - theta;
    return -0.5 * z * z - kHalfLog2Pi;
  }

  /// d/dtheta ln p(x | y = k, theta).
  double component_score(double theta, double x) const {
    if (family_ == Family::binomial_mixture) {
      return x / theta - (trial_count_ - x) / (1.0 - theta);
    }
    return x - theta;
  }

  /// Throws DomainError unless x lies in the support.
  void check_observation(double x) const;

  std::string name() const;

 private:
  static constexpr double kHalfLog2Pi = 0.91893853320467274178;

  ModelSpec(Family family, int trial_count);

  Family family_;
  int trial_count_;
  std::vector<double> log_binom_;
};

/// A point in the open parameter domain of a ModelSpec.
class ParamVec {
 public:
  /// Throws DomainError if the length is wrong or a coordinate lies outside
  /// its open domain.
  ParamVec(const ModelSpec& model, std::vector<double> values);

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const { return values_; }

  double weight() const { return values_[0]; }
  /// Component parameter for label k in {1, 2}.
  double theta(int k) const { return values_[static_cast<std::size_t>(k)]; }

 private:
  std::vector<double> values_;
};

struct Dataset {
  std::vector<double> xs;
  std::optional<std::vector<int>> ys;  // labels in {1..K}

  std::size_t size() const { return xs.size(); }
  bool has_labels() const { return ys.has_value(); }
};

struct IdentifiabilityReport {
  double min_mixing = 0.0;
  double component_distance = 0.0;  // total-variation distance
  double min_eig_ix = 0.0;
  bool ok = false;
};

double joint_log_density(const ModelSpec& m, const ParamVec& w, double x, int y);
double marginal_log_density(const ModelSpec& m, const ParamVec& w, double x);

/// p(y = k | x, w) for k = 1..K (index k - 1).
std::vector<double> latent_conditional(const ModelSpec& m, const ParamVec& w, double x);
/// ln p(y = k | x, w), computed without leaving log space.
std::vector<double> latent_log_conditional(const ModelSpec& m, const ParamVec& w, double x);

std::vector<double> score_joint(const ModelSpec& m, const ParamVec& w, double x, int y);
std::vector<double> score_marginal(const ModelSpec& m, const ParamVec& w, double x);
/// Score of ln p(y | x, w): score_joint - score_marginal.
std::vector<double> score_conditional(const ModelSpec& m, const ParamVec& w, double x, int y);

/// n i.i.d. labelled pairs. Each pair consumes the label draw first.
Dataset sample_joint(const ModelSpec& m, const ParamVec& w, std::size_t n, RandomStream& stream);

IdentifiabilityReport validate_identifiability(const ModelSpec& m, const ParamVec& w);

/// Component-swapped parameter (1 - a, theta_2, theta_1).
ParamVec swap_labels(const ModelSpec& m, const ParamVec& w);

}  // namespace latentacc
