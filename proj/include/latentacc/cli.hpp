#pragma once

// Batch front-end: experiment configs, CSV tables and subcommand dispatch.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "latentacc/montecarlo.hpp"

namespace latentacc {

struct ExperimentConfig {
  // model
  std::string family = "binomial";
  int trial_count = 3;
  std::vector<double> true_param{0.5, 0.8, 0.25};
  double box_lo = -6.0;  // Gaussian mean box
  double box_hi = 6.0;
  // prior
  double eta = 1.0;
  bool aligned_order = true;
  // study
  Functional functional = Functional::type1;
  Method method = Method::ml;
  std::vector<std::size_t> n_grid{50, 100, 200, 400, 800};
  std::size_t replications = 200;
  double alpha = 1.0;
  std::uint64_t seed = 1;
  std::size_t bootstrap = 2000;
  bool rao_blackwell = true;
  // quadrature
  std::size_t nodes_per_axis = kDefaultNodesPerAxis;
  // output
  std::filesystem::path directory = "out";
  std::vector<std::string> formats{"csv"};

  ModelSpec model() const;
  ParamVec w_star() const;
  Prior prior() const;
  /// Range and consistency checks that need no model evaluation.
  void check() const;
};

/// Parses a JSON config. Errors are ConfigError naming the key and line.
ExperimentConfig parse_config(const std::string& text, const std::string& source = "config");
ExperimentConfig load_config(const std::filesystem::path& path);

/// Shortest round-tripping form with 17 significant digits, locale-free.
std::string format_double(double v);
double parse_double(const std::string& field);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;
};

void write_csv(const std::filesystem::path& path, const CsvTable& table);
std::string to_csv(const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path);
CsvTable parse_csv(const std::string& text);

/// Exit codes of run().
inline constexpr int kExitPass = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitStudyFail = 2;

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace latentacc
