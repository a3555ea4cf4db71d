#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "latentacc/cli.hpp"
#include "latentacc/errors.hpp"
#include "latentacc/fisher.hpp"

namespace latentacc {

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::size_t threads = 0;
  std::string out;
  std::string functional;
  std::string method;
  std::optional<double> alpha;
  std::optional<std::size_t> replications;
  std::optional<std::size_t> n;
};

void add_common(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config, "experiment config (JSON)")->check(CLI::ExistingFile);
  app->add_option("--out", f.out, "output directory (overrides output.directory)");
}

void add_run(CLI::App* app, Flags& f) {
  app->add_option("--seed", f.seed, "master seed (overrides study.seed)");
  app->add_option("--threads", f.threads, "worker threads, 0 = one per hardware thread")->capture_default_str();
  app->add_option("--functional", f.functional,
                  "type1 | type2 | type3 | type2p | type3p | generalization | training_error");
  app->add_option("--method", f.method, "ml | bayes");
  app->add_option("--alpha", f.alpha, "fraction of target sites for type2p / type3p");
  app->add_option("--replications", f.replications, "replications per sample size");
}

ExperimentConfig resolve(const Flags& f) {
  ExperimentConfig c = f.config.empty() ? ExperimentConfig{} : load_config(f.config);
  if (f.seed) c.seed = *f.seed;
  if (!f.out.empty()) c.directory = f.out;
  try {
    if (!f.functional.empty()) c.functional = functional_from_string(f.functional);
    if (!f.method.empty()) c.method = method_from_string(f.method);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  if (f.alpha) c.alpha = *f.alpha;
  if (f.replications) c.replications = *f.replications;
  if (f.n) c.n_grid = {*f.n};
  c.check();
  return c;
}

void require_identifiable(const ExperimentConfig& c) {
  const IdentifiabilityReport r = validate_identifiability(c.model(), c.w_star());
  if (!r.ok) {
    throw ConfigError("key 'model.true_param': not identifiable (component distance " +
                      format_double(r.component_distance) + ", smallest I_X eigenvalue " +
                      format_double(r.min_eig_ix) + ")");
  }
}

StudyContext make_context(const ExperimentConfig& c, std::size_t threads) {
  require_identifiable(c);
  StudyContext ctx(c.model(), c.w_star(), c.prior(), c.nodes_per_axis);
  ctx.threads = threads;
  ctx.rao_blackwell = c.rao_blackwell;
  return ctx;
}

std::string u64(std::uint64_t v) { return std::to_string(v); }

const std::vector<std::string> kSummaryHeader{"series",      "functional",       "method",   "n",
                                              "alpha",       "mean",             "std_error", "scaled_mean",
                                              "scaled_std_error", "replications", "aborted",  "boundary_hits",
                                              "seed"};

void add_summary(CsvTable& t, const std::string& series, const ErrorEstimate& e) {
  t.rows.push_back({series, to_string(e.functional), to_string(e.method), u64(e.n), format_double(e.alpha),
                    format_double(e.mean), format_double(e.std_error), format_double(e.scaled_mean()),
                    format_double(e.scaled_std_error()), u64(e.replications), u64(e.aborted),
                    u64(e.boundary_hits), u64(e.seed)});
}

void add_replications(CsvTable& t, const std::string& series, const ErrorEstimate& e) {
  for (std::size_t r = 0; r < e.values.size(); ++r) {
    t.rows.push_back({series, to_string(e.functional), to_string(e.method), u64(e.n), format_double(e.alpha),
                      u64(r), format_double(e.values[r])});
  }
}

CsvTable replications_table() { return {{"series", "functional", "method", "n", "alpha", "replication", "value"}, {}}; }

CsvTable series_table() {
  return {{"series", "functional", "method", "alpha", "theory", "extrapolated", "stderr", "slope", "chi2", "verdict",
           "insufficient_precision", "grid_refinement_delta", "warnings"},
          {}};
}

std::string join_warnings(const std::vector<std::string>& ws) {
  std::string out;
  for (const std::string& w : ws) {
    std::string clean = w;
    for (char& ch : clean) {
      if (ch == ',' || ch == '\n' || ch == '"') ch = ';';
    }
    if (!out.empty()) out += " | ";
    out += clean;
  }
  return out;
}

void add_series(CsvTable& t, const std::string& name, const ConvergenceSeries& s) {
  t.rows.push_back({name, to_string(s.functional), to_string(s.method), format_double(s.alpha),
                    s.theory_coefficient ? format_double(*s.theory_coefficient) : "",
                    format_double(s.extrapolated_coefficient), format_double(s.extrapolation_stderr),
                    format_double(s.slope), format_double(s.fit_chi2), to_string(s.verdict),
                    s.insufficient_precision ? "1" : "0", format_double(s.grid_refinement_delta),
                    join_warnings(s.warnings)});
}

// n, n D(n) with a 95% band, plus one reference record for the theory value.
void add_plot(CsvTable& t, const std::string& name, const ConvergenceSeries& s) {
  for (const ErrorEstimate& e : s.estimates) {
    const double half = 1.96 * e.scaled_std_error();
    t.rows.push_back({name, "estimate", u64(e.n), format_double(e.scaled_mean()),
                      format_double(e.scaled_mean() - half), format_double(e.scaled_mean() + half)});
  }
  if (s.theory_coefficient) {
    const std::string v = format_double(*s.theory_coefficient);
    t.rows.push_back({name, "theory", "", v, v, v});
  }
}

CsvTable plot_table() { return {{"series", "kind", "n", "scaled_value", "ci_lo", "ci_hi"}, {}}; }

void emit(const std::filesystem::path& dir, const std::string& file, const CsvTable& t) { write_csv(dir / file, t); }

void report_series(std::ostream& out, const std::string& name, const ConvergenceSeries& s) {
  out << name << ": " << to_string(s.functional) << "/" << to_string(s.method) << " c = "
      << format_double(s.extrapolated_coefficient) << " +- " << format_double(s.extrapolation_stderr);
  if (s.theory_coefficient) out << " theory = " << format_double(*s.theory_coefficient);
  out << " verdict = " << to_string(s.verdict) << "\n";
  for (const std::string& w : s.warnings) out << "  " << w << "\n";
}

int cmd_validate(const ExperimentConfig& c, std::ostream& out) {
  const IdentifiabilityReport r = validate_identifiability(c.model(), c.w_star());
  CsvTable t{{"min_mixing", "component_distance", "min_eig_ix", "identifiable"},
             {{format_double(r.min_mixing), format_double(r.component_distance), format_double(r.min_eig_ix),
               r.ok ? "1" : "0"}}};
  out << to_csv(t);
  return r.ok ? kExitPass : kExitUsage;
}

int cmd_fisher(const ExperimentConfig& c, std::ostream& out, std::ostream& err) {
  require_identifiable(c);
  const FisherSet f = build_fisher_set(c.model(), c.w_star());
  CsvTable t{{"matrix", "row", "col", "value"}, {}};
  const std::size_t d = f.i_xy.dim();
  auto add = [&](const std::string& name, auto const& m) {
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) t.rows.push_back({name, u64(i), u64(j), format_double(m(i, j))});
    }
  };
  add("i_xy", f.i_xy);
  add("i_x", f.i_x);
  add("j_xy", f.j_xy);
  add("i_y_given_x", f.i_y_given_x);
  emit(c.directory, "fisher.csv", t);
  out << to_csv(t);
  for (const std::string& w : f.warnings) err << w << "\n";
  return kExitPass;
}

int cmd_coeffs(const ExperimentConfig& c, std::ostream& out) {
  require_identifiable(c);
  const CoefficientReport r = coefficient_report(c.model(), c.w_star(), c.alpha);
  CsvTable t{{"ml_type1", "ml_type2", "ml_type3", "bayes_type1", "bayes_type2p", "bayes_type3p", "prediction",
              "gap_ml_bayes", "gap_ml_bayes_alpha", "supplementary_gain", "alpha"},
             {}};
  std::vector<std::string> row{format_double(r.ml_type1),     format_double(r.ml_type2),
                               format_double(r.ml_type3),     format_double(r.bayes_type1),
                               format_double(r.bayes_type2p), format_double(r.bayes_type3p),
                               format_double(r.prediction),   format_double(r.gap_ml_bayes),
                               format_double(r.gap_ml_bayes_alpha), format_double(r.supplementary_gain),
                               format_double(r.alpha)};
  for (std::size_t i = 0; i < r.eigenvalues.size(); ++i) {
    t.header.push_back("eigenvalue_" + u64(i + 1));
    row.push_back(format_double(r.eigenvalues[i]));
  }
  t.rows.push_back(row);
  emit(c.directory, "coeffs.csv", t);
  out << to_csv(t);
  return kExitPass;
}

int cmd_simulate(const ExperimentConfig& c, std::size_t threads, std::ostream& out) {
  const StudyContext ctx = make_context(c, threads);
  const ErrorEstimate e = estimate(ctx, c.functional, c.method, c.n_grid.front(), c.replications, c.seed, c.alpha);
  CsvTable summary{kSummaryHeader, {}};
  add_summary(summary, "estimate", e);
  CsvTable reps = replications_table();
  add_replications(reps, "estimate", e);
  emit(c.directory, "summary.csv", summary);
  emit(c.directory, "replications.csv", reps);
  out << to_csv(summary);
  return kExitPass;
}

int cmd_study(const ExperimentConfig& c, std::size_t threads, std::ostream& out) {
  const StudyContext ctx = make_context(c, threads);
  const ConvergenceSeries s = convergence_study(ctx, c.functional, c.method, c.n_grid, c.replications, c.seed, c.alpha);
  CsvTable summary{kSummaryHeader, {}};
  CsvTable reps = replications_table();
  for (const ErrorEstimate& e : s.estimates) {
    add_summary(summary, "study", e);
    add_replications(reps, "study", e);
  }
  CsvTable series = series_table();
  add_series(series, "study", s);
  CsvTable plot = plot_table();
  add_plot(plot, "study", s);
  emit(c.directory, "summary.csv", summary);
  emit(c.directory, "replications.csv", reps);
  emit(c.directory, "series.csv", series);
  emit(c.directory, "plot.csv", plot);
  report_series(out, "study", s);
  return s.verdict == Verdict::fail ? kExitStudyFail : kExitPass;
}

int cmd_compare(const ExperimentConfig& c, std::size_t threads, std::ostream& out) {
  const StudyContext ctx = make_context(c, threads);
  const MethodComparison cmp =
      compare_methods(ctx, c.functional, c.n_grid, c.replications, c.seed, c.alpha, c.bootstrap);
  CsvTable summary{kSummaryHeader, {}};
  CsvTable reps = replications_table();
  CsvTable series = series_table();
  CsvTable plot = plot_table();
  CsvTable gaps{{"series", "n", "mean", "std_error", "scaled_mean", "confidence"}, {}};
  std::vector<const ConvergenceSeries*> all;

  auto add_study = [&](const std::string& name, const ConvergenceSeries& s) {
    for (const ErrorEstimate& e : s.estimates) {
      add_summary(summary, name, e);
      add_replications(reps, name, e);
    }
    add_series(series, name, s);
    add_plot(plot, name, s);
    report_series(out, name, s);
    all.push_back(&s);
  };
  auto add_gaps = [&](const std::string& name, const std::vector<PairedGap>& gs) {
    for (const PairedGap& g : gs) {
      gaps.rows.push_back({name, u64(g.n), format_double(g.mean), format_double(g.std_error),
                           format_double(static_cast<double>(g.n) * g.mean), format_double(g.confidence)});
    }
  };
  add_study("ml", cmp.ml);
  add_study("bayes", cmp.bayes);
  add_study("gap", cmp.gap_series);
  add_gaps("ml_minus_bayes", cmp.gaps);

  std::optional<SupplementaryStudy> supp;
  if (c.functional == Functional::type2p && c.alpha < 1.0) {
    supp = supplementary_study(ctx, c.alpha, c.n_grid, c.replications, c.seed, c.bootstrap);
    for (const ErrorEstimate& e : supp->reduced) {
      add_summary(summary, "reduced", e);
      add_replications(reps, "reduced", e);
    }
    add_study("supplementary_gap", supp->gap_series);
    add_gaps("reduced_minus_partial", supp->gaps);
  }

  emit(c.directory, "summary.csv", summary);
  emit(c.directory, "replications.csv", reps);
  emit(c.directory, "series.csv", series);
  emit(c.directory, "plot.csv", plot);
  emit(c.directory, "gaps.csv", gaps);
  for (const ConvergenceSeries* s : all) {
    if (s->verdict == Verdict::fail) return kExitStudyFail;
  }
  return kExitPass;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Latent-variable estimation accuracy: Fisher matrices, theoretical coefficients and Monte Carlo studies"};
  app.require_subcommand(1);
  app.footer(
      "Flags (per subcommand, see SUBCOMMAND --help):\n"
      "  --config PATH        experiment config (JSON); built-in defaults otherwise\n"
      "  --out DIR            output directory\n"
      "  --seed U64           master seed                      (simulate, study, compare)\n"
      "  --threads N          worker threads, 0 = auto         (simulate, study, compare)\n"
      "  --functional NAME    error functional                 (simulate, study, compare)\n"
      "  --method ml|bayes    estimation method                (simulate, study)\n"
      "  --alpha A            target fraction for primed types (coeffs, simulate, study, compare)\n"
      "  --replications R     replications per sample size     (simulate, study, compare)\n"
      "  --n N                sample size                      (simulate)\n"
      "Exit codes: 0 pass, 2 study fail, 1 usage or config error.");
  Flags flags;

  CLI::App* validate = app.add_subcommand("validate", "identifiability report for the configured true parameter");
  add_common(validate, flags);
  CLI::App* fisher = app.add_subcommand("fisher", "Fisher matrices at the true parameter (CSV)");
  add_common(fisher, flags);
  CLI::App* coeffs = app.add_subcommand("coeffs", "theoretical coefficients (CSV)");
  add_common(coeffs, flags);
  coeffs->add_option("--alpha", flags.alpha, "fraction of target sites for the primed types");
  CLI::App* simulate = app.add_subcommand("simulate", "one error estimate at a single sample size");
  add_common(simulate, flags);
  add_run(simulate, flags);
  simulate->add_option("--n", flags.n, "sample size (default: first entry of study.n_grid)");
  CLI::App* study = app.add_subcommand("study", "convergence study of n D(n) against theory");
  add_common(study, flags);
  add_run(study, flags);
  CLI::App* compare = app.add_subcommand("compare", "ML and Bayes side by side with the gap series");
  add_common(compare, flags);
  add_run(compare, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitPass : kExitUsage;
  }

  try {
    const ExperimentConfig c = resolve(flags);
    if (*validate) return cmd_validate(c, out);
    if (*fisher) return cmd_fisher(c, out, err);
    if (*coeffs) return cmd_coeffs(c, out);
    if (*simulate) return cmd_simulate(c, flags.threads, out);
    if (*study) return cmd_study(c, flags.threads, out);
    if (*compare) return cmd_compare(c, flags.threads, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const RunFailed& e) {
    err << "run failed: " << e.what() << "\n";
    return kExitStudyFail;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace latentacc
