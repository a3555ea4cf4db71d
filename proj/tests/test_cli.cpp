#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "latentacc/cli.hpp"
#include "latentacc/errors.hpp"

using namespace latentacc;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("latentacc_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_file(const fs::path& dir, const std::string& name, const std::string& text) {
  const fs::path p = dir / name;
  std::ofstream(p) << text;
  return p;
}

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "latentacc");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string config_error(const std::string& text) {
  try {
    parse_config(text, "cfg.json");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("numbers survive the CSV text form bit for bit") {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (int i = 0; i < 2000; ++i) {
    const double v = std::ldexp(u(gen), static_cast<int>(gen() % 200) - 100);
    const double back = parse_double(format_double(v));
    CHECK(std::memcmp(&v, &back, sizeof v) == 0);
  }
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(1.5) == "1.5");
  CHECK(std::isnan(parse_double(format_double(std::nan("")))));
  CHECK_THROWS_AS(parse_double("1.5x"), DomainError);
}

TEST_CASE("CSV tables round-trip") {
  const CsvTable t{{"a", "b"}, {{"1", "x"}, {"2.5", ""}}};
  const CsvTable back = parse_csv(to_csv(t));
  CHECK(back.header == t.header);
  CHECK(back.rows == t.rows);
  CHECK(back.column("b") == 1);
  CHECK_THROWS_AS(to_csv(CsvTable{{"a"}, {{"1,2"}}}), DomainError);
  CHECK_THROWS_AS(parse_csv("a,b\n1\n"), DomainError);
}

TEST_CASE("config defaults and overrides") {
  const ExperimentConfig c = parse_config(R"({
    "model": {"family": "binomial", "trial_count": 3, "true_param": [0.5, 0.8, 0.25]},
    "prior": {"eta": 1.0, "order": "aligned"},
    "study": {"functional": "type2p", "method": "bayes", "n_grid": [50, 100, 200, 400],
              "replications": 300, "alpha": 0.5, "seed": 18446744073709551615},
    "quadrature": {"nodes_per_axis": 32},
    "output": {"directory": "runs/a", "formats": ["csv"]}
  })");
  CHECK(c.functional == Functional::type2p);
  CHECK(c.method == Method::bayes);
  CHECK(c.n_grid.size() == 4);
  CHECK(c.seed == 18446744073709551615ULL);
  CHECK(c.nodes_per_axis == 32);
  CHECK(c.directory == fs::path("runs/a"));
  CHECK(c.prior().order == LabelOrder::first_larger);
}

TEST_CASE("config errors name the key and its line") {
  CHECK(config_error("{\n  \"study\": {\n    \"replications\": -3\n  }\n}") ==
        "cfg.json:3: key 'study.replications': expected a non-negative integer");
  CHECK(config_error("{\n  \"model\": {\n    \"colour\": 1\n  }\n}") == "cfg.json:3: key 'model.colour': unknown key");
  CHECK(config_error("{\n  \"modle\": {}\n}") == "cfg.json:2: key 'modle': unknown section");
  CHECK(config_error("{\n  \"study\": {\"functional\": \"type2p\", \"alpha\": 0.5,\n  \"n_grid\": [50, 75]}\n}")
            .find("key 'study.alpha'") != std::string::npos);
  CHECK(config_error("{\n  \"study\": {\n    \"seed\": 1,,\n  }\n}") == "cfg.json:3: malformed JSON");
}

TEST_CASE("unknown flags and missing subcommands are usage errors") {
  CHECK(invoke({"study", "--bogus"}).code == kExitUsage);
  CHECK(invoke({}).code == kExitUsage);
  const Result help = invoke({"--help"});
  CHECK(help.code == kExitPass);
  for (const char* flag : {"--config", "--seed", "--threads", "--out", "--functional", "--method", "--alpha"}) {
    CHECK(help.out.find(flag) != std::string::npos);
  }
}

TEST_CASE("validate reports a zero component distance for equal components") {
  const fs::path dir = scratch("validate");
  const fs::path cfg = write_file(dir, "bc.json", R"({"model": {"true_param": [0.5, 0.4, 0.4]}})");
  const Result r = invoke({"validate", "--config", cfg.string()});
  CHECK(r.code != 0);
  const CsvTable t = parse_csv(r.out);
  CHECK(parse_double(t.rows.at(0).at(t.column("component_distance"))) == 0.0);
  CHECK(invoke({"study", "--config", cfg.string(), "--out", (dir / "o").string()}).code == kExitUsage);
}

TEST_CASE("coeffs emits one row with equal ML coefficients") {
  const fs::path dir = scratch("coeffs");
  const Result r = invoke({"coeffs", "--out", dir.string()});
  CHECK(r.code == kExitPass);
  const CsvTable t = read_csv(dir / "coeffs.csv");
  REQUIRE(t.rows.size() == 1);
  const auto& row = t.rows[0];
  CHECK(row[t.column("ml_type1")] == row[t.column("ml_type2")]);
  CHECK(row[t.column("ml_type1")] == row[t.column("ml_type3")]);
  CHECK(parse_double(row[t.column("ml_type1")]) == doctest::Approx(8.45207042816571).epsilon(1e-12));
}

TEST_CASE("study output is reproducible and independent of threads") {
  const fs::path dir = scratch("study");
  const fs::path cfg = write_file(dir, "cfg.json", R"({
    "study": {"functional": "type1", "method": "ml", "n_grid": [40, 80, 160, 320], "replications": 40, "seed": 9}
  })");
  const Result a = invoke({"study", "--config", cfg.string(), "--out", (dir / "a").string(), "--threads", "1"});
  const Result b = invoke({"study", "--config", cfg.string(), "--out", (dir / "b").string(), "--threads", "3"});
  CHECK(a.code != kExitUsage);
  CHECK(a.code == b.code);
  for (const char* f : {"summary.csv", "replications.csv", "series.csv", "plot.csv"}) {
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
    CHECK_NOTHROW(read_csv(dir / "a" / f));
  }
  const CsvTable reps = read_csv(dir / "a" / "replications.csv");
  CHECK(reps.rows.size() == 160);
  const CsvTable plot = read_csv(dir / "a" / "plot.csv");
  CHECK(plot.rows.back()[plot.column("kind")] == "theory");
}

TEST_CASE("simulate honours seed and sample-size flags") {
  const fs::path dir = scratch("simulate");
  const Result r = invoke({"simulate", "--functional", "generalization", "--n", "60", "--replications", "20",
                           "--seed", "4", "--out", dir.string()});
  CHECK(r.code == kExitPass);
  const CsvTable t = read_csv(dir / "summary.csv");
  CHECK(t.rows.at(0)[t.column("n")] == "60");
  CHECK(t.rows.at(0)[t.column("seed")] == "4");
  CHECK(invoke({"simulate", "--functional", "type9"}).code == kExitUsage);
}
