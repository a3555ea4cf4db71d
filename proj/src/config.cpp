#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "latentacc/cli.hpp"
#include "latentacc/errors.hpp"

namespace latentacc {

namespace {

using nlohmann::json;

// First line on which "key" appears as an object key; 0 when absent.
std::size_t line_of(const std::string& text, const std::string& key) {
  const std::string quoted = "\"" + key + "\"";
  std::size_t pos = 0;
  while ((pos = text.find(quoted, pos)) != std::string::npos) {
    std::size_t after = pos + quoted.size();
    while (after < text.size() && std::isspace(static_cast<unsigned char>(text[after]))) ++after;
    if (after < text.size() && text[after] == ':') {
      return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
    }
    pos = after;
  }
  return 0;
}

class Reader {
 public:
  Reader(const std::string& text, std::string source) : text_(text), source_(std::move(source)) {}

  [[noreturn]] void fail(const std::string& section, const std::string& key, const std::string& what) const {
    const std::string path = section.empty() ? key : section + "." + key;
    const std::size_t line = line_of(text_, key.empty() ? section : key);
    std::string where = source_;
    if (line > 0) where += ":" + std::to_string(line);
    throw ConfigError(where + ": key '" + path + "': " + what);
  }

  const json* section(const json& root, const std::string& name, const std::set<std::string>& keys) const {
    if (!root.contains(name)) return nullptr;
    const json& s = root.at(name);
    if (!s.is_object()) fail("", name, "expected an object");
    for (const auto& [k, v] : s.items()) {
      if (!keys.count(k)) fail(name, k, "unknown key");
    }
    return &s;
  }

  double number(const json& s, const std::string& section, const std::string& key, double fallback) const {
    if (!s.contains(key)) return fallback;
    const json& v = s.at(key);
    if (!v.is_number()) fail(section, key, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(section, key, "expected a finite number");
    return d;
  }

  std::uint64_t unsigned_integer(const json& s, const std::string& section, const std::string& key,
                                 std::uint64_t fallback) const {
    if (!s.contains(key)) return fallback;
    const json& v = s.at(key);
    if (!v.is_number_unsigned()) fail(section, key, "expected a non-negative integer");
    return v.get<std::uint64_t>();
  }

  std::string string(const json& s, const std::string& section, const std::string& key,
                     const std::string& fallback) const {
    if (!s.contains(key)) return fallback;
    const json& v = s.at(key);
    if (!v.is_string()) fail(section, key, "expected a string");
    return v.get<std::string>();
  }

  bool boolean(const json& s, const std::string& section, const std::string& key, bool fallback) const {
    if (!s.contains(key)) return fallback;
    const json& v = s.at(key);
    if (!v.is_boolean()) fail(section, key, "expected true or false");
    return v.get<bool>();
  }

  std::vector<double> numbers(const json& s, const std::string& section, const std::string& key,
                              std::vector<double> fallback) const {
    if (!s.contains(key)) return fallback;
    const json& v = s.at(key);
    if (!v.is_array()) fail(section, key, "expected an array of numbers");
    std::vector<double> out;
    for (const json& e : v) {
      if (!e.is_number()) fail(section, key, "expected an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

 private:
  const std::string& text_;
  std::string source_;
};

}  // namespace

ModelSpec ExperimentConfig::model() const {
  if (family == "binomial") return ModelSpec::binomial_mixture(trial_count);
  return ModelSpec::gaussian_mixture_1d();
}

ParamVec ExperimentConfig::w_star() const { return ParamVec(model(), true_param); }

Prior ExperimentConfig::prior() const {
  const ModelSpec m = model();
  Prior p;
  if (aligned_order) p = Prior::aligned(m, w_star(), eta);
  p.eta = eta;
  p.mean_lo = box_lo;
  p.mean_hi = box_hi;
  return p;
}

void ExperimentConfig::check() const {
  if (family != "binomial" && family != "gaussian") {
    throw ConfigError("key 'model.family': expected \"binomial\" or \"gaussian\", got \"" + family + "\"");
  }
  if (family == "binomial" && trial_count < 1) throw ConfigError("key 'model.trial_count': must be at least 1");
  if (!(box_lo < box_hi)) throw ConfigError("key 'model.gaussian_box': need lo < hi");
  if (!(eta > 0.0)) throw ConfigError("key 'prior.eta': must be positive");
  if (replications < 2) throw ConfigError("key 'study.replications': need at least 2");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("key 'study.alpha': must lie in (0, 1]");
  if (nodes_per_axis < 2) throw ConfigError("key 'quadrature.nodes_per_axis': need at least 2");
  if (n_grid.empty()) throw ConfigError("key 'study.n_grid': must not be empty");
  for (std::size_t j = 0; j < n_grid.size(); ++j) {
    if (n_grid[j] == 0) throw ConfigError("key 'study.n_grid': sample sizes must be positive");
    if (j > 0 && n_grid[j] <= n_grid[j - 1]) throw ConfigError("key 'study.n_grid': must increase strictly");
    if (functional == Functional::type2p || functional == Functional::type3p) {
      const double t = alpha * static_cast<double>(n_grid[j]);
      if (std::abs(t - std::round(t)) > 1e-9 * std::max(1.0, t) || std::round(t) < 1.0) {
        throw ConfigError("key 'study.alpha': alpha * n is not an integer for n = " + std::to_string(n_grid[j]));
      }
    }
  }
  for (const std::string& f : formats) {
    if (f != "csv") throw ConfigError("key 'output.formats': unsupported format \"" + f + "\"");
  }
}

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t byte = std::min<std::size_t>(e.byte, text.size());
    const std::size_t line =
        1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte > 0 ? byte - 1 : 0), '\n'));
    throw ConfigError(source + ":" + std::to_string(line) + ": malformed JSON");
  }
  if (!root.is_object()) throw ConfigError(source + ": the config must be a JSON object");

  const Reader r(text, source);
  const std::set<std::string> sections{"model", "prior", "study", "quadrature", "output"};
  for (const auto& [k, v] : root.items()) {
    if (!sections.count(k)) r.fail("", k, "unknown section");
  }

  ExperimentConfig c;
  if (const json* s = r.section(root, "model", {"family", "trial_count", "true_param", "gaussian_box"})) {
    c.family = r.string(*s, "model", "family", c.family);
    if (c.family != "binomial" && c.family != "gaussian") {
      r.fail("model", "family", "expected \"binomial\" or \"gaussian\"");
    }
    const std::uint64_t trials = r.unsigned_integer(*s, "model", "trial_count", 3);
    if (trials < 1 || trials > 1000) r.fail("model", "trial_count", "expected an integer in [1, 1000]");
    c.trial_count = static_cast<int>(trials);
    c.true_param = r.numbers(*s, "model", "true_param", c.true_param);
    if (c.true_param.size() != 3) r.fail("model", "true_param", "expected three values (weight, theta_1, theta_2)");
    const std::vector<double> box = r.numbers(*s, "model", "gaussian_box", {c.box_lo, c.box_hi});
    if (box.size() != 2 || !(box[0] < box[1])) r.fail("model", "gaussian_box", "expected [lo, hi] with lo < hi");
    c.box_lo = box[0];
    c.box_hi = box[1];
  }
  if (const json* s = r.section(root, "prior", {"eta", "order"})) {
    c.eta = r.number(*s, "prior", "eta", c.eta);
    if (!(c.eta > 0.0)) r.fail("prior", "eta", "must be positive");
    const std::string order = r.string(*s, "prior", "order", "aligned");
    if (order != "aligned" && order != "none") r.fail("prior", "order", "expected \"aligned\" or \"none\"");
    c.aligned_order = order == "aligned";
  }
  if (const json* s = r.section(root, "study", {"functional", "method", "n_grid", "replications", "alpha", "seed",
                                                "bootstrap", "rao_blackwell"})) {
    try {
      c.functional = functional_from_string(r.string(*s, "study", "functional", to_string(c.functional)));
    } catch (const DomainError& e) {
      r.fail("study", "functional", e.what());
    }
    try {
      c.method = method_from_string(r.string(*s, "study", "method", to_string(c.method)));
    } catch (const DomainError& e) {
      r.fail("study", "method", e.what());
    }
    if (s->contains("n_grid")) {
      const json& v = s->at("n_grid");
      if (!v.is_array() || v.empty()) r.fail("study", "n_grid", "expected a non-empty array of positive integers");
      c.n_grid.clear();
      for (const json& e : v) {
        if (!e.is_number_unsigned() || e.get<std::uint64_t>() == 0) {
          r.fail("study", "n_grid", "expected a non-empty array of positive integers");
        }
        c.n_grid.push_back(e.get<std::size_t>());
      }
    }
    c.replications = r.unsigned_integer(*s, "study", "replications", c.replications);
    c.alpha = r.number(*s, "study", "alpha", c.alpha);
    c.seed = r.unsigned_integer(*s, "study", "seed", c.seed);
    c.bootstrap = r.unsigned_integer(*s, "study", "bootstrap", c.bootstrap);
    c.rao_blackwell = r.boolean(*s, "study", "rao_blackwell", c.rao_blackwell);
  }
  if (const json* s = r.section(root, "quadrature", {"nodes_per_axis"})) {
    c.nodes_per_axis = r.unsigned_integer(*s, "quadrature", "nodes_per_axis", c.nodes_per_axis);
  }
  if (const json* s = r.section(root, "output", {"directory", "formats"})) {
    c.directory = r.string(*s, "output", "directory", c.directory.string());
    if (s->contains("formats")) {
      const json& v = s->at("formats");
      if (!v.is_array()) r.fail("output", "formats", "expected an array of strings");
      c.formats.clear();
      for (const json& e : v) {
        if (!e.is_string()) r.fail("output", "formats", "expected an array of strings");
        c.formats.push_back(e.get<std::string>());
      }
    }
  }

  try {
    c.check();
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    // "key 'section.name': ..." -> locate the name in the source text
    const std::size_t open = msg.find('\'');
    const std::size_t dot = msg.find('.', open);
    const std::size_t close = msg.find('\'', open + 1);
    std::size_t line = 0;
    if (open != std::string::npos && dot != std::string::npos && dot < close) {
      line = line_of(text, msg.substr(dot + 1, close - dot - 1));
    }
    throw ConfigError(source + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " + msg);
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string());
}

}  // namespace latentacc
