#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "diagnostics.hpp"
#include "error.hpp"
#include "io.hpp"

namespace yyf {

std::string content_hash(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

struct KeyInfo {
  const char* path;
  const char* flat;  // root-level alias, or nullptr
};

constexpr KeyInfo kKeys[] = {
    {"model.name", "model"},        {"model.type", nullptr},         {"model.A", nullptr},
    {"model.G", nullptr},           {"model.H", nullptr},            {"model.m0", nullptr},
    {"model.P0", nullptr},          {"grid.d", "d"},                 {"grid.R", "R"},
    {"grid.M", "M"},                {"schedule.T", "T"},             {"schedule.K", "K"},
    {"filter.substeps", "substeps"}, {"filter.sim_substeps", "sim_substeps"},
    {"filter.test_functions", "test_functions"},
    {"baselines.methods", "baselines"}, {"baselines.particles", "particles"},
    {"baselines.ks_paths", "ks_paths"}, {"sweep.kind", "sweep"},   {"sweep.deltas", "deltas"},
    {"sweep.radii", "radii"},       {"sweep.spacing", "spacing"},    {"sweep.oracle", "oracle"},
    {"sweep.oracle_refine", "oracle_refine"}, {"sweep.moment_order", "moment_order"},
    {"sweep.increments", "increments"}, {"seeds.base", "seed_base"}, {"seeds.count", "seeds"},
    {"seeds.list", "seed_list"},    {"output.dir", "out"},           {"output.format", "format"},
    {"validate.samples", "samples"},
};

const std::vector<std::string> kBaselines = {"kalman", "ks_monte_carlo", "bootstrap_pf", "fine_oracle"};
const std::vector<std::string> kSweepKinds = {"delta", "radius", "moment", "l4", "lemma"};

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& x : v) s += (s.empty() ? "" : ", ") + x;
  return s;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s + ",") {
    if (c == ',' || c == ' ' || c == '\t') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  return out;
}

class Reader {
 public:
  Reader(std::map<std::string, std::string> values, std::string source, std::ostream* log)
      : values_(std::move(values)), source_(std::move(source)), log_(log) {}

  [[noreturn]] void invalid(const std::string& key, const std::string& msg) const {
    fail(ErrorCode::invalid_argument, source_ + ": " + key + ": " + msg);
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::string raw(const std::string& key) const { return values_.at(key); }

  std::string text(const std::string& key, const std::string& fallback, std::vector<std::string>& applied) {
    if (has(key)) return raw(key);
    note(key, fallback, applied);
    return fallback;
  }

  double number(const std::string& key, double fallback, std::vector<std::string>& applied) {
    if (!has(key)) {
      note(key, format_double(fallback), applied);
      return fallback;
    }
    return parse_double(key, raw(key));
  }

  std::size_t count(const std::string& key, std::size_t fallback, std::vector<std::string>& applied) {
    if (!has(key)) {
      note(key, std::to_string(fallback), applied);
      return fallback;
    }
    return parse_count(key, raw(key));
  }

  std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback,
                              std::vector<std::string>& applied) {
    if (!has(key)) {
      std::string s;
      for (double v : fallback) s += (s.empty() ? "" : ", ") + format_double(v);
      note(key, s, applied);
      return fallback;
    }
    std::vector<double> out;
    for (const auto& item : split_list(raw(key))) out.push_back(parse_double(key, item));
    if (out.empty()) invalid(key, "empty list");
    return out;
  }

  double parse_double(const std::string& key, const std::string& s) const {
    double v = 0.0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v))
      invalid(key, "expected a number, got '" + s + "'");
    return v;
  }

  std::size_t parse_count(const std::string& key, const std::string& s) const {
    unsigned long long v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) invalid(key, "expected a non-negative integer, got '" + s + "'");
    return static_cast<std::size_t>(v);
  }

 private:
  void note(const std::string& key, const std::string& value, std::vector<std::string>& applied) {
    applied.push_back(key + " = " + value);
    if (log_) *log_ << "default " << key << " = " << value << '\n';
  }

  std::map<std::string, std::string> values_;
  std::string source_;
  std::ostream* log_;
};

Eigen::MatrixXd parse_matrix(const Reader& r, const std::string& key) {
  std::vector<std::vector<double>> rows;
  std::stringstream ss(r.raw(key));
  std::string row;
  while (std::getline(ss, row, ';')) {
    std::vector<double> vals;
    for (const auto& item : split_list(row)) vals.push_back(r.parse_double(key, item));
    if (!vals.empty()) rows.push_back(std::move(vals));
  }
  if (rows.empty()) r.invalid(key, "empty matrix");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size()) r.invalid(key, "rows of unequal length");
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return m;
}

LinearGaussian parse_linear(const Reader& r) {
  for (const char* k : {"model.A", "model.G", "model.H", "model.m0", "model.P0"})
    if (!r.has(k)) r.invalid(k, "required when model.type = linear");
  LinearGaussian lin;
  lin.drift = parse_matrix(r, "model.A");
  lin.diffusion = parse_matrix(r, "model.G");
  lin.observation = parse_matrix(r, "model.H");
  const Eigen::MatrixXd m0 = parse_matrix(r, "model.m0");
  lin.initial_cov = parse_matrix(r, "model.P0");
  const auto d = lin.drift.rows();
  if (lin.drift.cols() != d) r.invalid("model.A", "must be square");
  if (lin.diffusion.rows() != d) r.invalid("model.G", "must have " + std::to_string(d) + " rows");
  if (lin.observation.cols() != d) r.invalid("model.H", "must have " + std::to_string(d) + " columns");
  if (m0.size() != d) r.invalid("model.m0", "must have " + std::to_string(d) + " entries");
  if (lin.initial_cov.rows() != d || lin.initial_cov.cols() != d)
    r.invalid("model.P0", "must be " + std::to_string(d) + "x" + std::to_string(d));
  lin.initial_mean = m0.reshaped();
  return lin;
}

std::map<std::string, std::string> flatten(const boost::property_tree::ptree& tree, const std::string& source) {
  std::map<std::string, std::string> values;
  auto put = [&](const std::string& key, const std::string& value) {
    if (!values.emplace(key, trim(value)).second) fail(ErrorCode::parse, source + ": duplicate key '" + key + "'");
  };
  auto canonical_of_flat = [&](const std::string& name) -> std::string {
    for (const auto& k : kKeys)
      if (k.flat && name == k.flat) return k.path;
    fail(ErrorCode::invalid_argument, source + ": unknown key '" + name + "'");
  };
  auto known = [](const std::string& path) {
    return std::any_of(std::begin(kKeys), std::end(kKeys), [&](const KeyInfo& k) { return path == k.path; });
  };
  for (const auto& [name, node] : tree) {
    if (node.empty()) {
      put(canonical_of_flat(name), node.data());
      continue;
    }
    for (const auto& [key, leaf] : node) {
      const std::string path = name + "." + key;
      if (!known(path)) fail(ErrorCode::invalid_argument, source + ": unknown key '" + path + "'");
      put(path, leaf.data());
    }
  }
  return values;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& source, std::ostream* log) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream is(text);
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    fail(ErrorCode::parse, source + ":" + std::to_string(e.line()) + ": parse error: " + e.message());
  } catch (const pt::ptree_error& e) {
    fail(ErrorCode::parse, source + ": parse error: " + e.what());
  }

  Reader r(flatten(tree, source), source, log);
  ExperimentConfig c;
  auto& applied = c.defaults_applied;
  c.source = source;
  c.hash = content_hash(text);

  const std::string type = r.has("model.type") ? r.raw("model.type") : "builtin";
  if (type == "linear") {
    c.model = r.has("model.name") ? r.raw("model.name") : "custom";
    c.custom = parse_linear(r);
  } else if (type == "builtin") {
    c.model = r.text("model.name", c.model, applied);
    const auto& names = builtin_model_names();
    if (std::find(names.begin(), names.end(), c.model) == names.end())
      r.invalid("model.name", "unknown model '" + c.model + "' (registered: " + join(names) + ")");
  } else {
    r.invalid("model.type", "expected 'builtin' or 'linear', got '" + type + "'");
  }
  const FilterModel model = c.build_model();

  c.dimension = r.count("grid.d", model.dimension(), applied);
  if (c.dimension != model.dimension())
    r.invalid("grid.d", "d = " + std::to_string(c.dimension) + " does not match model '" + c.model +
                            "' of dimension " + std::to_string(model.dimension()));
  if (c.dimension < 1 || c.dimension > 3) r.invalid("grid.d", "d must be 1, 2 or 3");
  c.radius = r.number("grid.R", c.radius, applied);
  if (!(c.radius > 1.0)) r.invalid("grid.R", "R must be > 1");
  c.points = r.count("grid.M", c.points, applied);
  if (c.points < 5 || c.points % 2 == 0) r.invalid("grid.M", "M must be odd and >= 5");

  c.terminal = r.number("schedule.T", c.terminal, applied);
  if (!(c.terminal > 0.0)) r.invalid("schedule.T", "T must be > 0");
  c.steps = r.count("schedule.K", c.steps, applied);
  if (c.steps < 1) r.invalid("schedule.K", "K must be >= 1");

  c.substeps = r.count("filter.substeps", c.substeps, applied);
  if (c.substeps < 1) r.invalid("filter.substeps", "substeps must be >= 1");
  c.sim_substeps = r.count("filter.sim_substeps", c.sim_substeps, applied);
  if (c.sim_substeps < 1) r.invalid("filter.sim_substeps", "sim_substeps must be >= 1");
  c.test_functions = split_list(r.text("filter.test_functions", "x", applied));
  if (c.test_functions.empty()) r.invalid("filter.test_functions", "empty list");
  for (const auto& label : c.test_functions) {
    try {
      (void)builtin_test_function(label, c.dimension);
    } catch (const Error& e) {
      r.invalid("filter.test_functions", e.what());
    }
  }

  c.baselines = split_list(r.text("baselines.methods", model.linear() ? "kalman" : "bootstrap_pf", applied));
  for (const auto& b : c.baselines) {
    if (std::find(kBaselines.begin(), kBaselines.end(), b) == kBaselines.end())
      r.invalid("baselines.methods", "unknown baseline '" + b + "' (valid: " + join(kBaselines) + ")");
    if (b == "kalman" && !model.linear())
      r.invalid("baselines.methods", "kalman needs a linear model; '" + c.model + "' is not");
  }
  c.particles = r.count("baselines.particles", c.particles, applied);
  c.ks_paths = r.count("baselines.ks_paths", c.ks_paths, applied);
  if (c.particles < 2) r.invalid("baselines.particles", "need at least 2 particles");
  if (c.ks_paths < 2) r.invalid("baselines.ks_paths", "need at least 2 paths");

  c.sweep_kind = r.text("sweep.kind", c.sweep_kind, applied);
  if (std::find(kSweepKinds.begin(), kSweepKinds.end(), c.sweep_kind) == kSweepKinds.end())
    r.invalid("sweep.kind", "unknown sweep kind '" + c.sweep_kind + "' (valid: " + join(kSweepKinds) + ")");
  c.deltas = r.numbers("sweep.deltas", {0.02, 0.01, 0.005, 0.0025}, applied);
  for (double d : c.deltas) {
    const double k = c.terminal / d;
    if (!(d > 0.0) || std::abs(k - std::round(k)) > 1e-9 * k)
      r.invalid("sweep.deltas", "delta " + format_double(d) + " does not divide T");
  }
  c.radii = r.numbers("sweep.radii", {3.0, 4.5, 6.0}, applied);
  for (double R : c.radii)
    if (!(R > 1.0)) r.invalid("sweep.radii", "radii must be > 1");
  c.spacing = r.number("sweep.spacing", c.spacing, applied);
  if (!(c.spacing > 0.0)) r.invalid("sweep.spacing", "spacing must be > 0");
  c.oracle = r.text("sweep.oracle", model.linear() ? "kalman" : "fine_oracle", applied);
  try {
    if (parse_oracle(c.oracle) == Oracle::kalman && !model.linear())
      r.invalid("sweep.oracle", "kalman oracle needs a linear model; '" + c.model + "' is not");
  } catch (const Error& e) {
    if (e.code() == ErrorCode::unknown_name) r.invalid("sweep.oracle", e.what());
    throw;
  }
  c.oracle_refine = r.count("sweep.oracle_refine", c.oracle_refine, applied);
  if (c.oracle_refine < 1) r.invalid("sweep.oracle_refine", "must be >= 1");
  c.moment_order = static_cast<int>(r.count("sweep.moment_order", 2, applied));
  if (c.moment_order < 2 || c.moment_order % 2) r.invalid("sweep.moment_order", "must be even and >= 2");
  c.increments = r.count("sweep.increments", c.increments, applied);

  if (r.has("seeds.list")) {
    for (const auto& item : split_list(r.raw("seeds.list")))
      c.seed_list.push_back(r.parse_count("seeds.list", item));
    if (c.seed_list.empty()) r.invalid("seeds.list", "empty list");
  } else {
    c.seed_base = r.count("seeds.base", 0, applied);
    c.seed_count = r.count("seeds.count", c.seed_count, applied);
    if (c.seed_count < 1) r.invalid("seeds.count", "need at least one seed");
  }

  c.output_dir = r.text("output.dir", c.output_dir, applied);
  c.output_format = r.text("output.format", c.output_format, applied);
  if (c.output_format != "csv" && c.output_format != "binary")
    r.invalid("output.format", "expected 'csv' or 'binary'");
  c.validate_samples = r.count("validate.samples", c.validate_samples, applied);
  return c;
}

ExperimentConfig load_config(const std::string& path, std::ostream* log) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorCode::io, "cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str(), path, log);
}

FilterModel ExperimentConfig::build_model() const {
  if (custom) return make_linear_model(model, *custom);
  return builtin_model(model);
}

Grid ExperimentConfig::build_grid() const { return Grid(dimension, radius, points); }

TimeSchedule ExperimentConfig::schedule() const { return TimeSchedule(terminal, steps); }

std::vector<std::uint64_t> ExperimentConfig::seeds() const {
  if (!seed_list.empty()) return seed_list;
  std::vector<std::uint64_t> out(seed_count);
  for (std::size_t i = 0; i < seed_count; ++i) out[i] = seed_base + i;
  return out;
}

}  // namespace yyf
