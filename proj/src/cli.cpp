#include "dp2s/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "dp2s/bench.hpp"
#include "dp2s/dp_approx.hpp"
#include "dp2s/two_sample_test.hpp"

namespace dp2s::cli {

namespace {

using nlohmann::ordered_json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string fmt4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

struct Common {
  std::size_t n = 1000;
  std::size_t r = 2000;
  double a = 1.0;
  std::string base = "normal:0,1";
  std::optional<std::uint64_t> seed;
  std::string mode = "auto";
  double tail = 0.025;
  unsigned threads = 1;
  std::string format = "text";
  std::string out;
};

void add_common(CLI::App& app, Common& c, const std::string& default_format) {
  c.format = default_format;
  app.add_option("--n", c.n, "truncation level of each realization")->capture_default_str();
  app.add_option("--r", c.r, "replicates of the distance")->capture_default_str();
  app.add_option("--a", c.a, "prior concentration")->capture_default_str();
  app.add_option("--base", c.base,
                 "base measure: normal:mu,sigma | uniform:lo,hi | exponential:rate | studentt:df | "
                 "lognormal:mu,sigma | mixture:w/mu/sigma,...")
      ->capture_default_str();
  app.add_option("--seed", c.seed, "random seed (default: $DP2S_SEED, else 0)");
  app.add_option("--mode", c.mode, "threshold mode: auto | simulate | table | formula | fixed:<value>")
      ->capture_default_str();
  app.add_option("--tail", c.tail, "upper fraction of prior distances removed to form U")->capture_default_str();
  app.add_option("--threads", c.threads, "worker threads, 0 = all cores; never changes results")
      ->capture_default_str();
  app.add_option("--format", c.format, "output format")
      ->check(CLI::IsMember({"json", "csv", "text"}))
      ->capture_default_str();
  app.add_option("--out", c.out, "output file (default: stdout)");
}

std::uint64_t resolve_seed(const Common& c) {
  if (c.seed) return *c.seed;
  if (const char* env = std::getenv("DP2S_SEED"); env != nullptr && *env != '\0') {
    const std::string text(env);
    std::size_t used = 0;
    std::uint64_t v = 0;
    try {
      v = std::stoull(text, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != text.size() || text.front() == '-') {
      throw UsageError("DP2S_SEED must be a nonnegative integer, got '" + text + "'");
    }
    return v;
  }
  return 0;
}

TestConfig make_config(const Common& c) {
  TestConfig config;
  try {
    config.n = c.n;
    config.r = c.r;
    config.a = c.a;
    config.base = BaseMeasure::parse(c.base);
    config.threshold = ThresholdSpec::parse(c.mode);
    config.tail = c.tail;
    config.threads = c.threads;
    config.seed = resolve_seed(c);
    config.validate();
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  return config;
}

ordered_json config_json(const TestConfig& config) {
  ordered_json j;
  j["n"] = config.n;
  j["r"] = config.r;
  j["a"] = config.a;
  j["base"] = config.base.describe();
  j["seed"] = config.seed;
  j["mode"] = config.threshold.describe();
  j["tail"] = config.tail;
  return j;
}

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

// Writes to --out when given, else to `out`.
void emit(const Common& c, std::ostream& out, const std::string& text) {
  if (c.out.empty()) {
    out << text;
    return;
  }
  std::ofstream file(c.out, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open output file '" + c.out + "'");
  file << text;
  if (!file) throw std::runtime_error("failed writing '" + c.out + "'");
}

std::string decision(bool reject) { return reject ? "reject H0" : "fail to reject H0"; }

void check_table_sizes(const TestConfig& config, std::size_t m1, std::size_t m2) {
  if (config.threshold.mode == ThresholdMode::Table &&
      (m1 > ThresholdTable::kMaxSize || m2 > ThresholdTable::kMaxSize)) {
    throw UsageError("threshold table covers sample sizes up to 20; use --mode formula or --mode simulate");
  }
}

std::string test_report(const Common& c, const TestReport& rep, const std::string& x_path, const std::string& y_path) {
  if (c.format == "json") {
    ordered_json j;
    j["schema_version"] = 1;
    j["command"] = "test";
    j["config"] = config_json(rep.config);
    j["inputs"] = {{"x", x_path}, {"y", y_path}, {"m1", rep.m1}, {"m2", rep.m2}};
    j["mean_d"] = rep.mean_d;
    j["mean_d_se"] = rep.mean_d_se;
    j["d_quantiles"] = {{"q025", rep.d_quantiles.lower}, {"q500", rep.d_quantiles.median},
                        {"q975", rep.d_quantiles.upper}};
    j["threshold"] = rep.threshold;
    j["threshold_source"] = to_string(rep.threshold_source);
    j["threshold_note"] = rep.threshold_note;
    j["reject"] = rep.reject;
    j["decision"] = decision(rep.reject);
    return dump(j);
  }
  std::ostringstream os;
  os.precision(17);
  if (c.format == "csv") {
    os << "m1,m2,mean_d,mean_d_se,d_q025,d_q500,d_q975,threshold,threshold_source,reject\n";
    os << rep.m1 << ',' << rep.m2 << ',' << rep.mean_d << ',' << rep.mean_d_se << ',' << rep.d_quantiles.lower << ','
       << rep.d_quantiles.median << ',' << rep.d_quantiles.upper << ',' << rep.threshold << ','
       << to_string(rep.threshold_source) << ',' << (rep.reject ? 1 : 0) << '\n';
    return os.str();
  }
  os << "samples: m1 = " << rep.m1 << ", m2 = " << rep.m2 << '\n';
  os << "mean distance: " << fmt4(rep.mean_d) << " (se " << fmt4(rep.mean_d_se) << ")\n";
  os << "distance 2.5% / 50% / 97.5%: " << fmt4(rep.d_quantiles.lower) << " / " << fmt4(rep.d_quantiles.median)
     << " / " << fmt4(rep.d_quantiles.upper) << '\n';
  os << "threshold U: " << fmt4(rep.threshold) << " (" << to_string(rep.threshold_source) << ")\n";
  if (!rep.threshold_note.empty()) os << "note: " << rep.threshold_note << '\n';
  os << decision(rep.reject) << '\n';
  return os.str();
}

int cmd_test(const Common& c, const std::vector<std::string>& files, std::ostream& out, std::ostream& err) {
  if (files.size() != 2) throw UsageError("test requires exactly two sample files");
  const TestConfig config = make_config(c);
  const std::vector<double> x = parse_sample_file(files[0]);
  const std::vector<double> y = parse_sample_file(files[1]);
  check_table_sizes(config, x.size(), y.size());
  const TestReport rep = run_test(x, y, config);
  if (!rep.threshold_note.empty() && c.format != "text") err << "note: " << rep.threshold_note << '\n';
  emit(c, out, test_report(c, rep, files[0], files[1]));
  return kSuccess;
}

int cmd_threshold(const Common& c, std::size_t m1, std::size_t m2, std::ostream& out, std::ostream& err) {
  const TestConfig config = make_config(c);
  if (m1 < 1 || m2 < 1) throw UsageError("--m1 and --m2 must be >= 1");
  check_table_sizes(config, m1, m2);
  if (config.threshold.mode == ThresholdMode::Simulate ||
      (config.threshold.mode == ThresholdMode::Auto &&
       !(config.a == 1.0 && config.tail == 0.025 &&
         ((m1 <= ThresholdTable::kMaxSize && m2 <= ThresholdTable::kMaxSize) || formula_in_range(m1, m2))))) {
    if (config.r < 40 || config.tail * static_cast<double>(config.r) < 1.0 - 1e-9) {
      throw UsageError("threshold simulation needs --r >= 40 and r * tail >= 1");
    }
  }
  const ResolvedThreshold u = resolve_threshold(m1, m2, config);
  if (!u.note.empty()) err << "note: " << u.note << '\n';
  std::ostringstream os;
  if (c.format == "json") {
    ordered_json j;
    j["schema_version"] = 1;
    j["command"] = "threshold";
    j["config"] = config_json(config);
    j["m1"] = m1;
    j["m2"] = m2;
    j["threshold"] = u.value;
    j["threshold_source"] = to_string(u.source);
    j["threshold_note"] = u.note;
    os << dump(j);
  } else if (c.format == "csv") {
    os.precision(17);
    os << "m1,m2,threshold,threshold_source\n" << m1 << ',' << m2 << ',' << u.value << ',' << to_string(u.source)
       << '\n';
  } else {
    os << fmt4(u.value) << " (" << to_string(u.source) << ")\n";
  }
  emit(c, out, os.str());
  return kSuccess;
}

struct PowerArgs {
  std::string scenario;
  std::string x_dist;
  std::string y_dist;
  std::size_t m = 0;
  std::size_t m1 = 0;
  std::size_t m2 = 0;
  std::size_t reps = 1000;
  std::size_t permutations = 1000;
  double alpha = 0.05;
};

int cmd_power(const Common& c, const PowerArgs& p, std::ostream& out) {
  const TestConfig config = make_config(c);
  const std::size_t m1 = p.m1 != 0 ? p.m1 : p.m;
  const std::size_t m2 = p.m2 != 0 ? p.m2 : p.m;
  if (m1 < 1 || m2 < 1) throw UsageError("give the sample sizes with --m or --m1/--m2");
  if (p.reps < 1) throw UsageError("--reps must be >= 1");
  if (!(p.alpha > 0.0 && p.alpha < 1.0)) throw UsageError("--alpha must lie in (0, 1)");
  Scenario scenario;
  try {
    if (!p.scenario.empty()) {
      if (!p.x_dist.empty() || !p.y_dist.empty()) throw UsageError("use --scenario or --x-dist/--y-dist, not both");
      scenario = named_scenario(p.scenario, m1, m2);
    } else {
      if (p.x_dist.empty() || p.y_dist.empty()) throw UsageError("give --scenario or both --x-dist and --y-dist");
      scenario = Scenario{"custom", BaseMeasure::parse(p.x_dist), BaseMeasure::parse(p.y_dist), m1, m2};
    }
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  check_table_sizes(config, m1, m2);

  BenchOptions options;
  options.permutations = p.permutations;
  options.alpha = p.alpha;
  const PowerResult r = estimate_power(scenario, p.reps, config, options);

  std::ostringstream os;
  if (c.format == "json") {
    ordered_json j;
    j["schema_version"] = 1;
    j["command"] = "power";
    j["config"] = config_json(config);
    j["scenario"] = {{"name", scenario.name},
                     {"x", scenario.dist_x.describe()},
                     {"y", scenario.dist_y.describe()},
                     {"m1", m1},
                     {"m2", m2}};
    j["replications"] = r.replications;
    j["permutations"] = p.permutations;
    j["alpha"] = p.alpha;
    j["power_bayes"] = r.power_bayes;
    j["power_ks"] = r.power_ks;
    j["power_wilcoxon"] = r.power_wilcoxon;
    j["se_bayes"] = r.se_bayes;
    j["se_ks"] = r.se_ks;
    j["se_wilcoxon"] = r.se_wilcoxon;
    os << dump(j);
  } else if (c.format == "csv") {
    os.precision(17);
    os << "scenario,m1,m2,replications,power_bayes,se_bayes,power_ks,se_ks,power_wilcoxon,se_wilcoxon\n";
    os << scenario.name << ',' << m1 << ',' << m2 << ',' << r.replications << ',' << r.power_bayes << ','
       << r.se_bayes << ',' << r.power_ks << ',' << r.se_ks << ',' << r.power_wilcoxon << ',' << r.se_wilcoxon
       << '\n';
  } else {
    os << "scenario: " << scenario.name << " (x ~ " << scenario.dist_x.describe()
       << ", y ~ " << scenario.dist_y.describe() << "), m1 = " << m1 << ", m2 = " << m2 << '\n';
    os << "replications: " << r.replications << '\n';
    os << "power bayes:    " << fmt4(r.power_bayes) << " (se " << fmt4(r.se_bayes) << ")\n";
    os << "power ks:       " << fmt4(r.power_ks) << " (se " << fmt4(r.se_ks) << ")\n";
    os << "power wilcoxon: " << fmt4(r.power_wilcoxon) << " (se " << fmt4(r.se_wilcoxon) << ")\n";
  }
  emit(c, out, os.str());
  return kSuccess;
}

ordered_json table_summary(const TableResult& t, const TestConfig& config, std::size_t permutations) {
  ordered_json j;
  j["schema_version"] = 1;
  j["command"] = "table";
  j["table"] = to_string(t.id);
  j["config"] = config_json(config);
  j["replications"] = t.replications;
  j["permutations"] = permutations;
  ordered_json rows = ordered_json::array();
  for (const auto& row : t.rows) {
    ordered_json r;
    r["scenario"] = row.scenario;
    r["m1"] = row.m1;
    r["m2"] = row.m2;
    r["metric"] = row.metric;
    r["estimate"] = row.estimate;
    r["se"] = row.se ? ordered_json(*row.se) : ordered_json(nullptr);
    rows.push_back(std::move(r));
  }
  j["rows"] = std::move(rows);
  return j;
}

int cmd_table(const Common& c, const std::string& id_text, std::size_t reps, std::size_t permutations,
              const std::string& summary_path, std::ostream& out) {
  const TestConfig config = make_config(c);
  TableId id;
  try {
    id = parse_table_id(id_text);
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  if (reps < 1) throw UsageError("--reps must be >= 1");
  if (id == TableId::T10 && (config.r < 40 || config.tail * static_cast<double>(config.r) < 1.0 - 1e-9)) {
    throw UsageError("threshold simulation needs --r >= 40 and r * tail >= 1");
  }
  const TableResult t = reproduce_table(id, config, reps, permutations);
  const ordered_json summary = table_summary(t, config, permutations);
  if (c.format == "json") {
    emit(c, out, dump(summary));
  } else {
    std::ostringstream os;
    write_table_csv(os, t);
    emit(c, out, os.str());
  }
  if (!summary_path.empty()) {
    std::ofstream file(summary_path, std::ios::binary);
    if (!file) throw std::runtime_error("cannot open summary file '" + summary_path + "'");
    file << dump(summary);
  }
  return kSuccess;
}

int cmd_paths(const Common& c, const std::vector<std::string>& files, std::size_t count, std::ostream& out) {
  if (files.empty() || files.size() > 2) throw UsageError("paths takes one or two sample files");
  if (count < 1) throw UsageError("--count must be >= 1");
  const TestConfig config = make_config(c);
  const DpParams prior(config.a, config.base);
  std::vector<LabeledPath> paths;
  for (std::size_t s = 0; s < files.size(); ++s) {
    const std::vector<double> data = parse_sample_file(files[s]);
    const RealizationSampler sampler(posterior_params(prior, data), config.n);
    for (std::size_t k = 0; k < count; ++k) {
      const RngStream rng(config.seed, derive_stream_id({6, s, k}));
      paths.push_back({s == 0 ? "x" : "y", k + 1, sampler.draw(rng)});
    }
  }
  std::ostringstream os;
  write_paths_csv(os, paths);
  emit(c, out, os.str());
  return kSuccess;
}

}  // namespace

std::vector<double> parse_samples(std::istream& in, const std::string& source) {
  std::vector<double> values;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto last = line.find_last_not_of(" \t\r");
    const std::string token = line.substr(first, last - first + 1);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != token.size()) {
      throw std::runtime_error(source + ": line " + std::to_string(number) + ": not a number: '" + token + "'");
    }
    if (!std::isfinite(v)) {
      throw std::runtime_error(source + ": line " + std::to_string(number) + ": value must be finite");
    }
    values.push_back(v);
  }
  if (values.empty()) throw std::runtime_error(source + ": empty sample");
  return values;
}

std::vector<double> parse_sample_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read sample file '" + path + "'");
  return parse_samples(in, path);
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bayesian nonparametric two-sample test with Dirichlet process posteriors", "dp2s"};
  app.require_subcommand(1);

  Common test_c;
  std::vector<std::string> test_files;
  CLI::App* test = app.add_subcommand("test", "run the two-sample test on two sample files");
  test->add_option("files", test_files, "two files with one value per line")->required();
  add_common(*test, test_c, "text");

  Common thr_c;
  std::size_t thr_m1 = 0;
  std::size_t thr_m2 = 0;
  CLI::App* threshold = app.add_subcommand("threshold", "print the threshold U for sample sizes m1, m2");
  threshold->add_option("--m1", thr_m1, "first sample size")->required();
  threshold->add_option("--m2", thr_m2, "second sample size")->required();
  add_common(*threshold, thr_c, "text");

  Common pow_c;
  PowerArgs pow_a;
  CLI::App* power = app.add_subcommand("power", "estimate rejection rates for a scenario");
  power->add_option("--scenario", pow_a.scenario, "example1..example8 or power1..power5");
  power->add_option("--x-dist", pow_a.x_dist, "distribution of x, same syntax as --base");
  power->add_option("--y-dist", pow_a.y_dist, "distribution of y, same syntax as --base");
  power->add_option("--m", pow_a.m, "size of both samples");
  power->add_option("--m1", pow_a.m1, "size of x");
  power->add_option("--m2", pow_a.m2, "size of y");
  power->add_option("--reps", pow_a.reps, "replications")->capture_default_str();
  power->add_option("--permutations", pow_a.permutations, "permutations of the K-S p-value")->capture_default_str();
  power->add_option("--alpha", pow_a.alpha, "level of the comparator tests")->capture_default_str();
  add_common(*power, pow_c, "text");

  Common tab_c;
  std::string tab_id;
  std::size_t tab_reps = 1000;
  std::size_t tab_perm = 1000;
  std::string tab_summary;
  CLI::App* table = app.add_subcommand("table", "regenerate a results table as CSV");
  table->add_option("--id", tab_id, "T1..T10")->required();
  table->add_option("--reps", tab_reps, "replications per power cell")->capture_default_str();
  table->add_option("--permutations", tab_perm, "permutations of the K-S p-value")->capture_default_str();
  table->add_option("--summary", tab_summary, "also write the JSON summary to this file");
  add_common(*table, tab_c, "csv");

  Common path_c;
  std::vector<std::string> path_files;
  std::size_t path_count = 5;
  CLI::App* paths = app.add_subcommand("paths", "export posterior sample paths as CSV");
  paths->add_option("files", path_files, "one or two sample files")->required();
  paths->add_option("--count", path_count, "paths per sample")->capture_default_str();
  add_common(*paths, path_c, "csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsageError;
  }

  try {
    if (*test) return cmd_test(test_c, test_files, out, err);
    if (*threshold) return cmd_threshold(thr_c, thr_m1, thr_m2, out, err);
    if (*power) return cmd_power(pow_c, pow_a, out);
    if (*table) return cmd_table(tab_c, tab_id, tab_reps, tab_perm, tab_summary, out);
    if (*paths) return cmd_paths(path_c, path_files, path_count, out);
  } catch (const UsageError& e) {
    err << "dp2s: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    err << "dp2s: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kUsageError;
}

}  // namespace dp2s::cli
