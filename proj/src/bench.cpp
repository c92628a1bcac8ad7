#include "dp2s/bench.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "dp2s/parallel.hpp"

namespace dp2s {

namespace {

constexpr std::uint64_t kDataDomain = 3;
constexpr std::uint64_t kTestDomain = 4;
constexpr std::uint64_t kPermutationDomain = 5;

Scenario make(std::string name, BaseMeasure x, BaseMeasure y, std::size_t m1, std::size_t m2) {
  Scenario s{std::move(name), std::move(x), std::move(y), m1, m2};
  s.validate();
  return s;
}

BaseMeasure bimodal() { return BaseMeasure::normal_mixture({{0.5, -2.0, 1.0}, {0.5, 2.0, 1.0}}); }

// Half the spread of the order statistics one binomial standard deviation
// either side of the trimmed maximum.
double trimmed_upper_bound_se(std::vector<double> values, double tail) {
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  const auto removed = static_cast<std::size_t>(std::ceil(tail * n - 1e-9));
  const std::size_t at = values.size() - 1 - removed;
  const auto spread = static_cast<std::size_t>(std::ceil(std::sqrt(n * tail * (1.0 - tail))));
  const std::size_t lo = at >= spread ? at - spread : 0;
  const std::size_t hi = std::min(values.size() - 1, at + spread);
  return 0.5 * (values[hi] - values[lo]);
}

TestConfig single_threaded(const TestConfig& config) {
  TestConfig c = config;
  c.threads = 1;
  return c;
}

}  // namespace

void Scenario::validate() const {
  if (m1 < 1 || m2 < 1) throw std::invalid_argument("scenario: sample sizes must be >= 1");
}

Scenario example_scenario(int index, std::size_t m) {
  const BaseMeasure std_normal = BaseMeasure::normal(0.0, 1.0);
  switch (index) {
    case 1: return make("example1", std_normal, std_normal, m, m);
    case 2: return make("example2", std_normal, BaseMeasure::normal(1.0, 1.0), m, m);
    case 3: return make("example3", std_normal, BaseMeasure::normal(0.0, 2.0), m, m);
    case 4: return make("example4", std_normal, bimodal(), m, m);
    case 5: return make("example5", std_normal, BaseMeasure::student_t(3.0), m, m);
    case 6: return make("example6", std_normal, BaseMeasure::student_t(0.5), m, m);
    case 7: return make("example7", BaseMeasure::log_normal(0.0, 1.0), BaseMeasure::log_normal(1.0, 1.0), m, m);
    case 8: return make("example8", BaseMeasure::log_normal(0.0, 1.0), BaseMeasure::log_normal(0.0, 2.0), m, m);
    default: throw std::out_of_range("example scenarios are numbered 1..8");
  }
}

Scenario power_scenario(int index, std::size_t m) {
  const BaseMeasure std_normal = BaseMeasure::normal(0.0, 1.0);
  switch (index) {
    case 1: return make("power1", std_normal, BaseMeasure::normal(1.0, 1.0), m, m);
    case 2: return make("power2", std_normal, BaseMeasure::normal(0.0, 2.0), m, m);
    case 3: return make("power3", std_normal, bimodal(), m, m);
    case 4: return make("power4", std_normal, BaseMeasure::student_t(0.5), m, m);
    case 5: return make("power5", BaseMeasure::exponential(1.0), BaseMeasure::exponential(2.0), m, m);
    default: throw std::out_of_range("power scenarios are numbered 1..5");
  }
}

Scenario named_scenario(std::string_view name, std::size_t m1, std::size_t m2) {
  auto number = [&](std::string_view prefix) -> int {
    const std::string_view digits = name.substr(prefix.size());
    if (digits.size() != 1 || digits[0] < '1' || digits[0] > '9') {
      throw std::invalid_argument("unknown scenario '" + std::string(name) + "'");
    }
    return digits[0] - '0';
  };
  Scenario s;
  try {
    if (name.starts_with("example")) {
      s = example_scenario(number("example"), 1);
    } else if (name.starts_with("power")) {
      s = power_scenario(number("power"), 1);
    } else {
      throw std::invalid_argument("unknown scenario '" + std::string(name) + "'; use example1..8 or power1..5");
    }
  } catch (const std::out_of_range& e) {
    throw std::invalid_argument(e.what());
  }
  s.m1 = m1;
  s.m2 = m2;
  s.validate();
  return s;
}

SamplePair draw_samples(const Scenario& scenario, const RngStream& rng) {
  SamplePair out;
  RngStream rx = rng.lane(0);
  RngStream ry = rng.lane(1);
  out.x.resize(scenario.m1);
  out.y.resize(scenario.m2);
  for (double& v : out.x) v = scenario.dist_x.sample(rx);
  for (double& v : out.y) v = scenario.dist_y.sample(ry);
  return out;
}

ReplicationOutcome run_replication(const Scenario& scenario, const TestConfig& config, const BenchOptions& options,
                                   std::size_t rep) {
  const RngStream data_rng(config.seed, derive_stream_id({kDataDomain, options.table_id, options.cell, rep}));
  const SamplePair data = draw_samples(scenario, data_rng);

  TestConfig inner = config;
  inner.seed = derive_stream_id({kTestDomain, config.seed, options.table_id, options.cell, rep});

  ReplicationOutcome out;
  out.bayes = run_test(data.x, data.y, inner);
  KsOptions ks;
  ks.permutations = options.permutations;
  ks.seed = config.seed;
  ks.stream_id = derive_stream_id({kPermutationDomain, options.table_id, options.cell, rep});
  out.ks = classical_ks_test(data.x, data.y, ks);
  out.wilcoxon = wilcoxon_test(data.x, data.y);
  return out;
}

double binomial_se(double p, std::size_t trials) {
  return std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
}

PowerResult estimate_power(const Scenario& scenario, std::size_t replications, const TestConfig& config,
                           const BenchOptions& options) {
  if (replications < 1) throw std::invalid_argument("estimate_power: replications must be >= 1");
  scenario.validate();
  config.validate();
  // Validates the threshold mode against the sizes before any simulation.
  if (config.threshold.mode == ThresholdMode::Table &&
      (scenario.m1 > ThresholdTable::kMaxSize || scenario.m2 > ThresholdTable::kMaxSize)) {
    throw std::invalid_argument("threshold table covers sample sizes up to 20; use formula or simulate");
  }

  const TestConfig inner = single_threaded(config);
  const auto rejections = parallel_map<std::array<bool, 3>>(replications, config.threads, [&](std::size_t rep) {
    const ReplicationOutcome o = run_replication(scenario, inner, options, rep);
    return std::array<bool, 3>{o.bayes.reject, o.ks.p_value <= options.alpha, o.wilcoxon.p_value <= options.alpha};
  });

  std::array<std::size_t, 3> counts{};
  for (const auto& r : rejections) {
    for (int k = 0; k < 3; ++k) counts[k] += r[k] ? 1 : 0;
  }
  PowerResult out;
  out.scenario = scenario;
  out.replications = replications;
  const auto reps = static_cast<double>(replications);
  out.power_bayes = static_cast<double>(counts[0]) / reps;
  out.power_ks = static_cast<double>(counts[1]) / reps;
  out.power_wilcoxon = static_cast<double>(counts[2]) / reps;
  out.se_bayes = binomial_se(out.power_bayes, replications);
  out.se_ks = binomial_se(out.power_ks, replications);
  out.se_wilcoxon = binomial_se(out.power_wilcoxon, replications);
  return out;
}

TableId parse_table_id(std::string_view text) {
  if (text.size() >= 2 && (text[0] == 'T' || text[0] == 't')) {
    const std::string digits(text.substr(1));
    if (digits.find_first_not_of("0123456789") == std::string::npos && digits.size() <= 2) {
      const int k = std::stoi(digits);
      if (k >= 1 && k <= 10) return static_cast<TableId>(k);
    }
  }
  throw std::invalid_argument("table id must be T1..T10");
}

std::string to_string(TableId id) { return "T" + std::to_string(static_cast<int>(id)); }

const std::vector<std::size_t>& table_sizes() {
  static const std::vector<std::size_t> sizes = {5, 10, 15, 20, 30, 50, 100, 200};
  return sizes;
}

namespace {

void add_single_run(TableResult& table, const Scenario& s, const TestConfig& config, const BenchOptions& options,
                    std::string_view suffix = "") {
  const RngStream data_rng(config.seed, derive_stream_id({kDataDomain, options.table_id, options.cell, 0}));
  const SamplePair data = draw_samples(s, data_rng);
  TestConfig inner = config;
  inner.seed = derive_stream_id({kTestDomain, config.seed, options.table_id, options.cell, 0});

  const TestReport report = run_test(data.x, data.y, inner);
  const std::string tag(suffix);
  table.rows.push_back({s.name, s.m1, s.m2, "mean_d" + tag, report.mean_d, report.mean_d_se});
  table.rows.push_back({s.name, s.m1, s.m2, "U" + tag, report.threshold, std::nullopt});
  table.rows.push_back({s.name, s.m1, s.m2, "reject" + tag, report.reject ? 1.0 : 0.0, std::nullopt});
  if (!suffix.empty()) return;

  KsOptions ks;
  ks.permutations = options.permutations;
  ks.seed = config.seed;
  ks.stream_id = derive_stream_id({kPermutationDomain, options.table_id, options.cell, 0});
  const ComparatorResult k = classical_ks_test(data.x, data.y, ks);
  const ComparatorResult w = wilcoxon_test(data.x, data.y);
  table.rows.push_back({s.name, s.m1, s.m2, "ks_p", k.p_value, binomial_se(k.p_value, options.permutations)});
  table.rows.push_back({s.name, s.m1, s.m2, "wilcoxon_p", w.p_value, std::nullopt});
}

}  // namespace

TableResult reproduce_table(TableId id, const TestConfig& config, std::size_t replications,
                            std::size_t permutations) {
  config.validate();
  TableResult table;
  table.id = id;
  table.replications = replications;
  BenchOptions options;
  options.table_id = static_cast<std::uint64_t>(id);
  options.permutations = permutations;

  switch (id) {
    case TableId::T1:
      for (int c = 1; c <= 8; ++c) {
        options.cell = static_cast<std::uint64_t>(c);
        add_single_run(table, example_scenario(c, 100), config, options);
      }
      break;
    case TableId::T2:
    case TableId::T3: {
      const int c = id == TableId::T2 ? 1 : 2;
      for (std::size_t m : table_sizes()) {
        options.cell = m;
        add_single_run(table, example_scenario(c, m), config, options);
      }
      break;
    }
    case TableId::T4:
    case TableId::T5:
    case TableId::T6:
    case TableId::T7:
    case TableId::T8: {
      const int c = static_cast<int>(id) - 3;
      for (std::size_t m : table_sizes()) {
        options.cell = m;
        const PowerResult p = estimate_power(power_scenario(c, m), replications, config, options);
        const auto& s = p.scenario;
        table.rows.push_back({s.name, m, m, "power_bayes", p.power_bayes, p.se_bayes});
        table.rows.push_back({s.name, m, m, "power_ks", p.power_ks, p.se_ks});
        table.rows.push_back({s.name, m, m, "power_wilcoxon", p.power_wilcoxon, p.se_wilcoxon});
      }
      break;
    }
    case TableId::T9: {
      TestConfig normal = config;
      normal.base = BaseMeasure::normal(0.0, 1.0);
      normal.a = 1.0;
      TestConfig uniform = normal;
      uniform.base = BaseMeasure::uniform(0.0, 1.0);
      TestConfig diffuse = normal;
      diffuse.a = 50.0;
      for (int c = 1; c <= 8; ++c) {
        options.cell = static_cast<std::uint64_t>(c);
        const Scenario s = example_scenario(c, 100);
        add_single_run(table, s, normal, options, "_normal_a1");
        add_single_run(table, s, uniform, options, "_uniform_a1");
        add_single_run(table, s, diffuse, options, "_normal_a50");
      }
      break;
    }
    case TableId::T10: {
      if (config.r < 40 || config.tail * static_cast<double>(config.r) < 1.0 - 1e-9) {
        throw std::invalid_argument("threshold simulation needs r >= 40 and r * tail >= 1");
      }
      for (std::size_t m2 = 1; m2 <= ThresholdTable::kMaxSize; ++m2) {
        for (std::size_t m1 = 1; m1 <= m2; ++m1) {
          TestConfig cell = config;
          cell.seed = derive_stream_id({config.seed, options.table_id, m2, m1});
          const std::vector<double> d0 = prior_distances(m1, m2, cell);
          table.rows.push_back({"prior", m1, m2, "U", trimmed_upper_bound(d0, cell.tail),
                                trimmed_upper_bound_se(d0, cell.tail)});
        }
      }
      break;
    }
  }
  return table;
}

void write_table_csv(std::ostream& out, const TableResult& table) {
  const auto old_precision = out.precision(17);
  out << "table,scenario,m1,m2,metric,estimate,se\n";
  const std::string id = to_string(table.id);
  for (const auto& row : table.rows) {
    out << id << ',' << row.scenario << ',' << row.m1 << ',' << row.m2 << ',' << row.metric << ',' << row.estimate
        << ',';
    if (row.se) out << *row.se;
    out << '\n';
  }
  out.precision(old_precision);
}

}  // namespace dp2s
