#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "dp2s/base_measure.hpp"
#include "dp2s/comparators.hpp"
#include "dp2s/rng.hpp"
#include "dp2s/two_sample_test.hpp"

namespace dp2s {

struct Scenario {
  std::string name;
  BaseMeasure dist_x;
  BaseMeasure dist_y;
  std::size_t m1 = 0;
  std::size_t m2 = 0;

  /// Throws std::invalid_argument on a zero size.
  void validate() const;
};

/// Example cases 1..8 (N(0,1) against N(1,1), N(0,2), a normal mixture, t3,
/// t0.5, and the log-normal pair). Throws std::out_of_range otherwise.
Scenario example_scenario(int index, std::size_t m);

/// Power-study cases 1..5: N(1,1), N(0,2), 0.5N(-2,1)+0.5N(2,1), t0.5
/// against N(0,1), and Exponential(2) against Exponential(1).
Scenario power_scenario(int index, std::size_t m);

/// "example<k>" or "power<k>".
Scenario named_scenario(std::string_view name, std::size_t m1, std::size_t m2);

struct SamplePair {
  std::vector<double> x;
  std::vector<double> y;
};

/// x from lane 0 and y from lane 1 of `rng`.
SamplePair draw_samples(const Scenario& scenario, const RngStream& rng);

struct BenchOptions {
  std::uint64_t table_id = 0;  ///< part of every stream id
  std::uint64_t cell = 0;      ///< part of every stream id
  std::size_t permutations = 1000;
  double alpha = 0.05;
};

struct ReplicationOutcome {
  TestReport bayes;
  ComparatorResult ks;
  ComparatorResult wilcoxon;
};

/// Fresh data for replication `rep` of a cell, then the Bayesian test and both
/// comparators. Streams depend on (config.seed, table_id, cell, rep) only.
ReplicationOutcome run_replication(const Scenario& scenario, const TestConfig& config, const BenchOptions& options,
                                   std::size_t rep);

struct PowerResult {
  Scenario scenario;
  std::size_t replications = 0;
  double power_bayes = 0.0;
  double power_ks = 0.0;
  double power_wilcoxon = 0.0;
  double se_bayes = 0.0;  ///< sqrt(p (1 - p) / replications)
  double se_ks = 0.0;
  double se_wilcoxon = 0.0;
};

double binomial_se(double p, std::size_t trials);

/// Rejection rates over `replications` fresh data draws; replications run in
/// parallel over config.threads workers, each test single-threaded.
PowerResult estimate_power(const Scenario& scenario, std::size_t replications, const TestConfig& config,
                           const BenchOptions& options = {});

enum class TableId { T1 = 1, T2, T3, T4, T5, T6, T7, T8, T9, T10 };

TableId parse_table_id(std::string_view text);
std::string to_string(TableId id);

struct TableRow {
  std::string scenario;
  std::size_t m1 = 0;
  std::size_t m2 = 0;
  std::string metric;
  double estimate = 0.0;
  std::optional<double> se;  ///< empty for values that are not Monte Carlo estimates
};

struct TableResult {
  TableId id = TableId::T1;
  std::size_t replications = 0;
  std::vector<TableRow> rows;
};

/// Sample sizes of the size-indexed tables.
const std::vector<std::size_t>& table_sizes();

/// Regenerates one table. T1 runs the example cases at m = 100 on one data
/// draw each; T2 and T3 run example cases 1 and 2 over table_sizes(); T4-T8
/// estimate power for power cases 1-5 over table_sizes(); T9 repeats T1 under
/// H = N(0,1), a = 1, H = U[0,1], a = 1 and H = N(0,1), a = 50; T10 simulates
/// U for 1 <= m2 <= m1 <= 20. The base measure and a of `config` are used
/// except where T9 overrides them.
TableResult reproduce_table(TableId id, const TestConfig& config, std::size_t replications,
                            std::size_t permutations = 1000);

/// Header "table,scenario,m1,m2,metric,estimate,se"; 17 significant digits.
void write_table_csv(std::ostream& out, const TableResult& table);

}  // namespace dp2s
