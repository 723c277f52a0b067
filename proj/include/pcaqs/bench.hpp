#pragma once

#include "pcaqs/metrics.hpp"
#include "pcaqs/samplers.hpp"
#include "pcaqs/synthgen.hpp"

#include "json.hpp"

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace pcaqs {

struct GeneratorConfig {
  std::string kind = "mixture";  // mixture | equicorr
  Index rows = 10000;
  Index cols = 50;
  int components = 5;
  double mean_scale = 5.0;
  double mixture_noise_sigma = 1.0;
  double rho = 0.2;
  double beta_sigma = 0.1;
  double linear_noise_sigma = 0.5;
};

SyntheticDataset make_dataset(const GeneratorConfig& generator, RngSeed seed);

struct ExperimentConfig {
  std::string experiment = "compare";  // compare|linear|adaptive|cluster|similarity
  GeneratorConfig generator;
  std::string input_path;  // similarity source CSV
  std::vector<std::string> methods = {"pcaqs-random", "srs", "leverage", "coreset"};
  double rate = 0.1;
  int num_groups = 5;
  RankChoice rank = RankChoice::by_variance(0.70);
  SelectorCriterion criterion{SelectorKind::a_optimal, 1e-6};
  int replications = 100;
  RngSeed seed = 42;
  MetricParams metrics;
  std::vector<Index> fixed_ranks = {2, 5, 10};  // linear-study PC arms
  double holdout_fraction = 0.2;                // linear-study evaluation split
  int cluster_k = 7;
  KMeansParams cluster_kmeans{10, 300, 1e-4};
  Index silhouette_cap = 2000;
  int threads = 0;  // replication workers; 0 = one per hardware thread
};

/// Baseline configuration for a named experiment (generator and retention
/// defaults sized for desk-scale runs).
ExperimentConfig default_config(const std::string& experiment);

/// `base` with every key present in `j` overridden.
ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig base);
nlohmann::json config_to_json(const ExperimentConfig& cfg);

struct CellStats {
  double mean = 0.0;
  double sd = 0.0;  // n - 1 denominator; 0 for a single value
  double min = 0.0;
  double max = 0.0;
  std::vector<double> raw;  // one value per replication
};

/// A rows x columns grid of replicated measurements. Depending on the
/// experiment the columns are methods (compare), arms (linear, adaptive) or a
/// single series (cluster); for similarity the methods sit on the rows.
struct AggregateReport {
  std::string experiment;
  int replications = 0;
  RngSeed seed = 0;
  std::vector<std::string> rows;
  std::vector<std::string> cols;
  bool methods_on_rows = false;
  std::map<std::pair<std::string, std::string>, CellStats> cells;  // (row, col)
  std::vector<std::string> timing_rows;  // rows holding measured time
  nlohmann::json summary;                // experiment-specific extras
  nlohmann::json config;                 // configuration echo
};

const CellStats& report_cell(const AggregateReport& report, const std::string& row,
                             const std::string& col);

AggregateReport run_comparison(const ExperimentConfig& cfg);
AggregateReport run_linear(const ExperimentConfig& cfg);
AggregateReport run_adaptive(const ExperimentConfig& cfg);
AggregateReport run_cluster(const ExperimentConfig& cfg);
AggregateReport run_similarity(const ExperimentConfig& cfg);
AggregateReport run_experiment(const ExperimentConfig& cfg);

/// Aligned fixed-width text table, one grid row per line: "mean (sd)".
std::string format_table(const AggregateReport& report);

/// Full machine-readable report with raw per-replication arrays. With
/// include_timing = false the rows listed in timing_rows are omitted, leaving
/// only seed-determined content.
nlohmann::json report_to_json(const AggregateReport& report, bool include_timing = true);

/// Long-format CSV (experiment, method, metric, replication, value) of the
/// seed-determined cells; timing rows are excluded.
std::string plot_csv(const AggregateReport& report);

}  // namespace pcaqs
