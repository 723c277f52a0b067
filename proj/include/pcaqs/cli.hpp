#pragma once

#include "pcaqs/bench.hpp"
#include "pcaqs/metrics.hpp"
#include "pcaqs/samplers.hpp"

#include <optional>
#include <string>

namespace pcaqs {

struct SampleOptions {
  std::string input;
  std::string output_dir;
  SampleSpec spec;
  RngSeed seed = 42;
  bool report = false;       // also write a similarity report vs. the source
  bool standardize = false;  // standardize (by the source fit) before metrics
  MetricParams metrics;
};

struct MetricsOptions {
  std::string input;   // subset / first set
  std::string input2;  // source / reference set
  std::string output_dir;
  bool standardize = false;
  MetricParams metrics;
};

struct BenchOptions {
  ExperimentConfig config;
  std::string output_dir;
};

struct GenerateOptions {
  GeneratorConfig generator;
  RngSeed seed = 42;
  std::string output_dir;
};

/// Writes subset.csv (original header and rows, byte-for-byte) and
/// manifest.json; with `report`, also similarity.json.
int cmd_sample(const SampleOptions& options);

/// Compares two CSVs column-set-aligned; writes and prints similarity.json.
int cmd_metrics(const MetricsOptions& options);

/// Runs one experiment; writes <experiment>_report.json, _table.txt, _plot.csv.
int cmd_bench(const BenchOptions& options);

/// Exports a synthetic dataset to dataset.csv (features, optional label, y).
int cmd_generate(const GenerateOptions& options);

/// Full argv interface; returns the process exit code.
int run_cli(int argc, const char* const* argv);

}  // namespace pcaqs
