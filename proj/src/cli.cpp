#include "pcaqs/cli.hpp"

#include "pcaqs/csv.hpp"
#include "pcaqs/matrixcore.hpp"
#include "pcaqs/version.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdio>
#include <filesystem>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>

namespace pcaqs {

namespace {

using nlohmann::json;

std::string joined_path(const std::string& dir, const std::string& name) {
  if (dir.empty() || dir == ".") return name;
  return (std::filesystem::path(dir) / name).string();
}

void ensure_dir(const std::string& dir) {
  if (dir.empty() || dir == ".") return;
  std::filesystem::create_directories(dir);
}

json similarity_to_json(const SimilarityReport& sim, bool standardized, Index subset_rows,
                        Index source_rows, Index cols) {
  return json{{"energy", sim.energy},
              {"mahalanobis", sim.mahalanobis},
              {"kl", sim.kl},
              {"mmd", sim.mmd},
              {"pair_cap", sim.pair_cap},
              {"bandwidth", sim.bandwidth},
              {"kl_rank", sim.kl_rank},
              {"mahalanobis_ridge", sim.mahalanobis_ridge},
              {"kl_ridge", sim.kl_ridge},
              {"seed", sim.seed},
              {"standardized", standardized},
              {"rows", {{"subset", subset_rows}, {"source", source_rows}}},
              {"cols", cols}};
}

std::string dumped(const json& j) { return j.dump(2) + "\n"; }

}  // namespace

int cmd_sample(const SampleOptions& options) {
  const CsvTable table = ingest_csv(options.input, true, true);
  const RetentiveSubset subset = draw_sample(options.spec, table.values, options.seed);

  ensure_dir(options.output_dir);

  std::string csv = table.header_line + "\n";
  for (const Index row : subset.indices) {
    csv += table.row_lines[static_cast<std::size_t>(row)];
    csv += '\n';
  }
  const std::string subset_path = joined_path(options.output_dir, "subset.csv");
  write_file_atomic(subset_path, csv);

  json manifest{{"version", kVersion},
                {"input", options.input},
                {"method", subset.method},
                {"seed", subset.seed},
                {"rate", subset.retention_rate},
                {"input_rows", table.values.rows()},
                {"subset_rows", static_cast<Index>(subset.indices.size())},
                {"indices", subset.indices}};
  if (subset.pca_rank.has_value()) {
    manifest["pca_rank"] = *subset.pca_rank;
    manifest["num_groups"] = options.spec.num_groups;
  }
  if (subset.group_counts.has_value()) {
    json counts = json::object();
    for (const auto& [key, count] : *subset.group_counts) counts[key.str()] = count;
    manifest["group_counts"] = std::move(counts);
  }
  if (subset.weights.has_value()) {
    manifest["weights"] = std::vector<double>(
        subset.weights->data(), subset.weights->data() + subset.weights->size());
  }
  write_file_atomic(joined_path(options.output_dir, "manifest.json"), dumped(manifest));

  if (options.report) {
    const Matrix source = with_response_column(table);
    const Matrix chosen = select_rows(source, subset.indices);
    SimilarityReport sim;
    if (options.standardize) {
      const auto [source_std, params] = standardize(source);
      sim = compute_similarity(params.apply(chosen), source_std, options.metrics);
    } else {
      sim = compute_similarity(chosen, source, options.metrics);
    }
    const json report = similarity_to_json(sim, options.standardize, chosen.rows(),
                                           source.rows(), source.cols());
    write_file_atomic(joined_path(options.output_dir, "similarity.json"), dumped(report));
  }

  std::printf("%s: retained %zu of %lld rows (rate %s) -> %s\n", subset.method.c_str(),
              subset.indices.size(), static_cast<long long>(table.values.rows()),
              format_double(subset.retention_rate).c_str(), subset_path.c_str());
  return 0;
}

int cmd_metrics(const MetricsOptions& options) {
  const CsvTable first = ingest_csv(options.input, false, false);
  const CsvTable second = ingest_csv(options.input2, false, false);

  auto unique_names = [](const CsvTable& table, const std::string& path) {
    std::set<std::string> seen;
    for (const std::string& name : table.column_names) {
      if (!seen.insert(name).second) {
        throw std::runtime_error(path + ": duplicate column '" + name +
                                 "', cannot align by name");
      }
    }
    return seen;
  };
  const std::set<std::string> names_a = unique_names(first, options.input);
  const std::set<std::string> names_b = unique_names(second, options.input2);

  if (names_a != names_b) {
    auto list_missing = [](const std::set<std::string>& have,
                           const std::set<std::string>& other) {
      std::string out;
      for (const std::string& name : have) {
        if (other.count(name)) continue;
        if (!out.empty()) out += ", ";
        out += name;
      }
      return out.empty() ? std::string("-") : out;
    };
    throw std::runtime_error("column sets differ; only in " + options.input + ": [" +
                             list_missing(names_a, names_b) + "]; only in " + options.input2 +
                             ": [" + list_missing(names_b, names_a) + "]");
  }

  // reorder the second file's columns to the first file's layout
  std::unordered_map<std::string, Index> position;
  for (std::size_t j = 0; j < second.column_names.size(); ++j) {
    position[second.column_names[j]] = static_cast<Index>(j);
  }
  Matrix source(second.values.rows(), second.values.cols());
  for (std::size_t j = 0; j < first.column_names.size(); ++j) {
    source.col(static_cast<Index>(j)) = second.values.col(position[first.column_names[j]]);
  }

  SimilarityReport sim;
  if (options.standardize) {
    const auto [source_std, params] = standardize(source);
    sim = compute_similarity(params.apply(first.values), source_std, options.metrics);
  } else {
    sim = compute_similarity(first.values, source, options.metrics);
  }

  const json report = similarity_to_json(sim, options.standardize, first.values.rows(),
                                         source.rows(), source.cols());
  const std::string text = dumped(report);
  if (!options.output_dir.empty()) {
    ensure_dir(options.output_dir);
    write_file_atomic(joined_path(options.output_dir, "similarity.json"), text);
  }
  std::fputs(text.c_str(), stdout);
  return 0;
}

int cmd_bench(const BenchOptions& options) {
  const AggregateReport report = run_experiment(options.config);
  const std::string table = format_table(report);

  ensure_dir(options.output_dir);
  const std::string stem = report.experiment;
  write_file_atomic(joined_path(options.output_dir, stem + "_report.json"),
                    dumped(report_to_json(report, true)));
  write_file_atomic(joined_path(options.output_dir, stem + "_table.txt"), table);
  write_file_atomic(joined_path(options.output_dir, stem + "_plot.csv"), plot_csv(report));

  std::fputs(table.c_str(), stdout);
  return 0;
}

int cmd_generate(const GenerateOptions& options) {
  const SyntheticDataset data = make_dataset(options.generator, options.seed);
  const Index n = data.x.rows();
  const Index p = data.x.cols();

  std::string csv;
  csv.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(p + 2) * 10);
  for (Index j = 0; j < p; ++j) {
    csv += "x" + std::to_string(j + 1) + ",";
  }
  if (data.component_labels.has_value()) csv += "label,";
  csv += "y\n";
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < p; ++j) {
      csv += format_double(data.x(i, j));
      csv += ',';
    }
    if (data.component_labels.has_value()) {
      csv += std::to_string((*data.component_labels)[static_cast<std::size_t>(i)]);
      csv += ',';
    }
    csv += format_double(data.y(i));
    csv += '\n';
  }

  ensure_dir(options.output_dir);
  const std::string path = joined_path(options.output_dir, "dataset.csv");
  write_file_atomic(path, csv);
  std::printf("%s: wrote %lld rows x %lld columns -> %s\n", data.generator.c_str(),
              static_cast<long long>(n), static_cast<long long>(p), path.c_str());
  return 0;
}

namespace {

void add_metric_options(CLI::App* cmd, MetricParams& metrics, double& bandwidth,
                        bool& bandwidth_set) {
  cmd->add_option("--pair-cap", metrics.pair_cap,
                  "max pairs per distance term before seeded pair sampling");
  auto* bw = cmd->add_option("--bandwidth", bandwidth,
                             "RBF kernel bandwidth (default: median heuristic)");
  bw->each([&bandwidth_set](const std::string&) { bandwidth_set = true; });
  cmd->add_option("--kl-rank", metrics.kl_rank,
                  "projection rank for the Gaussian KL term");
  cmd->add_option("--metric-ridge", metrics.ridge,
                  "covariance ridge for the Mahalanobis and KL terms");
  cmd->add_option("--metric-seed", metrics.seed, "seed for sampled pairs and bandwidth");
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"data reduction toolkit: representative sampling, distribution metrics, "
               "replicated benchmarks"};
  app.set_version_flag("--version", std::string("pcaqs ") + kVersion);
  app.require_subcommand(1);

  // ---------------- sample ----------------
  SampleOptions sopt;
  Index sample_pcs = 0;
  double sample_var = 0.70;
  std::string sample_criterion;
  double sample_bandwidth = 0.0;
  bool sample_bandwidth_set = false;
  auto* sample = app.add_subcommand("sample", "draw a retentive subset from a CSV");
  sample->add_option("input", sopt.input, "source CSV (header row required)")->required();
  sample->add_option("-o,--output-dir", sopt.output_dir, "output directory (default: .)");
  sample->add_option("-m,--method", sopt.spec.method,
                     "pcaqs-random|pcaqs-aopt|pcaqs-dopt|pcaqs-gopt|pcaqs-uncert|"
                     "srs|leverage|coreset");
  sample->add_option("-r,--rate", sopt.spec.rate, "retention rate in (0, 1]");
  sample->add_option("-g,--groups", sopt.spec.num_groups,
                     "quantile groups per principal component");
  auto* pcs_opt = sample->add_option("--pcs", sample_pcs,
                                     "fixed number of stratification components");
  auto* var_opt = sample->add_option(
      "--var-threshold", sample_var,
      "explained-variance target for the dynamic component count");
  auto* crit_opt = sample->add_option(
      "--criterion", sample_criterion,
      "within-group selector: random|a_optimal|d_optimal|g_optimal|uncertainty");
  sample->add_option("--ridge-eps", sopt.spec.ridge_eps,
                     "information-matrix ridge for the optimal-design selectors");
  sample->add_option("--leverage-rank", sopt.spec.leverage_rank,
                     "singular rank for leverage scores (0 = automatic)");
  sample->add_option("-s,--seed", sopt.seed, "RNG seed");
  sample->add_flag("--report", sopt.report, "also write similarity.json vs. the source");
  sample->add_flag("--standardize", sopt.standardize,
                   "standardize (fit on the source) before the report metrics");
  add_metric_options(sample, sopt.metrics, sample_bandwidth, sample_bandwidth_set);

  // ---------------- metrics ----------------
  MetricsOptions mopt;
  double metrics_bandwidth = 0.0;
  bool metrics_bandwidth_set = false;
  auto* metrics = app.add_subcommand("metrics", "distributional similarity of two CSVs");
  metrics->add_option("input", mopt.input, "subset CSV")->required();
  metrics->add_option("input2", mopt.input2, "source CSV (reference distribution)")
      ->required();
  metrics->add_option("-o,--output-dir", mopt.output_dir,
                      "also write similarity.json here");
  metrics->add_flag("--standardize", mopt.standardize,
                    "standardize both sets by the source fit");
  add_metric_options(metrics, mopt.metrics, metrics_bandwidth, metrics_bandwidth_set);

  // ---------------- bench ----------------
  std::string bench_experiment;
  std::string bench_config_path;
  std::string bench_output_dir;
  std::string bench_input;
  std::vector<std::string> bench_methods;
  std::string bench_criterion;
  int bench_reps = 0;
  RngSeed bench_seed = 0;
  double bench_rate = 0.0;
  int bench_groups = 0;
  int bench_threads = 0;
  Index bench_pcs = 0;
  double bench_var = 0.0;
  auto* bench = app.add_subcommand(
      "bench", "replicated experiment: compare|linear|adaptive|cluster|similarity");
  auto* bexp_opt = bench->add_option("experiment", bench_experiment, "experiment name");
  auto* bcfg_opt = bench->add_option("-c,--config", bench_config_path,
                                     "JSON config overriding the experiment defaults");
  bench->add_option("-o,--output-dir", bench_output_dir, "output directory (default: .)");
  auto* bin_opt = bench->add_option("--input", bench_input, "source CSV (similarity)");
  auto* bm_opt = bench->add_option("--method", bench_methods,
                                   "sampling method (repeatable, overrides the defaults)");
  auto* bcrit_opt = bench->add_option("--criterion", bench_criterion,
                                      "within-group selector for pcaqs methods");
  auto* brep_opt = bench->add_option("--reps", bench_reps, "replication count");
  auto* bseed_opt = bench->add_option("-s,--seed", bench_seed, "master seed");
  auto* brate_opt = bench->add_option("-r,--rate", bench_rate, "retention rate");
  auto* bgroups_opt = bench->add_option("-g,--groups", bench_groups,
                                        "quantile groups per component");
  auto* bthreads_opt = bench->add_option("--threads", bench_threads,
                                         "replication workers (0 = hardware threads)");
  auto* bpcs_opt = bench->add_option("--pcs", bench_pcs, "fixed component count");
  auto* bvar_opt = bench->add_option("--var-threshold", bench_var,
                                     "explained-variance target");

  // ---------------- generate ----------------
  GenerateOptions gopt;
  double gen_noise = -1.0;
  auto* generate = app.add_subcommand("generate", "export a synthetic dataset to CSV");
  generate->add_option("--generator", gopt.generator.kind, "mixture|equicorr");
  generate->add_option("--rows", gopt.generator.rows, "observations");
  generate->add_option("--cols", gopt.generator.cols, "features");
  generate->add_option("--components", gopt.generator.components,
                       "mixture component count");
  generate->add_option("--mean-scale", gopt.generator.mean_scale,
                       "spread of the mixture component means");
  auto* gnoise_opt = generate->add_option("--noise-sigma", gen_noise,
                                          "response noise standard deviation");
  generate->add_option("--rho", gopt.generator.rho, "equi-correlation in [0, 1)");
  generate->add_option("--beta-sigma", gopt.generator.beta_sigma,
                       "coefficient scale of the equicorr response");
  generate->add_option("-s,--seed", gopt.seed, "RNG seed");
  generate->add_option("-o,--output-dir", gopt.output_dir, "output directory (default: .)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (sample->parsed()) {
      if (pcs_opt->count() > 0) {
        sopt.spec.rank = RankChoice::fixed(sample_pcs);
      } else if (var_opt->count() > 0) {
        sopt.spec.rank = RankChoice::by_variance(sample_var);
      }
      if (crit_opt->count() > 0) {
        if (sopt.spec.method.rfind("pcaqs", 0) != 0) {
          throw std::invalid_argument(
              "--criterion applies only to the pcaqs-* methods");
        }
        sopt.spec.method = pcaqs_method_tag(selector_from_string(sample_criterion));
      }
      if (sample_bandwidth_set) sopt.metrics.bandwidth = sample_bandwidth;
      return cmd_sample(sopt);
    }
    if (metrics->parsed()) {
      if (metrics_bandwidth_set) mopt.metrics.bandwidth = metrics_bandwidth;
      return cmd_metrics(mopt);
    }
    if (bench->parsed()) {
      json override_json = json::object();
      if (bcfg_opt->count() > 0) {
        override_json = json::parse(read_file(bench_config_path));
      }
      std::string experiment = bench_experiment;
      if (bexp_opt->count() == 0) {
        if (override_json.contains("experiment")) {
          experiment = override_json.at("experiment").get<std::string>();
        } else {
          throw std::invalid_argument(
              "bench: name an experiment (argument or config \"experiment\" key)");
        }
      }
      ExperimentConfig cfg = config_from_json(override_json, default_config(experiment));
      cfg.experiment = experiment;
      if (bin_opt->count() > 0) cfg.input_path = bench_input;
      if (bm_opt->count() > 0) cfg.methods = bench_methods;
      if (bcrit_opt->count() > 0) {
        cfg.criterion.kind = selector_from_string(bench_criterion);
      }
      if (brep_opt->count() > 0) cfg.replications = bench_reps;
      if (bseed_opt->count() > 0) cfg.seed = bench_seed;
      if (brate_opt->count() > 0) cfg.rate = bench_rate;
      if (bgroups_opt->count() > 0) cfg.num_groups = bench_groups;
      if (bthreads_opt->count() > 0) cfg.threads = bench_threads;
      if (bpcs_opt->count() > 0) {
        cfg.rank = RankChoice::fixed(bench_pcs);
      } else if (bvar_opt->count() > 0) {
        cfg.rank = RankChoice::by_variance(bench_var);
      }
      BenchOptions bopt;
      bopt.config = std::move(cfg);
      bopt.output_dir = bench_output_dir;
      return cmd_bench(bopt);
    }
    if (generate->parsed()) {
      if (gnoise_opt->count() > 0) {
        if (gopt.generator.kind == "equicorr") {
          gopt.generator.linear_noise_sigma = gen_noise;
        } else {
          gopt.generator.mixture_noise_sigma = gen_noise;
        }
      }
      return cmd_generate(gopt);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}

}  // namespace pcaqs
