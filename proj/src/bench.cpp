#include "pcaqs/bench.hpp"

#include "pcaqs/cluster.hpp"
#include "pcaqs/csv.hpp"
#include "pcaqs/matrixcore.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <exception>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <utility>

namespace pcaqs {

namespace {

using nlohmann::json;

constexpr const char* kMseRow = "MSE";
constexpr const char* kTimeRow = "Execution Time (s)";
constexpr const char* kEnergyCol = "Energy Dist.";
constexpr const char* kMahalanobisCol = "Mahalanobis Dist.";
constexpr const char* kKlCol = "KL Div.";
constexpr const char* kMmdCol = "MMD";

double wall_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

// CPU time of the calling thread; immune to other replication workers.
double thread_cpu_seconds() {
  timespec ts{};
  if (clock_gettime(CLOCK_THREAD_CPUTIME_ID, &ts) != 0) return wall_seconds();
  return static_cast<double>(ts.tv_sec) + 1e-9 * static_cast<double>(ts.tv_nsec);
}

// Runs body(0..reps-1) on a small worker pool. Each replication writes only
// its preassigned slots, so the aggregate is identical at any worker count.
void parallel_reps(int reps, int threads, const std::function<void(int)>& body) {
  if (threads <= 0) {
    threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads < 1) threads = 1;
  }
  threads = std::min(threads, reps);
  if (threads <= 1) {
    for (int r = 0; r < reps; ++r) body(r);
    return;
  }

  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&]() {
    while (true) {
      const int r = next.fetch_add(1);
      if (r >= reps) return;
      try {
        body(r);
      } catch (...) {
        std::lock_guard<std::mutex> hold(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

CellStats make_stats(std::vector<double> raw) {
  CellStats stats;
  stats.raw = std::move(raw);
  const auto n = stats.raw.size();
  if (n == 0) return stats;
  double sum = 0.0;
  stats.min = stats.raw.front();
  stats.max = stats.raw.front();
  for (const double v : stats.raw) {
    sum += v;
    stats.min = std::min(stats.min, v);
    stats.max = std::max(stats.max, v);
  }
  stats.mean = sum / static_cast<double>(n);
  if (n > 1) {
    double ss = 0.0;
    for (const double v : stats.raw) ss += (v - stats.mean) * (v - stats.mean);
    stats.sd = std::sqrt(ss / static_cast<double>(n - 1));
  }
  return stats;
}

void set_cell(AggregateReport& report, const std::string& row, const std::string& col,
              std::vector<double> raw) {
  report.cells[{row, col}] = make_stats(std::move(raw));
}

SampleSpec spec_for(const ExperimentConfig& cfg, const std::string& method) {
  SampleSpec spec;
  spec.method = method;
  spec.rate = cfg.rate;
  spec.num_groups = cfg.num_groups;
  spec.rank = cfg.rank;
  spec.ridge_eps = cfg.criterion.ridge_eps;
  return spec;
}

Vector gather(const Vector& y, const IndexList& rows) {
  Vector out(static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out(static_cast<Index>(i)) = y(rows[i]);
  return out;
}

json stats_to_json(const CellStats& stats) {
  return json{{"mean", stats.mean},
              {"sd", stats.sd},
              {"min", stats.min},
              {"max", stats.max},
              {"raw", stats.raw}};
}

json summary_of(std::vector<double> raw) {
  const CellStats stats = make_stats(std::move(raw));
  return stats_to_json(stats);
}

void start_report(AggregateReport& report, const ExperimentConfig& cfg) {
  report.experiment = cfg.experiment;
  report.replications = cfg.replications;
  report.seed = cfg.seed;
  report.config = config_to_json(cfg);
}

void check_replications(const ExperimentConfig& cfg) {
  if (cfg.replications < 1) {
    throw std::invalid_argument("bench: replications must be positive");
  }
}

}  // namespace

SyntheticDataset make_dataset(const GeneratorConfig& generator, RngSeed seed) {
  if (generator.kind == "mixture") {
    return gaussian_mixture(generator.rows, generator.cols, generator.components,
                            generator.mean_scale, generator.mixture_noise_sigma, seed);
  }
  if (generator.kind == "equicorr") {
    return equicorr_linear(generator.rows, generator.cols, generator.rho,
                           generator.beta_sigma, generator.linear_noise_sigma, seed);
  }
  throw std::invalid_argument("make_dataset: unknown generator '" + generator.kind +
                              "' (expected mixture or equicorr)");
}

ExperimentConfig default_config(const std::string& experiment) {
  ExperimentConfig cfg;
  cfg.experiment = experiment;
  if (experiment == "compare") {
    return cfg;  // mixture 10000 x 50, four methods, 10% retention
  }
  if (experiment == "linear") {
    cfg.generator.kind = "equicorr";
    cfg.generator.cols = 500;
    return cfg;
  }
  if (experiment == "adaptive") {
    cfg.generator.kind = "equicorr";
    cfg.rate = 0.05;
    return cfg;
  }
  if (experiment == "cluster") {
    cfg.generator.rows = 20000;
    cfg.generator.cols = 10;
    cfg.generator.components = 7;
    cfg.rate = 0.2;
    cfg.cluster_k = 7;
    cfg.methods = {"pcaqs-random"};
    return cfg;
  }
  if (experiment == "similarity") {
    return cfg;  // source CSV supplied via input_path
  }
  throw std::invalid_argument("default_config: unknown experiment '" + experiment +
                              "' (expected compare, linear, adaptive, cluster, or similarity)");
}

ExperimentConfig config_from_json(const json& j, ExperimentConfig base) {
  ExperimentConfig cfg = std::move(base);
  if (j.contains("experiment")) cfg.experiment = j.at("experiment").get<std::string>();
  if (j.contains("generator")) {
    const json& g = j.at("generator");
    if (g.contains("kind")) cfg.generator.kind = g.at("kind").get<std::string>();
    if (g.contains("rows")) cfg.generator.rows = g.at("rows").get<Index>();
    if (g.contains("cols")) cfg.generator.cols = g.at("cols").get<Index>();
    if (g.contains("components")) cfg.generator.components = g.at("components").get<int>();
    if (g.contains("mean_scale")) cfg.generator.mean_scale = g.at("mean_scale").get<double>();
    if (g.contains("mixture_noise_sigma")) {
      cfg.generator.mixture_noise_sigma = g.at("mixture_noise_sigma").get<double>();
    }
    if (g.contains("rho")) cfg.generator.rho = g.at("rho").get<double>();
    if (g.contains("beta_sigma")) cfg.generator.beta_sigma = g.at("beta_sigma").get<double>();
    if (g.contains("linear_noise_sigma")) {
      cfg.generator.linear_noise_sigma = g.at("linear_noise_sigma").get<double>();
    }
  }
  if (j.contains("input")) cfg.input_path = j.at("input").get<std::string>();
  if (j.contains("methods")) cfg.methods = j.at("methods").get<std::vector<std::string>>();
  if (j.contains("rate")) cfg.rate = j.at("rate").get<double>();
  if (j.contains("num_groups")) cfg.num_groups = j.at("num_groups").get<int>();
  if (j.contains("rank")) {
    const json& r = j.at("rank");
    if (r.contains("dynamic")) cfg.rank.dynamic = r.at("dynamic").get<bool>();
    if (r.contains("count")) cfg.rank.count = r.at("count").get<Index>();
    if (r.contains("threshold")) cfg.rank.threshold = r.at("threshold").get<double>();
  }
  if (j.contains("criterion")) {
    const json& c = j.at("criterion");
    if (c.contains("kind")) {
      cfg.criterion.kind = selector_from_string(c.at("kind").get<std::string>());
    }
    if (c.contains("ridge_eps")) cfg.criterion.ridge_eps = c.at("ridge_eps").get<double>();
  }
  if (j.contains("replications")) cfg.replications = j.at("replications").get<int>();
  if (j.contains("seed")) cfg.seed = j.at("seed").get<RngSeed>();
  if (j.contains("metrics")) {
    const json& m = j.at("metrics");
    if (m.contains("pair_cap")) cfg.metrics.pair_cap = m.at("pair_cap").get<std::size_t>();
    if (m.contains("bandwidth")) {
      if (m.at("bandwidth").is_null()) {
        cfg.metrics.bandwidth.reset();
      } else {
        cfg.metrics.bandwidth = m.at("bandwidth").get<double>();
      }
    }
    if (m.contains("kl_rank")) cfg.metrics.kl_rank = m.at("kl_rank").get<Index>();
    if (m.contains("ridge")) cfg.metrics.ridge = m.at("ridge").get<double>();
  }
  if (j.contains("fixed_ranks")) cfg.fixed_ranks = j.at("fixed_ranks").get<std::vector<Index>>();
  if (j.contains("holdout_fraction")) cfg.holdout_fraction = j.at("holdout_fraction").get<double>();
  if (j.contains("cluster_k")) cfg.cluster_k = j.at("cluster_k").get<int>();
  if (j.contains("cluster_kmeans")) {
    const json& k = j.at("cluster_kmeans");
    if (k.contains("num_starts")) cfg.cluster_kmeans.num_starts = k.at("num_starts").get<int>();
    if (k.contains("max_iter")) cfg.cluster_kmeans.max_iter = k.at("max_iter").get<int>();
    if (k.contains("tol")) cfg.cluster_kmeans.tol = k.at("tol").get<double>();
  }
  if (j.contains("silhouette_cap")) cfg.silhouette_cap = j.at("silhouette_cap").get<Index>();
  if (j.contains("threads")) cfg.threads = j.at("threads").get<int>();
  return cfg;
}

json config_to_json(const ExperimentConfig& cfg) {
  json metrics{{"pair_cap", cfg.metrics.pair_cap},
               {"kl_rank", cfg.metrics.kl_rank},
               {"ridge", cfg.metrics.ridge}};
  metrics["bandwidth"] = cfg.metrics.bandwidth.has_value() ? json(*cfg.metrics.bandwidth)
                                                           : json(nullptr);
  return json{
      {"experiment", cfg.experiment},
      {"generator",
       {{"kind", cfg.generator.kind},
        {"rows", cfg.generator.rows},
        {"cols", cfg.generator.cols},
        {"components", cfg.generator.components},
        {"mean_scale", cfg.generator.mean_scale},
        {"mixture_noise_sigma", cfg.generator.mixture_noise_sigma},
        {"rho", cfg.generator.rho},
        {"beta_sigma", cfg.generator.beta_sigma},
        {"linear_noise_sigma", cfg.generator.linear_noise_sigma}}},
      {"input", cfg.input_path},
      {"methods", cfg.methods},
      {"rate", cfg.rate},
      {"num_groups", cfg.num_groups},
      {"rank",
       {{"dynamic", cfg.rank.dynamic},
        {"count", cfg.rank.count},
        {"threshold", cfg.rank.threshold}}},
      {"criterion",
       {{"kind", to_string(cfg.criterion.kind)}, {"ridge_eps", cfg.criterion.ridge_eps}}},
      {"replications", cfg.replications},
      {"seed", cfg.seed},
      {"metrics", metrics},
      {"fixed_ranks", cfg.fixed_ranks},
      {"holdout_fraction", cfg.holdout_fraction},
      {"cluster_k", cfg.cluster_k},
      {"cluster_kmeans",
       {{"num_starts", cfg.cluster_kmeans.num_starts},
        {"max_iter", cfg.cluster_kmeans.max_iter},
        {"tol", cfg.cluster_kmeans.tol}}},
      {"silhouette_cap", cfg.silhouette_cap},
      {"threads", cfg.threads}};
}

const CellStats& report_cell(const AggregateReport& report, const std::string& row,
                             const std::string& col) {
  const auto it = report.cells.find({row, col});
  if (it == report.cells.end()) {
    throw std::out_of_range("report_cell: no cell ('" + row + "', '" + col + "')");
  }
  return it->second;
}

AggregateReport run_comparison(const ExperimentConfig& cfg) {
  check_replications(cfg);
  if (cfg.methods.empty()) throw std::invalid_argument("compare: no methods configured");

  const int reps = cfg.replications;
  const auto num_methods = cfg.methods.size();
  // slot layout: [method][metric][rep]
  enum Slot { kMse, kTime, kEnergy, kMahal, kKl, kMmd, kSlotCount };
  std::vector<std::array<std::vector<double>, kSlotCount>> slots(num_methods);
  for (auto& per_method : slots) {
    for (auto& series : per_method) series.resize(static_cast<std::size_t>(reps));
  }
  std::vector<std::vector<double>> subset_rows(num_methods,
                                               std::vector<double>(static_cast<std::size_t>(reps)));

  parallel_reps(reps, cfg.threads, [&](int r) {
    const RngSeed rep_seed = derive_seed(cfg.seed, static_cast<RngSeed>(r));
    const SyntheticDataset data = make_dataset(cfg.generator, derive_seed(rep_seed, "gen"));

    for (std::size_t m = 0; m < num_methods; ++m) {
      const std::string& method = cfg.methods[m];
      const double t0 = wall_seconds();
      const RetentiveSubset subset =
          draw_sample(spec_for(cfg, method), data.x, derive_seed(rep_seed, "sample:" + method));
      const double elapsed = wall_seconds() - t0;

      const Matrix sub_x = select_rows(data.x, subset.indices);
      const Vector sub_y = gather(data.y, subset.indices);
      const OlsFit fit = ols_fit(sub_x, sub_y);

      MetricParams mp = cfg.metrics;
      mp.seed = derive_seed(rep_seed, "metrics:" + method);
      const SimilarityReport sim = compute_similarity(sub_x, data.x, mp);

      const auto rr = static_cast<std::size_t>(r);
      slots[m][kMse][rr] = mean_squared_error(fit, data.x, data.y);
      slots[m][kTime][rr] = elapsed;
      slots[m][kEnergy][rr] = sim.energy;
      slots[m][kMahal][rr] = sim.mahalanobis;
      slots[m][kKl][rr] = sim.kl;
      slots[m][kMmd][rr] = sim.mmd;
      subset_rows[m][rr] = static_cast<double>(subset.indices.size());
    }
  });

  AggregateReport report;
  start_report(report, cfg);
  report.rows = {kMseRow, kTimeRow, kEnergyCol, kMahalanobisCol, kKlCol, kMmdCol};
  report.cols = cfg.methods;
  report.timing_rows = {kTimeRow};
  const std::array<std::string, kSlotCount> row_of = {kMseRow,         kTimeRow, kEnergyCol,
                                                      kMahalanobisCol, kKlCol,   kMmdCol};
  for (std::size_t m = 0; m < num_methods; ++m) {
    for (int s = 0; s < kSlotCount; ++s) {
      set_cell(report, row_of[static_cast<std::size_t>(s)], cfg.methods[m],
               std::move(slots[m][static_cast<std::size_t>(s)]));
    }
  }
  report.summary["dataset"] = {{"rows", cfg.generator.rows}, {"cols", cfg.generator.cols}};
  for (std::size_t m = 0; m < num_methods; ++m) {
    report.summary["subset_rows"][cfg.methods[m]] = make_stats(std::move(subset_rows[m])).mean;
  }
  return report;
}

AggregateReport run_linear(const ExperimentConfig& cfg) {
  check_replications(cfg);
  if (!(cfg.holdout_fraction > 0.0 && cfg.holdout_fraction < 1.0)) {
    throw std::invalid_argument("linear: holdout fraction must lie in (0, 1)");
  }

  struct Arm {
    std::string label;
    std::string method;
    RankChoice rank;
  };
  std::vector<Arm> arms;
  for (const Index k : cfg.fixed_ranks) {
    arms.push_back({"PC" + std::to_string(k), "pcaqs-random", RankChoice::fixed(k)});
  }
  arms.push_back({"Dyn", "pcaqs-random", cfg.rank});
  arms.push_back({"Coreset", "coreset", cfg.rank});
  arms.push_back({"Leverage", "leverage", cfg.rank});

  const int reps = cfg.replications;
  enum Slot { kArmMse, kArmR2, kArmTime, kArmSlots };
  std::vector<std::array<std::vector<double>, kArmSlots>> slots(arms.size());
  for (auto& per_arm : slots) {
    for (auto& series : per_arm) series.resize(static_cast<std::size_t>(reps));
  }
  std::vector<double> dyn_rank(static_cast<std::size_t>(reps), 0.0);

  parallel_reps(reps, cfg.threads, [&](int r) {
    const RngSeed rep_seed = derive_seed(cfg.seed, static_cast<RngSeed>(r));
    const SyntheticDataset data = make_dataset(cfg.generator, derive_seed(rep_seed, "gen"));
    const Index n = data.x.rows();

    std::size_t holdout_count = scaled_ceil(n, cfg.holdout_fraction);
    holdout_count = std::min<std::size_t>(std::max<std::size_t>(holdout_count, 1),
                                          static_cast<std::size_t>(n) - 2);
    Rng holdout_rng = make_rng(derive_seed(rep_seed, "holdout"));
    IndexList holdout = sample_without_replacement(n, holdout_count, holdout_rng);
    std::sort(holdout.begin(), holdout.end());
    std::vector<char> held(static_cast<std::size_t>(n), 0);
    for (const Index i : holdout) held[static_cast<std::size_t>(i)] = 1;
    IndexList train;
    train.reserve(static_cast<std::size_t>(n) - holdout_count);
    for (Index i = 0; i < n; ++i) {
      if (!held[static_cast<std::size_t>(i)]) train.push_back(i);
    }

    const Matrix train_x = select_rows(data.x, train);
    const Vector train_y = gather(data.y, train);
    const Matrix hold_x = select_rows(data.x, holdout);
    const Vector hold_y = gather(data.y, holdout);

    for (std::size_t a = 0; a < arms.size(); ++a) {
      SampleSpec spec = spec_for(cfg, arms[a].method);
      spec.rank = arms[a].rank;
      const double t0 = wall_seconds();
      const RetentiveSubset subset =
          draw_sample(spec, train_x, derive_seed(rep_seed, "sample:" + arms[a].label));
      const Matrix sub_x = select_rows(train_x, subset.indices);
      const Vector sub_y = gather(train_y, subset.indices);
      const OlsFit fit = ols_fit(sub_x, sub_y);
      const double elapsed = wall_seconds() - t0;

      const auto rr = static_cast<std::size_t>(r);
      slots[a][kArmMse][rr] = mean_squared_error(fit, hold_x, hold_y);
      slots[a][kArmR2][rr] = r_squared_on(fit, hold_x, hold_y);
      slots[a][kArmTime][rr] = elapsed;
      if (arms[a].label == "Dyn" && subset.pca_rank.has_value()) {
        dyn_rank[rr] = static_cast<double>(*subset.pca_rank);
      }
    }
  });

  AggregateReport report;
  start_report(report, cfg);
  report.rows = {"MSE", "R2", "Runtime (s)"};
  for (const Arm& arm : arms) report.cols.push_back(arm.label);
  report.timing_rows = {"Runtime (s)"};
  for (std::size_t a = 0; a < arms.size(); ++a) {
    set_cell(report, "MSE", arms[a].label, std::move(slots[a][kArmMse]));
    set_cell(report, "R2", arms[a].label, std::move(slots[a][kArmR2]));
    set_cell(report, "Runtime (s)", arms[a].label, std::move(slots[a][kArmTime]));
  }
  report.summary["dataset"] = {{"rows", cfg.generator.rows}, {"cols", cfg.generator.cols}};
  report.summary["dyn_pcs"] = summary_of(std::move(dyn_rank));
  return report;
}

AggregateReport run_adaptive(const ExperimentConfig& cfg) {
  check_replications(cfg);

  const std::vector<Index> ranks = {1, 2, 3, 4, 5};
  const std::string method = pcaqs_method_tag(cfg.criterion.kind);
  const int reps = cfg.replications;
  enum Slot {
    kCpuRet,
    kCpuFull,
    kMseRet,
    kMseFull,
    kR2Ret,
    kR2Full,
    kRelMse,
    kSpeedup,
    kAdaptiveSlots
  };
  std::vector<std::array<std::vector<double>, kAdaptiveSlots>> slots(ranks.size());
  for (auto& per_rank : slots) {
    for (auto& series : per_rank) series.resize(static_cast<std::size_t>(reps));
  }

  parallel_reps(reps, cfg.threads, [&](int r) {
    const RngSeed rep_seed = derive_seed(cfg.seed, static_cast<RngSeed>(r));
    const SyntheticDataset data = make_dataset(cfg.generator, derive_seed(rep_seed, "gen"));

    // full-data reference fit, shared by every rank arm of this replication
    const double full_t0 = thread_cpu_seconds();
    const OlsFit full_fit = ols_fit(data.x, data.y);
    const double cpu_full = thread_cpu_seconds() - full_t0;
    const double mse_full = mean_squared_error(full_fit, data.x, data.y);
    const double r2_full = r_squared_on(full_fit, data.x, data.y);

    for (std::size_t a = 0; a < ranks.size(); ++a) {
      SampleSpec spec = spec_for(cfg, method);
      spec.rank = RankChoice::fixed(ranks[a]);
      const RetentiveSubset subset = draw_sample(
          spec, data.x,
          derive_seed(rep_seed, "sample:" + method + ":rank" + std::to_string(ranks[a])));
      const Matrix sub_x = select_rows(data.x, subset.indices);
      const Vector sub_y = gather(data.y, subset.indices);

      const double ret_t0 = thread_cpu_seconds();
      const OlsFit ret_fit = ols_fit(sub_x, sub_y);
      const double cpu_ret = thread_cpu_seconds() - ret_t0;

      const double mse_ret = mean_squared_error(ret_fit, data.x, data.y);
      const auto rr = static_cast<std::size_t>(r);
      slots[a][kCpuRet][rr] = cpu_ret;
      slots[a][kCpuFull][rr] = cpu_full;
      slots[a][kMseRet][rr] = mse_ret;
      slots[a][kMseFull][rr] = mse_full;
      slots[a][kR2Ret][rr] = r_squared_on(ret_fit, data.x, data.y);
      slots[a][kR2Full][rr] = r2_full;
      slots[a][kRelMse][rr] = relative_mse(mse_ret, mse_full);
      slots[a][kSpeedup][rr] = cpu_full / std::max(cpu_ret, 1e-12);
    }
  });

  AggregateReport report;
  start_report(report, cfg);
  report.rows = {"CPU Ret (s)", "CPU Full (s)", "MSE Ret", "MSE Full",
                 "R2 Ret",      "R2 Full",      "Rel MSE", "Speedup"};
  for (const Index k : ranks) report.cols.push_back("PCA=" + std::to_string(k));
  report.timing_rows = {"CPU Ret (s)", "CPU Full (s)", "Speedup"};
  const std::array<std::string, kAdaptiveSlots> row_of = {
      "CPU Ret (s)", "CPU Full (s)", "MSE Ret", "MSE Full",
      "R2 Ret",      "R2 Full",      "Rel MSE", "Speedup"};
  for (std::size_t a = 0; a < ranks.size(); ++a) {
    for (int s = 0; s < kAdaptiveSlots; ++s) {
      set_cell(report, row_of[static_cast<std::size_t>(s)], report.cols[a],
               std::move(slots[a][static_cast<std::size_t>(s)]));
    }
  }
  report.summary["dataset"] = {{"rows", cfg.generator.rows}, {"cols", cfg.generator.cols}};
  report.summary["selector"] = to_string(cfg.criterion.kind);
  return report;
}

AggregateReport run_cluster(const ExperimentConfig& cfg) {
  check_replications(cfg);
  const std::string method = cfg.methods.empty() ? std::string("pcaqs-random")
                                                 : cfg.methods.front();

  const int reps = cfg.replications;
  std::vector<double> ret(static_cast<std::size_t>(reps));
  std::vector<double> full(static_cast<std::size_t>(reps));
  std::vector<double> diff(static_cast<std::size_t>(reps));

  parallel_reps(reps, cfg.threads, [&](int r) {
    const RngSeed rep_seed = derive_seed(cfg.seed, static_cast<RngSeed>(r));
    const SyntheticDataset data = make_dataset(cfg.generator, derive_seed(rep_seed, "gen"));

    const RetentiveSubset subset =
        draw_sample(spec_for(cfg, method), data.x, derive_seed(rep_seed, "sample:" + method));
    const Matrix sub_x = select_rows(data.x, subset.indices);

    const KMeansResult km_ret = kmeans(sub_x, cfg.cluster_k, cfg.cluster_kmeans,
                                       derive_seed(rep_seed, "kmeans:ret"));
    const KMeansResult km_full = kmeans(data.x, cfg.cluster_k, cfg.cluster_kmeans,
                                        derive_seed(rep_seed, "kmeans:full"));

    // score both clusterings on the full rows and the same evaluation sample
    const std::vector<int> ret_labels = assign_nearest(km_ret.centroids, data.x);
    const RngSeed sil_seed = derive_seed(rep_seed, "silhouette");
    const double sil_ret = silhouette(data.x, ret_labels, cfg.silhouette_cap, sil_seed);
    const double sil_full =
        silhouette(data.x, km_full.assignments, cfg.silhouette_cap, sil_seed);

    const auto rr = static_cast<std::size_t>(r);
    ret[rr] = sil_ret;
    full[rr] = sil_full;
    diff[rr] = sil_ret - sil_full;
  });

  AggregateReport report;
  start_report(report, cfg);
  report.rows = {"Silhouette Ret", "Silhouette Full", "Diff"};
  report.cols = {"kmeans"};
  set_cell(report, "Silhouette Ret", "kmeans", std::move(ret));
  set_cell(report, "Silhouette Full", "kmeans", std::move(full));

  int within_005 = 0;
  int within_010 = 0;
  std::vector<int> hist(20, 0);
  int underflow = 0;
  int overflow = 0;
  for (const double d : diff) {
    if (std::abs(d) <= 0.05) ++within_005;
    if (std::abs(d) <= 0.10) ++within_010;
    if (d < -0.1) {
      ++underflow;
    } else if (d >= 0.1) {
      ++overflow;
    } else {
      auto bin = static_cast<int>(std::floor((d + 0.1) / 0.01));
      bin = std::clamp(bin, 0, 19);
      ++hist[static_cast<std::size_t>(bin)];
    }
  }
  const auto denom = static_cast<double>(reps);
  report.summary["dataset"] = {{"rows", cfg.generator.rows}, {"cols", cfg.generator.cols}};
  report.summary["within_0.05"] = static_cast<double>(within_005) / denom;
  report.summary["within_0.10"] = static_cast<double>(within_010) / denom;
  json edges = json::array();
  for (int bin = 0; bin <= 20; ++bin) edges.push_back(-0.1 + 0.01 * bin);
  report.summary["diff_histogram"] = {{"bin_edges", edges},
                                      {"counts", hist},
                                      {"underflow", underflow},
                                      {"overflow", overflow}};
  set_cell(report, "Diff", "kmeans", std::move(diff));
  return report;
}

AggregateReport run_similarity(const ExperimentConfig& cfg) {
  check_replications(cfg);
  if (cfg.methods.empty()) throw std::invalid_argument("similarity: no methods configured");

  Matrix source;  // fixed source when a CSV is given, else regenerated per rep
  const bool from_file = !cfg.input_path.empty();
  if (from_file) {
    source = ingest_csv(cfg.input_path, true, false).values;
  }

  const int reps = cfg.replications;
  const auto num_methods = cfg.methods.size();
  enum Slot { kSimEnergy, kSimMahal, kSimKl, kSimMmd, kSimSlots };
  std::vector<std::array<std::vector<double>, kSimSlots>> slots(num_methods);
  for (auto& per_method : slots) {
    for (auto& series : per_method) series.resize(static_cast<std::size_t>(reps));
  }

  parallel_reps(reps, cfg.threads, [&](int r) {
    const RngSeed rep_seed = derive_seed(cfg.seed, static_cast<RngSeed>(r));
    Matrix generated;
    if (!from_file) {
      generated = make_dataset(cfg.generator, derive_seed(rep_seed, "gen")).x;
    }
    const Matrix& x = from_file ? source : generated;

    for (std::size_t m = 0; m < num_methods; ++m) {
      const std::string& method = cfg.methods[m];
      const RetentiveSubset subset =
          draw_sample(spec_for(cfg, method), x, derive_seed(rep_seed, "sample:" + method));
      const Matrix sub_x = select_rows(x, subset.indices);

      MetricParams mp = cfg.metrics;
      mp.seed = derive_seed(rep_seed, "metrics:" + method);
      const SimilarityReport sim = compute_similarity(sub_x, x, mp);

      const auto rr = static_cast<std::size_t>(r);
      slots[m][kSimEnergy][rr] = sim.energy;
      slots[m][kSimMahal][rr] = sim.mahalanobis;
      slots[m][kSimKl][rr] = sim.kl;
      slots[m][kSimMmd][rr] = sim.mmd;
    }
  });

  AggregateReport report;
  start_report(report, cfg);
  report.rows = cfg.methods;
  report.cols = {kEnergyCol, kMahalanobisCol, kKlCol, kMmdCol};
  report.methods_on_rows = true;
  for (std::size_t m = 0; m < num_methods; ++m) {
    set_cell(report, cfg.methods[m], kEnergyCol, std::move(slots[m][kSimEnergy]));
    set_cell(report, cfg.methods[m], kMahalanobisCol, std::move(slots[m][kSimMahal]));
    set_cell(report, cfg.methods[m], kKlCol, std::move(slots[m][kSimKl]));
    set_cell(report, cfg.methods[m], kMmdCol, std::move(slots[m][kSimMmd]));
  }
  if (from_file) {
    report.summary["source"] = cfg.input_path;
    report.summary["dataset"] = {{"rows", source.rows()}, {"cols", source.cols()}};
  } else {
    report.summary["dataset"] = {{"rows", cfg.generator.rows}, {"cols", cfg.generator.cols}};
  }
  return report;
}

AggregateReport run_experiment(const ExperimentConfig& cfg) {
  if (cfg.experiment == "compare") return run_comparison(cfg);
  if (cfg.experiment == "linear") return run_linear(cfg);
  if (cfg.experiment == "adaptive") return run_adaptive(cfg);
  if (cfg.experiment == "cluster") return run_cluster(cfg);
  if (cfg.experiment == "similarity") return run_similarity(cfg);
  throw std::invalid_argument("run_experiment: unknown experiment '" + cfg.experiment +
                              "' (expected compare, linear, adaptive, cluster, or similarity)");
}

std::string format_table(const AggregateReport& report) {
  auto cell_text = [&](const std::string& row, const std::string& col) {
    const auto it = report.cells.find({row, col});
    if (it == report.cells.end()) return std::string("-");
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.6g (%.3g)", it->second.mean, it->second.sd);
    return std::string(buffer);
  };

  std::size_t label_width = 0;
  for (const std::string& row : report.rows) label_width = std::max(label_width, row.size());
  std::vector<std::size_t> widths(report.cols.size());
  for (std::size_t c = 0; c < report.cols.size(); ++c) {
    widths[c] = report.cols[c].size();
    for (const std::string& row : report.rows) {
      widths[c] = std::max(widths[c], cell_text(row, report.cols[c]).size());
    }
  }

  std::string out = report.experiment + ": " + std::to_string(report.replications) +
                    " replications, seed " + std::to_string(report.seed) + "\n";
  auto pad_left = [](const std::string& text, std::size_t width) {
    return std::string(width - text.size(), ' ') + text;
  };
  out += std::string(label_width, ' ');
  for (std::size_t c = 0; c < report.cols.size(); ++c) {
    out += "  " + pad_left(report.cols[c], widths[c]);
  }
  out += '\n';
  for (const std::string& row : report.rows) {
    out += row + std::string(label_width - row.size(), ' ');
    for (std::size_t c = 0; c < report.cols.size(); ++c) {
      out += "  " + pad_left(cell_text(row, report.cols[c]), widths[c]);
    }
    out += '\n';
  }
  return out;
}

nlohmann::json report_to_json(const AggregateReport& report, bool include_timing) {
  json cells = json::object();
  for (const std::string& row : report.rows) {
    const bool is_timing = std::find(report.timing_rows.begin(), report.timing_rows.end(),
                                     row) != report.timing_rows.end();
    if (is_timing && !include_timing) continue;
    json per_row = json::object();
    for (const std::string& col : report.cols) {
      const auto it = report.cells.find({row, col});
      if (it == report.cells.end()) continue;
      per_row[col] = stats_to_json(it->second);
    }
    cells[row] = std::move(per_row);
  }
  return json{{"experiment", report.experiment},
              {"replications", report.replications},
              {"seed", report.seed},
              {"rows", report.rows},
              {"cols", report.cols},
              {"methods_on_rows", report.methods_on_rows},
              {"timing_rows", report.timing_rows},
              {"cells", std::move(cells)},
              {"summary", report.summary},
              {"config", report.config}};
}

std::string plot_csv(const AggregateReport& report) {
  std::string out = "experiment,method,metric,replication,value\n";
  for (const std::string& row : report.rows) {
    if (std::find(report.timing_rows.begin(), report.timing_rows.end(), row) !=
        report.timing_rows.end()) {
      continue;
    }
    for (const std::string& col : report.cols) {
      const auto it = report.cells.find({row, col});
      if (it == report.cells.end()) continue;
      const std::string& method = report.methods_on_rows ? row : col;
      const std::string& metric = report.methods_on_rows ? col : row;
      for (std::size_t r = 0; r < it->second.raw.size(); ++r) {
        out += report.experiment + ',' + method + ',' + metric + ',' +
               std::to_string(r + 1) + ',' + format_double(it->second.raw[r]) + '\n';
      }
    }
  }
  return out;
}

}  // namespace pcaqs
